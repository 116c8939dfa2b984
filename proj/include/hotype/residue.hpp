#pragma once

#include <cstdint>
#include <utility>

#include "hotype/errors.hpp"

namespace hotype {

using i64 = long long;

// Least non-negative representative of v modulo m.  m == 0 encodes the
// infinite cyclic group, where v is kept as-is.
inline i64 reduce_mod(i64 v, i64 m) {
    if (m == 0) return v;
    i64 r = v % m;
    if (r < 0) r += m;
    return r;
}

// An element of a cyclic group Z/m (m > 0) or of Z (m == 0).
struct Residue {
    i64 modulus = 0;
    i64 value = 0;

    Residue() = default;
    Residue(i64 mod, i64 val) : modulus(mod), value(reduce_mod(val, mod)) {}

    bool is_zero() const { return value == 0; }

    friend bool operator==(const Residue&, const Residue&) = default;
    friend auto operator<=>(const Residue&, const Residue&) = default;
};

inline Residue operator+(const Residue& a, const Residue& b) {
    return Residue(a.modulus, a.value + b.value);
}

inline Residue operator-(const Residue& a) { return Residue(a.modulus, -a.value); }

inline Residue operator-(const Residue& a, const Residue& b) { return a + (-b); }

inline Residue operator*(i64 c, const Residue& a) {
    return Residue(a.modulus, reduce_mod(c, a.modulus) * a.value);
}

// Largest power of p dividing m (m > 0).
inline i64 prime_part(i64 m, i64 p) {
    i64 q = 1;
    while (m % p == 0) {
        m /= p;
        q *= p;
    }
    return q;
}

// Splits a residue into its 2-primary and 3-primary components.  Defined for
// moduli of the form 2^a * 3^b; a pure prime power yields a trivial (Z/1)
// complement on the other side.
inline std::pair<Residue, Residue> crt_split(const Residue& r) {
    i64 m = r.modulus;
    if (m <= 0) throw domain_error(errc::coefficient_not_allowed, "crt_split needs a finite modulus");
    i64 m2 = prime_part(m, 2);
    i64 m3 = prime_part(m, 3);
    if (m2 * m3 != m)
        throw domain_error(errc::coefficient_not_allowed,
                           "crt_split modulus must factor as 2^a * 3^b");
    return {Residue(m2, r.value), Residue(m3, r.value)};
}

// Inverse of crt_split.  The two moduli must be coprime.
inline Residue crt_recombine(const Residue& a, const Residue& b) {
    i64 m = a.modulus * b.modulus;
    for (i64 v = 0; v < m; ++v)
        if (v % a.modulus == a.value && v % b.modulus == b.value) return Residue(m, v);
    throw domain_error(errc::coefficient_not_allowed, "crt_recombine: moduli not coprime");
}

// The *-rule scalar action.  A coefficient written 12b on a starred position
// acts on a Z/2 value as b*u; on every other target it acts as ordinary
// multiplication by 12b.  Non-starred coefficients act by lift-and-multiply
// through the canonical map into the target cell.
inline Residue scalar_act(i64 coeff, i64 from_mod, i64 to_mod, bool starred, const Residue& value) {
    if (value.modulus != from_mod)
        throw domain_error(errc::coefficient_not_allowed, "value not in source cell");
    if (starred) {
        if (coeff % 12 != 0)
            throw domain_error(errc::coefficient_not_allowed,
                               "starred coefficient must be a multiple of 12");
        if (to_mod == 2) return Residue(2, (coeff / 12) * value.value);
    }
    return Residue(to_mod, coeff * value.value);
}

} // namespace hotype
