#pragma once

#include <vector>

#include "hotype/bimodule.hpp"
#include "hotype/errors.hpp"

namespace hotype {

enum class Side { row, col };

// An integer matrix acting on one side of an Element.  Row transforms act by
// e -> P * e (entry P[r][s] moves row s into row r); column transforms act by
// e -> e * Q (entry Q[b][c] moves column b into column c).
struct Transform {
    Side side = Side::row;
    std::vector<std::vector<i64>> mat;

    int size() const { return static_cast<int>(mat.size()); }
};

inline Transform identity_transform(Side side, int n) {
    std::vector<std::vector<i64>> m(n, std::vector<i64>(n, 0));
    for (int i = 0; i < n; ++i) m[i][i] = 1;
    return Transform{side, std::move(m)};
}

// "Add coeff * (row|column) source into target".  For row transforms the
// coefficient sits at mat[target][source], for column transforms at
// mat[source][target]; either way it must satisfy the acting order's pattern.
inline Transform elementary_add(Side side, int n, int target, int source, i64 coeff) {
    Transform t = identity_transform(side, n);
    if (side == Side::row)
        t.mat[target][source] = coeff;
    else
        t.mat[source][target] = coeff;
    return t;
}

inline Transform diagonal_unit(Side side, int n, int pos, i64 unit) {
    Transform t = identity_transform(side, n);
    t.mat[pos][pos] = unit;
    return t;
}

namespace detail {

// Integer determinant by fraction-free Gaussian elimination.
inline i64 int_det(std::vector<std::vector<i64>> a) {
    int n = static_cast<int>(a.size());
    i64 sign = 1, prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (a[i][k] != 0) {
                    p = i;
                    break;
                }
            if (p < 0) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return n == 0 ? 1 : sign * a[n - 1][n - 1];
}

// Adjugate via cofactors (desk-scale sizes only).
inline std::vector<std::vector<i64>> adjugate(const std::vector<std::vector<i64>>& a) {
    int n = static_cast<int>(a.size());
    std::vector<std::vector<i64>> adj(n, std::vector<i64>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<std::vector<i64>> minor;
            minor.reserve(n - 1);
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                std::vector<i64> row;
                row.reserve(n - 1);
                for (int c = 0; c < n; ++c)
                    if (c != j) row.push_back(a[r][c]);
                minor.push_back(std::move(row));
            }
            i64 cof = int_det(std::move(minor));
            adj[j][i] = ((i + j) % 2 == 0) ? cof : -cof;
        }
    return adj;
}

} // namespace detail

// Checks that t's entries obey the stripe pattern of the acting order, given
// the stripe of each row/column of the element it will act on.
inline void check_pattern(const Transform& t, const Element& e) {
    const TiledRing& ring = t.side == Side::row ? e.spec->row_ring : e.spec->col_ring;
    int n = t.side == Side::row ? e.total_rows() : e.total_cols();
    if (t.size() != n) throw domain_error(errc::spec_mismatch, "transform size mismatch");
    auto stripe = [&](int k) {
        return t.side == Side::row ? e.row_stripe(k) : e.col_stripe(k);
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            // The transform must be a matrix of the acting order: its (i,j)
            // entry obeys the pattern entry of the corresponding stripes.
            i64 d = ring.d[stripe(i)][stripe(j)];
            if (!divides(d, t.mat[i][j]))
                throw domain_error(errc::pattern_violated,
                                   "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                       ") not divisible by " + std::to_string(d));
        }
}

// Invertibility inside the tiled order: integer determinant +-1 and the
// inverse (= +-adjugate) again obeys the pattern.
inline void check_invertible(const Transform& t, const Element& e) {
    i64 det = detail::int_det(t.mat);
    if (det != 1 && det != -1)
        throw domain_error(errc::not_invertible, "determinant " + std::to_string(det));
    auto adj = detail::adjugate(t.mat);
    Transform inv{t.side, std::move(adj)};
    if (det == -1)
        for (auto& row : inv.mat)
            for (auto& v : row) v = -v;
    try {
        check_pattern(inv, e);
    } catch (const domain_error&) {
        throw domain_error(errc::not_invertible, "inverse leaves the order");
    }
}

// Applies an invertible transform; throws PatternViolated / NotInvertible on
// bad input.  W does not use ring transforms (its calculus lives elsewhere).
inline Element apply_transform(const Element& e, const Transform& t, bool check = true) {
    if (!e.spec->ring_transforms)
        throw domain_error(errc::spec_mismatch, "spec " + e.spec->id + " has no ring transforms");
    if (check) {
        check_pattern(t, e);
        check_invertible(t, e);
    }
    Element out = make_zero_element(e.spec, e.row_sizes, e.col_sizes);
    int R = e.total_rows(), C = e.total_cols();
    if (t.side == Side::row) {
        const TiledRing& ring = e.spec->row_ring;
        for (int r = 0; r < R; ++r) {
            int rs = e.row_stripe(r);
            for (int c = 0; c < C; ++c) {
                int cs = e.col_stripe(c);
                const Cell& dst = e.spec->cell(rs, cs);
                if (dst.is_zero_cell()) continue;
                Residue acc(dst.modulus, 0);
                for (int s = 0; s < R; ++s) {
                    if (t.mat[r][s] == 0) continue;
                    const Residue& v = e.at(s, c);
                    if (v.is_zero()) continue;
                    int ss = e.row_stripe(s);
                    acc = acc + scalar_act(t.mat[r][s], v.modulus, dst.modulus,
                                           ring.starred(rs + 1, ss + 1), v);
                }
                out.entries[r][c] = acc;
            }
        }
    } else {
        const TiledRing& ring = e.spec->col_ring;
        for (int c = 0; c < C; ++c) {
            int cs = e.col_stripe(c);
            for (int r = 0; r < R; ++r) {
                int rs = e.row_stripe(r);
                const Cell& dst = e.spec->cell(rs, cs);
                if (dst.is_zero_cell()) continue;
                Residue acc(dst.modulus, 0);
                for (int b = 0; b < C; ++b) {
                    if (t.mat[b][c] == 0) continue;
                    const Residue& v = e.at(r, b);
                    if (v.is_zero()) continue;
                    int bs = e.col_stripe(b);
                    acc = acc + scalar_act(t.mat[b][c], v.modulus, dst.modulus,
                                           ring.starred(bs + 1, cs + 1), v);
                }
                out.entries[r][c] = acc;
            }
        }
    }
    return out;
}

} // namespace hotype
