#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hotype/bimodule.hpp"
#include "hotype/errors.hpp"
#include "hotype/oracle.hpp"
#include "hotype/snf.hpp"

namespace hotype {

// ---------------------------------------------------------------------------
// The dimension-7 word calculus.  A word is a sequence of "decorations", one
// per generator pair of the matrix problem, linked by junction symbols:
//
//   decoration _t  = the row pair  (*_t, _t*);   ^r = the column pair (^r*, *^r)
//   lone letters *_inf, _inf*, ^inf*, *^inf      = single partnerless lines
//   junction *     = an odd entry linking the two neighbouring letters
//   junction th    = the distinguished cross junction; with parameter 1 on
//                    either side it contributes an even entry 2 in a mod-4 cell
//   junction eps   = the integer tie 2^k between an _inf* row and a ^inf*
//                    column (a "valuation-k" line pair)
//
// Junction placement is positional: in plain words a * after a ^-letter links
// ^r* to the next letter's *_t slot, and a * after a _-letter links _t* to the
// next letter's *^r slot.  Left of a th/eps anchor the two roles swap, which
// reproduces the left flanks of the cross-word normal forms.  This template
// orientation is forced, so every word has a unique printable form.  Cycles
// carry a primitive polynomial over the 2-element field and realize as
// companion blocks ("bands").
// ---------------------------------------------------------------------------

constexpr int winf = -1; // the parameter "inf"

enum class WSide { sub, sup };                 // _t (row pair) vs ^r (col pair)
enum class WStar { pair, left, right };        // lone letters carry a star side

struct WDeco {
    WSide side = WSide::sub;
    int param = 1;              // >= 1, or winf
    WStar star = WStar::pair;   // != pair only for param == winf

    friend bool operator==(const WDeco&, const WDeco&) = default;
    friend auto operator<=>(const WDeco&, const WDeco&) = default;
};

enum class WJoin { star, theta, eps };

struct XWord {
    std::vector<WDeco> decos;
    std::vector<WJoin> joins;   // strings: decos.size()-1; cycles: decos.size()
    bool cycle = false;
    std::vector<int> poly;      // band polynomial c_0..c_deg over F2 (bands only)

    friend bool operator==(const XWord&, const XWord&) = default;
    friend auto operator<=>(const XWord&, const XWord&) = default;
};

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

inline std::string poly_to_string(const std::vector<int>& poly) {
    std::string out;
    for (int k = static_cast<int>(poly.size()) - 1; k >= 0; --k) {
        if (!poly[k]) continue;
        if (!out.empty()) out += "+";
        if (k == 0)
            out += "1";
        else if (k == 1)
            out += "t";
        else
            out += "t^" + std::to_string(k);
    }
    return out.empty() ? "0" : out;
}

inline std::string word_to_string(const XWord& w) {
    auto name = [](const WDeco& d) {
        std::string p = d.param == winf ? "inf" : std::to_string(d.param);
        return (d.side == WSide::sub ? "_" : "^") + p;
    };
    std::string out;
    for (size_t i = 0; i < w.decos.size(); ++i) {
        const WDeco& d = w.decos[i];
        // a lone letter's own star is printed only when it faces outward;
        // facing a junction it merges with the junction star
        if (i == 0 && !w.cycle && d.star == WStar::left) out += "*";
        out += name(d);
        if (i + 1 == w.decos.size() && !w.cycle && d.star == WStar::right) out += "*";
        if (i < w.joins.size() && (i + 1 < w.decos.size() || w.cycle)) {
            switch (w.joins[i]) {
            case WJoin::star: out += "*"; break;
            case WJoin::theta: out += "th"; break;
            case WJoin::eps: out += "eps"; break;
            }
        }
    }
    if (w.cycle) {
        // the closing junction is implied by the cycle marker
        if (!out.empty() && out.back() == '*') out.pop_back();
        out += "@" + poly_to_string(w.poly);
    }
    return out;
}

// ---------------------------------------------------------------------------
// structural validation
// ---------------------------------------------------------------------------

// Index of the th/eps junction, or -1 for a plain word.
inline int anchor_index(const XWord& w) {
    for (size_t i = 0; i < w.joins.size(); ++i)
        if (w.joins[i] != WJoin::star) return static_cast<int>(i);
    return -1;
}

inline void check_word_structure(const XWord& w) {
    const auto& d = w.decos;
    if (d.empty()) throw domain_error(errc::parse_error, "empty word");
    size_t need = w.cycle ? d.size() : d.size() - 1;
    if (w.joins.size() != need)
        throw domain_error(errc::parse_error, "junction count mismatch");
    if (w.cycle && d.size() % 2 != 0)
        throw domain_error(errc::illegal_adjacency, "cycle must alternate letter kinds");
    for (size_t i = 0; i < d.size(); ++i) {
        const WDeco& a = d[i];
        if (a.param != winf && a.param < 1)
            throw domain_error(errc::parse_error, "parameter must be >= 1");
        if ((a.star != WStar::pair) != (a.param == winf))
            throw domain_error(errc::parse_error, "star side exactly on inf letters");
        if (a.param == winf) {
            bool at_end = !w.cycle && (i == 0 || i + 1 == d.size());
            if (!at_end)
                throw domain_error(errc::infinity_inside_word,
                                   "inf letters occur only at the ends");
        }
        if (i + 1 < d.size() || w.cycle) {
            if (d[i].side == d[(i + 1) % d.size()].side)
                throw domain_error(errc::illegal_adjacency,
                                   "letters must alternate between _ and ^");
        }
    }
    int anchors = 0;
    for (size_t i = 0; i < w.joins.size(); ++i) {
        WJoin jn = w.joins[i];
        if (jn == WJoin::star) continue;
        ++anchors;
        const WDeco& a = d[i];
        const WDeco& b = d[(i + 1) % d.size()];
        if (a.side != WSide::sub || b.side != WSide::sup)
            throw domain_error(errc::illegal_adjacency,
                               "th and eps join a _-letter to a ^-letter");
        if (jn == WJoin::theta) {
            if (a.param == 1 && b.param == 1)
                throw domain_error(errc::illegal_adjacency,
                                   "theta parameters cannot both be 1");
        } else {
            if (a.param == winf || a.param != b.param)
                throw domain_error(errc::illegal_adjacency,
                                   "eps needs equal finite parameters");
        }
    }
    if (anchors > 1)
        throw domain_error(errc::illegal_adjacency, "at most one th or eps junction");
    if (anchors == 1) {
        for (const auto& a : d)
            if (a.param == winf)
                throw domain_error(errc::infinity_inside_word,
                                   "no inf letters in a th- or eps-word");
    }
    if (w.cycle) {
        if (anchors)
            throw domain_error(errc::illegal_adjacency, "cycles use only plain junctions");
        for (const auto& a : d)
            if (a.param == winf)
                throw domain_error(errc::infinity_inside_word, "no inf letters in a cycle");
        if (w.poly.empty() || w.poly.back() != 1)
            throw domain_error(errc::invalid_word, "band polynomial must be monic");
    } else if (!w.poly.empty()) {
        throw domain_error(errc::parse_error, "polynomial only on cycles");
    }
    // at most one partnerless line from each of the two integer-line families
    int sub_inf = 0, sup_inf = 0;
    for (const auto& a : d)
        if (a.param == winf && a.star == WStar::right)
            (a.side == WSide::sub ? sub_inf : sup_inf)++;
    if (sub_inf > 1 || sup_inf > 1)
        throw domain_error(errc::illegal_adjacency,
                           "at most one _inf* letter and one ^inf* letter");
    // the two partnerless integer letters joined directly cancel to nothing
    for (size_t i = 0; i < w.joins.size(); ++i)
        if (w.joins[i] == WJoin::star && d.size() >= 2) {
            const WDeco& a = d[i];
            const WDeco& b = d[(i + 1) % d.size()];
            if (a.param == winf && b.param == winf && a.star == WStar::right &&
                b.star == WStar::right)
                throw domain_error(errc::invalid_word,
                                   "_inf* and ^inf* joined by a star cancel");
        }
}

// ---------------------------------------------------------------------------
// classification of a word: kind plus indecomposability verdict
// ---------------------------------------------------------------------------

enum class WordKind { usual, theta, epsilon, band };
enum class WordVerdict { indecomposable, decomposable, invalid };

struct WordReport {
    WordKind kind = WordKind::usual;
    WordVerdict verdict = WordVerdict::invalid;
    std::string reason; // set when the verdict is not "indecomposable"
};

namespace detail {

// --- polynomial arithmetic over the 2-element field ------------------------

inline std::vector<int> poly_trim(std::vector<int> p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
    return p;
}

// remainder of a modulo b (b nonzero, both trimmed)
inline std::vector<int> poly_mod(std::vector<int> a, const std::vector<int>& b) {
    while (a.size() >= b.size()) {
        if (a.back()) {
            size_t shift = a.size() - b.size();
            for (size_t i = 0; i < b.size(); ++i) a[i + shift] ^= b[i];
        }
        a.pop_back();
        a = poly_trim(a);
        if (a.empty()) break;
    }
    return a;
}

inline std::vector<int> poly_div_exact(std::vector<int> a, const std::vector<int>& b) {
    std::vector<int> q(a.size() - b.size() + 1, 0);
    while (a.size() >= b.size()) {
        if (a.back()) {
            size_t shift = a.size() - b.size();
            q[shift] = 1;
            for (size_t i = 0; i < b.size(); ++i) a[i + shift] ^= b[i];
        }
        a.pop_back();
        a = poly_trim(a);
        if (a.empty()) break;
    }
    return q;
}

// True when f (monic, degree >= 1) is a power of a single irreducible
// polynomial different from t.  This is the admissibility condition on band
// polynomials.
inline bool poly_is_primitive_not_t(const std::vector<int>& f0) {
    std::vector<int> f = poly_trim(f0);
    if (f.size() < 2 || f.back() != 1) return false; // degree >= 1, monic
    if (f[0] == 0) return false;                     // divisible by t
    // find the smallest-degree irreducible divisor p of f ...
    std::vector<int> p;
    for (int deg = 1; deg < static_cast<int>(f.size()) && p.empty(); ++deg) {
        for (int bits = 0; bits < (1 << deg); ++bits) {
            std::vector<int> c(deg + 1, 0);
            c.back() = 1;
            for (int k = 0; k < deg; ++k) c[k] = (bits >> k) & 1;
            if (poly_mod(f, c).empty()) {
                p = c; // smallest-degree divisor is automatically irreducible
                break;
            }
        }
    }
    if (p.empty()) p = f; // f itself is irreducible
    // ... and check that f is a power of it
    std::vector<int> rest = f;
    while (rest.size() > 1) {
        if (!poly_mod(rest, p).empty()) return false;
        rest = poly_trim(poly_div_exact(rest, p));
    }
    return rest.size() == 1 && rest[0] == 1;
}

// --- cycle aperiodicity -----------------------------------------------------

inline bool cycle_is_aperiodic(const XWord& w) {
    size_t n = w.decos.size();
    for (size_t d = 1; d < n; ++d) {
        if (n % d != 0) continue;
        bool period = true;
        for (size_t i = 0; i < n && period; ++i)
            if (!(w.decos[i] == w.decos[(i + d) % n])) period = false;
        if (period) return false;
    }
    return true;
}

// --- the lexicographic test for degenerate cross-words ----------------------
//
// A cross junction whose _-side parameter is 1 encodes an even correction in
// a mod-4 cell; the element decomposes unless the interleaved parameter
// sequences read outward from the junction satisfy a strict lexicographic
// inequality.  Both sequences stop at the end of the word, and a proper
// prefix counts as strictly smaller.  Additionally, the presence of any other
// _-parameter >= 2 always makes the element decompose (verified exhaustively
// against the orbit computation at small sizes).  The ^-side mirror swaps
// the roles of the two letter families.

inline bool lex_strictly_less(const std::vector<int>& a, const std::vector<int>& b) {
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return a.size() < b.size();
}

} // namespace detail

inline WordReport validate_word(const XWord& w) {
    WordReport rep;
    // best-effort kind even for structurally broken words
    rep.kind = w.cycle ? WordKind::band : WordKind::usual;
    for (WJoin j : w.joins) {
        if (j == WJoin::theta) rep.kind = WordKind::theta;
        if (j == WJoin::eps) rep.kind = WordKind::epsilon;
    }
    try {
        check_word_structure(w);
    } catch (const domain_error& e) {
        rep.verdict = WordVerdict::invalid;
        rep.reason = e.what();
        return rep;
    }
    if (w.cycle) {
        if (!detail::cycle_is_aperiodic(w)) {
            rep.verdict = WordVerdict::invalid;
            rep.reason = "cycle is a repetition of a shorter cycle";
            return rep;
        }
        if (!detail::poly_is_primitive_not_t(w.poly)) {
            rep.verdict = WordVerdict::invalid;
            rep.reason = "band polynomial must be a power of one irreducible other than t";
            return rep;
        }
        rep.verdict = WordVerdict::indecomposable;
        return rep;
    }
    int ai = anchor_index(w);
    if (ai < 0 || w.joins[ai] != WJoin::theta) {
        rep.verdict = WordVerdict::indecomposable; // plain and eps-words
        return rep;
    }
    const auto& d = w.decos;
    int n = static_cast<int>(d.size());
    int t_minus1 = d[ai].param;     // the _-parameter at the junction
    int r_plus1 = d[ai + 1].param;  // the ^-parameter at the junction
    if (t_minus1 != 1 && r_plus1 != 1) {
        rep.verdict = WordVerdict::indecomposable; // genuine cross-word
        return rep;
    }
    // degenerate branch: an even correction that may or may not survive
    auto walk = [&](std::vector<int> idx_pattern) {
        // collect parameters along an alternating outward index walk,
        // truncated at the first index that falls off the word
        std::vector<int> vals;
        for (int idx : idx_pattern) {
            if (idx < 0 || idx >= n) break;
            vals.push_back(d[idx].param);
        }
        return vals;
    };
    auto interleave = [&](int first, int second) {
        // alternate between the two arms, each stream moving outward by 2
        std::vector<int> pat;
        int a = first, b = second;
        for (int k = 0; k < n; ++k) {
            pat.push_back(a);
            std::swap(a, b);
            // after swap, 'b' holds the stream just used; move it outward
            b += (b <= ai ? -2 : +2);
        }
        return pat;
    };
    if (t_minus1 == 1) {
        for (int i = 0; i < n; ++i)
            if (i != ai && d[i].side == WSide::sub && d[i].param >= 2) {
                rep.verdict = WordVerdict::decomposable;
                rep.reason = "even correction killed by a _-parameter >= 2";
                return rep;
            }
        if (ai == 0) {
            rep.verdict = WordVerdict::indecomposable;
            return rep;
        }
        // L = (r_{-1}+1, t_1, r_{-2}, t_2, ...),  R = (r_1, t_{-2}, r_2, ...)
        std::vector<int> L = walk(interleave(ai - 1, ai + 2));
        std::vector<int> R = walk(interleave(ai + 1, ai - 2));
        if (!L.empty()) L[0] += 1;
        if (detail::lex_strictly_less(L, R)) {
            rep.verdict = WordVerdict::indecomposable;
        } else {
            rep.verdict = WordVerdict::decomposable;
            rep.reason = "even correction fails the lexicographic test";
        }
        return rep;
    }
    // mirror branch: r_1 == 1
    for (int i = 0; i < n; ++i)
        if (i != ai + 1 && d[i].side == WSide::sup && d[i].param >= 2) {
            rep.verdict = WordVerdict::decomposable;
            rep.reason = "even correction killed by a ^-parameter >= 2";
            return rep;
        }
    if (ai + 2 >= n) {
        rep.verdict = WordVerdict::indecomposable;
        return rep;
    }
    // L = (t_1+1, r_{-1}, t_2, r_{-2}, ...),  R = (t_{-1}, r_2, t_{-2}, ...)
    std::vector<int> L = walk(interleave(ai + 2, ai - 1));
    std::vector<int> R = walk(interleave(ai, ai + 3));
    if (!L.empty()) L[0] += 1;
    if (detail::lex_strictly_less(L, R)) {
        rep.verdict = WordVerdict::indecomposable;
    } else {
        rep.verdict = WordVerdict::decomposable;
        rep.reason = "even correction fails the lexicographic test";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> parse_poly(const std::string& s, size_t base_pos) {
    std::vector<int> coeffs;
    size_t i = 0;
    auto fail = [&](const std::string& why) {
        throw domain_error(errc::parse_error,
                           why + " at position " + std::to_string(base_pos + i));
    };
    auto bump = [&](int k) {
        if (static_cast<int>(coeffs.size()) <= k) coeffs.resize(k + 1, 0);
        coeffs[k] ^= 1;
    };
    if (s.empty()) fail("empty polynomial");
    while (i < s.size()) {
        if (s[i] == '1') {
            bump(0);
            ++i;
        } else if (s[i] == 't') {
            ++i;
            if (i < s.size() && s[i] == '^') {
                ++i;
                size_t j = i;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
                if (j == i) fail("missing exponent");
                bump(std::stoi(s.substr(i, j - i)));
                i = j;
            } else {
                bump(1);
            }
        } else {
            fail("bad polynomial term");
        }
        if (i < s.size()) {
            if (s[i] != '+') fail("expected '+'");
            ++i;
            if (i == s.size()) fail("trailing '+'");
        }
    }
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
    if (coeffs.empty()) throw domain_error(errc::invalid_word, "zero polynomial");
    return coeffs;
}

} // namespace detail

inline XWord parse_word(const std::string& text) {
    XWord w;
    std::string body = text;
    size_t at = text.find('@');
    if (at != std::string::npos) {
        w.cycle = true;
        w.poly = detail::parse_poly(text.substr(at + 1), at + 1);
        body = text.substr(0, at);
    }
    size_t i = 0;
    auto fail = [&](const std::string& why) {
        throw domain_error(errc::parse_error, why + " at position " + std::to_string(i));
    };
    bool lead_star = false, trail_star = false;
    std::vector<WJoin> joins;
    bool pending_star = false; // a star seen after the latest letter
    while (i < body.size()) {
        char c = body[i];
        if (c == '*') {
            if (w.decos.empty()) {
                if (lead_star) fail("duplicate leading star");
                lead_star = true;
            } else if (joins.size() < w.decos.size() && !pending_star) {
                pending_star = true;
            } else {
                fail("duplicate star");
            }
            ++i;
            continue;
        }
        if (body.compare(i, 2, "th") == 0 || body.compare(i, 3, "eps") == 0) {
            bool th = body[i] == 't';
            if (w.decos.empty() || pending_star || joins.size() != w.decos.size() - 1)
                fail("misplaced junction");
            joins.push_back(th ? WJoin::theta : WJoin::eps);
            i += th ? 2 : 3;
            continue;
        }
        if (c == '_' || c == '^') {
            if (!w.decos.empty()) {
                if (pending_star) {
                    joins.push_back(WJoin::star);
                    pending_star = false;
                }
                if (joins.size() != w.decos.size()) fail("missing junction before letter");
            }
            WDeco d;
            d.side = c == '_' ? WSide::sub : WSide::sup;
            ++i;
            if (body.compare(i, 3, "inf") == 0) {
                d.param = winf;
                i += 3;
            } else {
                size_t j = i;
                while (j < body.size() && std::isdigit(static_cast<unsigned char>(body[j]))) ++j;
                if (j == i) fail("missing parameter");
                d.param = std::stoi(body.substr(i, j - i));
                i = j;
            }
            w.decos.push_back(d);
            continue;
        }
        fail("unexpected character");
    }
    if (w.decos.empty()) throw domain_error(errc::parse_error, "empty word");
    if (pending_star) {
        if (w.cycle)
            joins.push_back(WJoin::star); // explicit closing junction
        else
            trail_star = true;
    }
    if (w.cycle && joins.size() == w.decos.size() - 1)
        joins.push_back(WJoin::star); // implied closing junction
    w.joins = std::move(joins);
    // star sides of lone inf letters: an absorbed star faces the junction
    auto& first = w.decos.front();
    auto& last = w.decos.back();
    if (lead_star) {
        if (first.param != winf || w.cycle)
            fail("leading star needs an inf letter");
        first.star = WStar::left;
    } else if (first.param == winf) {
        first.star = WStar::right;
    }
    if (trail_star) {
        if (last.param != winf) fail("trailing star needs an inf letter");
        last.star = WStar::right;
    } else if (last.param == winf && w.decos.size() > 1) {
        last.star = WStar::left;
    } else if (last.param == winf && w.decos.size() == 1 && !lead_star) {
        fail("a lone inf letter needs its star");
    }
    check_word_structure(w);
    return w;
}

// The template orientation is forced for strings, so reversal re-normalizes
// to the same form; cycles are identified with their even shifts.
inline XWord canonical_word(const XWord& w) {
    if (!w.cycle) {
        // a pair of lone letters has no orienting junction; put the _-letter first
        if (w.decos.size() == 2 && w.decos[0].param == winf && w.decos[1].param == winf &&
            w.decos[0].side == WSide::sup) {
            XWord s = w;
            std::swap(s.decos[0], s.decos[1]);
            return s;
        }
        return w;
    }
    XWord best = w;
    bool found = false;
    size_t n = w.decos.size();
    for (size_t shift = 0; shift < n; ++shift) {
        if (w.decos[shift].side != WSide::sup) continue;
        XWord s = w;
        std::rotate(s.decos.begin(), s.decos.begin() + shift, s.decos.end());
        std::rotate(s.joins.begin(), s.joins.begin() + shift, s.joins.end());
        if (!found || s < best) best = s;
        found = true;
    }
    return best;
}

inline XWord reverse_word(const XWord& w) { return canonical_word(w); }

// ---------------------------------------------------------------------------
// realization
// ---------------------------------------------------------------------------

namespace detail {

// Stripe layout of the dimension-7 grid with finite parameters 1..P.
struct WLayout {
    SpecPtr spec;
    int P;
    explicit WLayout(SpecPtr s) : spec(std::move(s)), P((spec->rows() - 2) / 2) {}
    // row stripes: *_1..*_P, *_inf, _inf*, _P*.._1*
    int upper_row(int t) const { return t - 1; }         // "*_t"
    int lower_row(int t) const { return 2 * P + 2 - t; } // "_t*"
    int inf_upper_row() const { return P; }              // "*_inf"
    int z_row() const { return P + 1; }                  // "_inf*"
    // col stripes: ^1*..^P*, ^inf*, *^inf, *^P..*^1
    int left_col(int r) const { return r - 1; }          // "^r*"
    int right_col(int r) const { return 2 * P + 2 - r; } // "*^r"
    int z_col() const { return P; }                      // "^inf*"
    int inf_right_col() const { return P + 1; }          // "*^inf"
};

// Lines allocated for one decoration: stripe index and 0-based first position
// for each of its (at most two) member lines; -1 when the member is absent.
struct WDecoLines {
    int a_stripe = -1, a_pos = -1; // sub: "*_t" member; sup: "^r*" member
    int b_stripe = -1, b_pos = -1; // sub: "_t*" member; sup: "*^r" member
};

} // namespace detail

// Realizes a word or band as a matrix.  String matrices get one entry per
// junction (value 1, or the designated even entry 2 for degenerate th
// junctions, or 2^k for eps); bands get delta = deg(poly) copies of every
// line, identity blocks on all junctions and the companion block of poly on
// the closing junction.
inline Element word_to_element(const XWord& w, SpecPtr spec = nullptr) {
    check_word_structure(w);
    if (!spec) {
        int maxp = 4;
        for (const auto& d : w.decos) maxp = std::max(maxp, d.param);
        spec = maxp == 4 ? builtin_spec("W") : make_w_spec(maxp);
    }
    detail::WLayout lay(spec);
    int anchor_pre = anchor_index(w);
    bool is_eps = anchor_pre >= 0 && w.joins[anchor_pre] == WJoin::eps;
    for (size_t i = 0; i < w.decos.size(); ++i) {
        // eps parameters are 2-adic valuations, not grid coordinates
        if (is_eps && (static_cast<int>(i) == anchor_pre || static_cast<int>(i) == anchor_pre + 1))
            continue;
        if (w.decos[i].param > lay.P)
            throw domain_error(errc::out_of_window,
                               "parameter " + std::to_string(w.decos[i].param) +
                                   " exceeds the grid bound " + std::to_string(lay.P));
    }
    int delta = w.cycle ? static_cast<int>(w.poly.size()) - 1 : 1;
    if (w.cycle && delta < 1)
        throw domain_error(errc::invalid_word, "band polynomial must have degree >= 1");

    std::vector<int> row_sizes(spec->rows(), 0), col_sizes(spec->cols(), 0);
    std::vector<detail::WDecoLines> lines(w.decos.size());
    int anchor = anchor_index(w);
    for (size_t i = 0; i < w.decos.size(); ++i) {
        const WDeco& d = w.decos[i];
        auto take_row = [&](int stripe) {
            int pos = row_sizes[stripe];
            row_sizes[stripe] += delta;
            return pos;
        };
        auto take_col = [&](int stripe) {
            int pos = col_sizes[stripe];
            col_sizes[stripe] += delta;
            return pos;
        };
        detail::WDecoLines& L = lines[i];
        bool eps_adjacent = anchor >= 0 && w.joins[anchor] == WJoin::eps &&
                            (static_cast<int>(i) == anchor || static_cast<int>(i) == anchor + 1);
        if (d.side == WSide::sub) {
            if (eps_adjacent) { // a valuation-k integer row
                L.b_stripe = lay.z_row();
                L.b_pos = take_row(L.b_stripe);
            } else if (d.param == winf) {
                if (d.star == WStar::left) {
                    L.a_stripe = lay.inf_upper_row();
                    L.a_pos = take_row(L.a_stripe);
                } else {
                    L.b_stripe = lay.z_row();
                    L.b_pos = take_row(L.b_stripe);
                }
            } else {
                L.a_stripe = lay.upper_row(d.param);
                L.a_pos = take_row(L.a_stripe);
                L.b_stripe = lay.lower_row(d.param);
                L.b_pos = take_row(L.b_stripe);
            }
        } else {
            if (eps_adjacent) { // a valuation-k integer column
                L.a_stripe = lay.z_col();
                L.a_pos = take_col(L.a_stripe);
            } else if (d.param == winf) {
                if (d.star == WStar::right) {
                    L.a_stripe = lay.z_col();
                    L.a_pos = take_col(L.a_stripe);
                } else {
                    L.b_stripe = lay.inf_right_col();
                    L.b_pos = take_col(L.b_stripe);
                }
            } else {
                L.a_stripe = lay.left_col(d.param);
                L.a_pos = take_col(L.a_stripe);
                L.b_stripe = lay.right_col(d.param);
                L.b_pos = take_col(L.b_stripe);
            }
        }
    }

    std::vector<RawEntry> raw;
    auto place = [&](size_t i, size_t j, bool row_a, bool col_a, i64 value) {
        // block between the chosen member of sub deco i and of sup deco j;
        // a lone letter has a single line, which stands in for whichever
        // member the positional rule asks for
        const detail::WDecoLines& R = lines[i];
        const detail::WDecoLines& C = lines[j];
        if (w.decos[i].param == winf && (row_a ? R.a_stripe : R.b_stripe) < 0) row_a = !row_a;
        if (w.decos[j].param == winf && (col_a ? C.a_stripe : C.b_stripe) < 0) col_a = !col_a;
        int rs = row_a ? R.a_stripe : R.b_stripe;
        int rp = row_a ? R.a_pos : R.b_pos;
        int cs = col_a ? C.a_stripe : C.b_stripe;
        int cp = col_a ? C.a_pos : C.b_pos;
        if (rs < 0 || cs < 0)
            throw domain_error(errc::illegal_adjacency,
                               "junction needs a line this letter does not have");
        const Cell& cell = spec->cell(rs, cs);
        if (cell.is_zero_cell())
            throw domain_error(errc::illegal_adjacency,
                               "junction lands in a zero cell of the grid");
        if (value % 2 == 0 && value != 0 && cell.modulus != 0 && cell.modulus % 4 != 0)
            throw domain_error(errc::illegal_adjacency,
                               "even junction entry needs a mod-4 or integer cell");
        for (int k = 0; k < delta; ++k)
            raw.push_back({rs + 1, cs + 1, rp + k + 1, cp + k + 1, value});
    };
    auto place_block = [&](size_t i, size_t j, bool row_a, bool col_a,
                           const std::vector<std::vector<i64>>& m) {
        const detail::WDecoLines& R = lines[i];
        const detail::WDecoLines& C = lines[j];
        int rs = row_a ? R.a_stripe : R.b_stripe;
        int rp = row_a ? R.a_pos : R.b_pos;
        int cs = col_a ? C.a_stripe : C.b_stripe;
        int cp = col_a ? C.a_pos : C.b_pos;
        const Cell& cell = spec->cell(rs, cs);
        if (cell.is_zero_cell())
            throw domain_error(errc::illegal_adjacency,
                               "junction lands in a zero cell of the grid");
        for (int a = 0; a < delta; ++a)
            for (int b = 0; b < delta; ++b)
                if (m[a][b]) raw.push_back({rs + 1, cs + 1, rp + a + 1, cp + b + 1, m[a][b]});
    };

    size_t n = w.decos.size();
    for (size_t i = 0; i < w.joins.size(); ++i) {
        size_t j = (i + 1) % n;
        const WDeco& L = w.decos[i];
        const WDeco& R = w.decos[j];
        size_t sub_i = L.side == WSide::sub ? i : j;
        size_t sup_i = L.side == WSide::sub ? j : i;
        WJoin jn = w.joins[i];
        if (jn == WJoin::star) {
            bool left_of_anchor = anchor >= 0 && static_cast<int>(i) < anchor;
            // positional rule: after a ^-letter the junction engages (^r*, *_t),
            // after a _-letter it engages (_t*, *^r); roles swap left of th/eps
            bool a_type = (L.side == WSide::sup) != left_of_anchor;
            bool closing = w.cycle && i + 1 == w.joins.size();
            if (closing) {
                // companion block of the band polynomial
                std::vector<std::vector<i64>> m(delta, std::vector<i64>(delta, 0));
                for (int a = 0; a + 1 < delta; ++a) m[a + 1][a] = 1;
                for (int a = 0; a < delta; ++a) m[a][delta - 1] = w.poly[a];
                place_block(sub_i, sup_i, a_type, a_type, m);
            } else {
                place(sub_i, sup_i, a_type, a_type, 1);
            }
        } else if (jn == WJoin::theta) {
            int t = L.param, r = R.param;
            if (t == 1)
                place(sub_i, sup_i, false, false, 2); // ( _1*, *^r )
            else if (r == 1)
                place(sub_i, sup_i, true, true, 2);   // ( *_t, ^1* )
            else
                place(sub_i, sup_i, true, false, 1);  // ( *_t, *^r )
        } else { // eps
            place(sub_i, sup_i, false, true, i64(1) << L.param); // ( _inf*, ^inf* )
        }
    }
    return validate_element(spec, row_sizes, col_sizes, raw);
}

// ---------------------------------------------------------------------------
// admissible-transformation generators (oracle support)
// ---------------------------------------------------------------------------

// Generators of the admissible-transformation group action on elements of a
// grid shape, for exhaustive orbit exploration with orbit_bfs.  The grid's
// transformation calculus is not a tiled order, so ring_generators does not
// apply; this builds the elementary versions of the joint pair operations,
// the chain-directed additions, the doubled corrections between the mod-4
// stripes, and the integer operations on the _inf* / ^inf* lines.
inline std::vector<GenOp> w_generators(const Element& e) {
    const BimoduleSpec& sp = *e.spec;
    detail::WLayout lay(e.spec);
    int P = lay.P;
    int R = e.total_rows(), C = e.total_cols();
    for (int t = 1; t <= P; ++t) {
        if (e.row_sizes[lay.upper_row(t)] != e.row_sizes[lay.lower_row(t)] ||
            e.col_sizes[lay.left_col(t)] != e.col_sizes[lay.right_col(t)])
            throw domain_error(errc::spec_mismatch,
                               "paired stripes must have equal sizes");
    }
    std::vector<GenOp> gens;

    // row line r_tgt += c * row r_src, on every column where both cells live
    auto row_add = [&](GenOp& op, int tgt, int src, i64 c, bool only_mod4) {
        int ts = e.row_stripe(tgt), ss = e.row_stripe(src);
        for (int col = 0; col < C; ++col) {
            int cs = e.col_stripe(col);
            const Cell& to = sp.cell(ts, cs);
            const Cell& from = sp.cell(ss, cs);
            if (to.is_zero_cell() || from.is_zero_cell()) continue;
            if (only_mod4 && to.modulus != 4) continue;
            if (to.modulus != 0 && reduce_mod(c, to.modulus) == 0) continue;
            op.updates.push_back({UpdKind::add_scaled, tgt * C + col, src * C + col, c,
                                  to.modulus, false});
        }
    };
    auto col_add = [&](GenOp& op, int tgt, int src, i64 c, bool only_mod4) {
        int ts = e.col_stripe(tgt), ss = e.col_stripe(src);
        for (int row = 0; row < R; ++row) {
            int rs = e.row_stripe(row);
            const Cell& to = sp.cell(rs, ts);
            const Cell& from = sp.cell(rs, ss);
            if (to.is_zero_cell() || from.is_zero_cell()) continue;
            if (only_mod4 && to.modulus != 4) continue;
            if (to.modulus != 0 && reduce_mod(c, to.modulus) == 0) continue;
            op.updates.push_back({UpdKind::add_scaled, row * C + tgt, row * C + src, c,
                                  to.modulus, false});
        }
    };
    auto push = [&](GenOp&& op) {
        if (!op.updates.empty()) gens.push_back(std::move(op));
    };

    // global line indices per stripe
    auto rows_of = [&](int stripe) {
        std::vector<int> out;
        int base = 0;
        for (int s = 0; s < stripe; ++s) base += e.row_sizes[s];
        for (int k = 0; k < e.row_sizes[stripe]; ++k) out.push_back(base + k);
        return out;
    };
    auto cols_of = [&](int stripe) {
        std::vector<int> out;
        int base = 0;
        for (int s = 0; s < stripe; ++s) base += e.col_sizes[s];
        for (int k = 0; k < e.col_sizes[stripe]; ++k) out.push_back(base + k);
        return out;
    };

    bool z_rows = e.row_sizes[lay.z_row()] > 0;
    bool z_cols = e.col_sizes[lay.z_col()] > 0;
    i64 zc[2] = {1, -1};

    // --- joint operations on the tied pair stripes -------------------------
    for (int t = 1; t <= P; ++t) {
        auto up = rows_of(lay.upper_row(t)), lo = rows_of(lay.lower_row(t));
        for (size_t i = 0; i < up.size(); ++i)
            for (size_t j = 0; j < up.size(); ++j) {
                if (i == j) continue;
                GenOp op;
                row_add(op, up[i], up[j], 1, false);
                row_add(op, lo[i], lo[j], 1, false);
                push(std::move(op));
            }
        for (size_t i = 0; i < up.size(); ++i) { // joint sign flip
            GenOp op;
            for (int col = 0; col < C; ++col)
                for (int line : {up[i], lo[i]}) {
                    const Cell& cell = sp.cell(e.row_stripe(line), e.col_stripe(col));
                    if (cell.is_zero_cell() || cell.modulus == 2) continue;
                    op.updates.push_back({UpdKind::negate, line * C + col, line * C + col, 0,
                                          cell.modulus, false});
                }
            push(std::move(op));
        }
    }
    for (int r = 1; r <= P; ++r) {
        auto le = cols_of(lay.left_col(r)), ri = cols_of(lay.right_col(r));
        for (size_t i = 0; i < le.size(); ++i)
            for (size_t j = 0; j < le.size(); ++j) {
                if (i == j) continue;
                GenOp op;
                col_add(op, le[i], le[j], 1, false);
                col_add(op, ri[i], ri[j], 1, false);
                push(std::move(op));
            }
        for (size_t i = 0; i < le.size(); ++i) {
            GenOp op;
            for (int row = 0; row < R; ++row)
                for (int line : {le[i], ri[i]}) {
                    const Cell& cell = sp.cell(e.row_stripe(row), e.col_stripe(line));
                    if (cell.is_zero_cell() || cell.modulus == 2) continue;
                    op.updates.push_back({UpdKind::negate, row * C + line, row * C + line, 0,
                                          cell.modulus, false});
                }
            push(std::move(op));
        }
    }

    // --- free operations inside the four partnerless stripes ---------------
    for (int stripe : {lay.inf_upper_row(), lay.z_row()}) {
        auto ls = rows_of(stripe);
        bool is_z = stripe == lay.z_row();
        for (size_t i = 0; i < ls.size(); ++i)
            for (size_t j = 0; j < ls.size(); ++j) {
                if (i == j) continue;
                for (i64 c : zc) {
                    if (!is_z && c != 1) continue;
                    GenOp op;
                    row_add(op, ls[i], ls[j], c, false);
                    push(std::move(op));
                }
            }
        for (size_t i = 0; i < ls.size(); ++i) {
            GenOp op;
            for (int col = 0; col < C; ++col) {
                const Cell& cell = sp.cell(e.row_stripe(ls[i]), e.col_stripe(col));
                if (cell.is_zero_cell() || cell.modulus == 2) continue;
                op.updates.push_back({UpdKind::negate, ls[i] * C + col, ls[i] * C + col, 0,
                                      cell.modulus, false});
            }
            push(std::move(op));
        }
    }
    for (int stripe : {lay.z_col(), lay.inf_right_col()}) {
        auto ls = cols_of(stripe);
        bool is_z = stripe == lay.z_col();
        for (size_t i = 0; i < ls.size(); ++i)
            for (size_t j = 0; j < ls.size(); ++j) {
                if (i == j) continue;
                for (i64 c : zc) {
                    if (!is_z && c != 1) continue;
                    GenOp op;
                    col_add(op, ls[i], ls[j], c, false);
                    push(std::move(op));
                }
            }
        for (size_t i = 0; i < ls.size(); ++i) {
            GenOp op;
            for (int row = 0; row < R; ++row) {
                const Cell& cell = sp.cell(e.row_stripe(row), e.col_stripe(ls[i]));
                if (cell.is_zero_cell() || cell.modulus == 2) continue;
                op.updates.push_back({UpdKind::negate, row * C + ls[i], row * C + ls[i], 0,
                                      cell.modulus, false});
            }
            push(std::move(op));
        }
    }

    // --- chain-directed additions ------------------------------------------
    // columns: *^r gains from *^r' (r'>r, including inf) and from any ^s*
    auto star_right_cols = [&](int r) { // r = 1..P, or 0 for *^inf
        return cols_of(r == 0 ? lay.inf_right_col() : lay.right_col(r));
    };
    for (int r = 0; r <= P; ++r) {
        auto tgt = star_right_cols(r);
        if (tgt.empty()) continue;
        for (int rp = 0; rp <= P; ++rp) { // source *^r', chain-smaller: r'>r or r'=inf(0)
            if (rp == r) continue;
            bool smaller = rp == 0 || (r != 0 && rp > r);
            if (!smaller) continue;
            for (int a : star_right_cols(rp))
                for (int b : tgt) {
                    GenOp op;
                    col_add(op, b, a, 1, false);
                    push(std::move(op));
                }
        }
        for (int s = 0; s <= P; ++s) { // source ^s*, any s (0 = the integer stripe)
            for (int a : cols_of(s == 0 ? lay.z_col() : lay.left_col(s)))
                for (int b : tgt) {
                    GenOp op;
                    col_add(op, b, a, 1, false);
                    push(std::move(op));
                }
        }
    }
    // rows: *_t gains from *_t' (t'>t, including inf) and from any _s*
    auto star_left_rows = [&](int t) { // t = 1..P, or 0 for *_inf
        return rows_of(t == 0 ? lay.inf_upper_row() : lay.upper_row(t));
    };
    for (int t = 0; t <= P; ++t) {
        auto tgt = star_left_rows(t);
        if (tgt.empty()) continue;
        for (int tp = 0; tp <= P; ++tp) {
            if (tp == t) continue;
            bool smaller = tp == 0 || (t != 0 && tp > t);
            if (!smaller) continue;
            for (int a : star_left_rows(tp))
                for (int b : tgt) {
                    GenOp op;
                    row_add(op, b, a, 1, false);
                    push(std::move(op));
                }
        }
        for (int s = 0; s <= P; ++s) {
            for (int a : rows_of(s == 0 ? lay.z_row() : lay.lower_row(s)))
                for (int b : tgt) {
                    GenOp op;
                    row_add(op, b, a, 1, false);
                    push(std::move(op));
                }
        }
    }
    // joint doubled additions: ^r* gains from ^r'* while *^r gains 2^(r-r')*^r'
    for (int r = 2; r <= P; ++r)
        for (int rp = 1; rp < r; ++rp) {
            auto tl = cols_of(lay.left_col(r)), sl = cols_of(lay.left_col(rp));
            auto tr = cols_of(lay.right_col(r)), sr = cols_of(lay.right_col(rp));
            for (size_t a = 0; a < sl.size(); ++a)
                for (size_t b = 0; b < tl.size(); ++b) {
                    GenOp op;
                    col_add(op, tl[b], sl[a], 1, false);
                    if (r - rp == 1) col_add(op, tr[b], sr[a], 2, false);
                    push(std::move(op));
                }
        }
    for (int t = 2; t <= P; ++t)
        for (int tp = 1; tp < t; ++tp) {
            auto tl = rows_of(lay.lower_row(t)), sl = rows_of(lay.lower_row(tp));
            auto tu = rows_of(lay.upper_row(t)), su = rows_of(lay.upper_row(tp));
            for (size_t a = 0; a < sl.size(); ++a)
                for (size_t b = 0; b < tl.size(); ++b) {
                    GenOp op;
                    row_add(op, tl[b], sl[a], 1, false);
                    if (t - tp == 1) row_add(op, tu[b], su[a], 2, false);
                    push(std::move(op));
                }
        }

    // --- doubled corrections into the mod-4 stripes -------------------------
    // ^1* gains twice any other column; only its mod-4 cells see the change
    if (P >= 1) {
        auto tl = cols_of(lay.left_col(1));
        for (int b : tl)
            for (int a = 0; a < C; ++a) {
                if (e.col_stripe(a) == lay.left_col(1)) continue;
                GenOp op;
                col_add(op, b, a, 2, true);
                push(std::move(op));
            }
        auto trow = rows_of(lay.lower_row(1));
        for (int b : trow)
            for (int a = 0; a < R; ++a) {
                if (e.row_stripe(a) == lay.lower_row(1)) continue;
                GenOp op;
                row_add(op, b, a, 2, true);
                push(std::move(op));
            }
        // block corrections transported through the tied pair with index 1:
        // (_1*, *^r) gains twice (*_1, ^s*), matched along the pair lines
        auto up1 = rows_of(lay.upper_row(1)), lo1 = rows_of(lay.lower_row(1));
        for (int s = 0; s <= P; ++s)
            for (int a : cols_of(s == 0 ? lay.z_col() : lay.left_col(s)))
                for (int r = 0; r <= P; ++r)
                    for (int b : star_right_cols(r)) {
                        GenOp op;
                        for (size_t k = 0; k < up1.size(); ++k) {
                            const Cell& to =
                                sp.cell(e.row_stripe(lo1[k]), e.col_stripe(b));
                            const Cell& from =
                                sp.cell(e.row_stripe(up1[k]), e.col_stripe(a));
                            if (to.is_zero_cell() || from.is_zero_cell() ||
                                to.modulus != 4)
                                continue;
                            op.updates.push_back({UpdKind::add_scaled, lo1[k] * C + b,
                                                  up1[k] * C + a, 2, to.modulus, false});
                        }
                        push(std::move(op));
                    }
        // (*_t, ^1*) gains twice (_s*, *^1), matched along the pair with index 1
        auto le1 = cols_of(lay.left_col(1)), ri1 = cols_of(lay.right_col(1));
        for (int s = 0; s <= P; ++s)
            for (int a : rows_of(s == 0 ? lay.z_row() : lay.lower_row(s)))
                for (int t = 0; t <= P; ++t)
                    for (int b : star_left_rows(t)) {
                        GenOp op;
                        for (size_t k = 0; k < le1.size(); ++k) {
                            const Cell& to =
                                sp.cell(e.row_stripe(b), e.col_stripe(le1[k]));
                            const Cell& from =
                                sp.cell(e.row_stripe(a), e.col_stripe(ri1[k]));
                            if (to.is_zero_cell() || from.is_zero_cell() ||
                                to.modulus != 4)
                                continue;
                            op.updates.push_back({UpdKind::add_scaled, b * C + le1[k],
                                                  a * C + ri1[k], 2, to.modulus, false});
                        }
                        push(std::move(op));
                    }
    }
    (void)z_rows;
    (void)z_cols;
    return gens;
}

// Direct-sum split test that keeps tied pair lines together: the k-th line of
// the two stripes of a tied pair belongs to one underlying line and must land
// in the same summand.
inline bool w_is_split(const Element& e) {
    detail::WLayout lay(e.spec);
    int P = lay.P;
    int R = e.total_rows(), C = e.total_cols();
    // group id per global line (rows then cols)
    std::vector<int> grp(R + C, -1);
    int ng = 0;
    auto base_row = [&](int stripe) {
        int b = 0;
        for (int s = 0; s < stripe; ++s) b += e.row_sizes[s];
        return b;
    };
    auto base_col = [&](int stripe) {
        int b = 0;
        for (int s = 0; s < stripe; ++s) b += e.col_sizes[s];
        return b;
    };
    for (int t = 1; t <= P; ++t) {
        int bu = base_row(lay.upper_row(t)), bl = base_row(lay.lower_row(t));
        for (int k = 0; k < e.row_sizes[lay.upper_row(t)]; ++k) {
            grp[bu + k] = ng;
            grp[bl + k] = ng;
            ++ng;
        }
        int ble = base_col(lay.left_col(t)), bri = base_col(lay.right_col(t));
        for (int k = 0; k < e.col_sizes[lay.left_col(t)]; ++k) {
            grp[R + ble + k] = ng;
            grp[R + bri + k] = ng;
            ++ng;
        }
    }
    for (int i = 0; i < R + C; ++i)
        if (grp[i] < 0) grp[i] = ng++;
    if (ng <= 1) return false;
    if (ng > 24) throw domain_error(errc::budget_exceeded, "split test too large");
    for (unsigned bits = 1; bits < (1u << (ng - 1)); ++bits) {
        auto in_b = [&](int line) { return grp[line] > 0 && ((bits >> (grp[line] - 1)) & 1u); };
        bool ok = true;
        for (int r = 0; r < R && ok; ++r)
            for (int c = 0; c < C && ok; ++c)
                if (!e.at(r, c).is_zero() && in_b(r) != in_b(R + c)) ok = false;
        if (ok) return true;
    }
    return false;
}

inline bool w_orbit_has_split(OrbitCache& cache, const Element& shape, const State& s) {
    for (const auto& m : cache.members(s)) {
        Element e = unflatten(shape, m);
        if (w_is_split(e)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// decomposition of elements into words and bands
// ---------------------------------------------------------------------------

// Output of reduce_W: the word/band multiset plus the split-off odd-torsion
// summands (odd prime powers q, one per elementary cyclic summand).
struct WDecomposition {
    std::vector<XWord> words;
    std::vector<i64> odd_parts;
};

namespace detail {

// --- small polynomial helpers over the 2-element field ----------------------

inline std::vector<int> poly_mul(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<int> out(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i])
            for (size_t j = 0; j < b.size(); ++j) out[i + j] ^= b[j];
    return poly_trim(out);
}

// diagonalize a square polynomial matrix; the multiset of irreducible-power
// factors of the diagonal equals the elementary divisors
inline std::vector<std::vector<int>> polymat_diagonal(
    std::vector<std::vector<std::vector<int>>> A) {
    size_t n = A.size();
    std::vector<std::vector<int>> diag;
    for (size_t k = 0; k < n; ++k) {
        for (int guard = 0; guard < 4096; ++guard) {
            // smallest-degree nonzero entry in the trailing block to (k,k)
            size_t bi = n, bj = n;
            for (size_t i = k; i < n; ++i)
                for (size_t j = k; j < n; ++j)
                    if (!A[i][j].empty() &&
                        (bi == n || A[i][j].size() < A[bi][bj].size())) {
                        bi = i;
                        bj = j;
                    }
            if (bi == n) break; // trailing block is zero
            std::swap(A[k], A[bi]);
            for (size_t i = k; i < n; ++i) std::swap(A[i][k], A[i][bj]);
            bool clean = true;
            for (size_t i = k + 1; i < n; ++i) {
                if (A[i][k].empty()) continue;
                std::vector<int> q = A[i][k].size() >= A[k][k].size()
                                         ? poly_div_exact(A[i][k], A[k][k])
                                         : std::vector<int>{};
                // subtract q*row k, leaving the division remainder
                std::vector<int> rem = poly_mod(A[i][k], A[k][k]);
                for (size_t j = k; j < n; ++j) {
                    std::vector<int> sub = poly_mul(q, A[k][j]);
                    std::vector<int>& tgt = A[i][j];
                    if (tgt.size() < sub.size()) tgt.resize(sub.size(), 0);
                    for (size_t d = 0; d < sub.size(); ++d) tgt[d] ^= sub[d];
                    tgt = poly_trim(tgt);
                }
                A[i][k] = rem;
                if (!rem.empty()) clean = false;
            }
            for (size_t j = k + 1; j < n; ++j) {
                if (A[k][j].empty()) continue;
                std::vector<int> q = A[k][j].size() >= A[k][k].size()
                                         ? poly_div_exact(A[k][j], A[k][k])
                                         : std::vector<int>{};
                std::vector<int> rem = poly_mod(A[k][j], A[k][k]);
                for (size_t i = k; i < n; ++i) {
                    std::vector<int> sub = poly_mul(q, A[i][k]);
                    std::vector<int>& tgt = A[i][j];
                    if (tgt.size() < sub.size()) tgt.resize(sub.size(), 0);
                    for (size_t d = 0; d < sub.size(); ++d) tgt[d] ^= sub[d];
                    tgt = poly_trim(tgt);
                }
                A[k][j] = rem;
                if (!rem.empty()) clean = false;
            }
            if (clean) break;
        }
        if (!A[k][k].empty()) diag.push_back(A[k][k]);
    }
    return diag;
}

// split a monic polynomial into irreducible-power factors
inline std::vector<std::vector<int>> poly_prime_powers(std::vector<int> f) {
    std::vector<std::vector<int>> out;
    f = poly_trim(f);
    while (f.size() > 1) {
        std::vector<int> p;
        for (int deg = 1; deg < static_cast<int>(f.size()) && p.empty(); ++deg) {
            for (int bits = 0; bits < (1 << deg); ++bits) {
                std::vector<int> c(deg + 1, 0);
                c.back() = 1;
                for (int k = 0; k < deg; ++k) c[k] = (bits >> k) & 1;
                if (poly_mod(f, c).empty()) {
                    p = c;
                    break;
                }
            }
        }
        if (p.empty()) p = f;
        std::vector<int> power{1};
        while (!f.empty() && f.size() > 1 && poly_mod(f, p).empty()) {
            f = poly_trim(poly_div_exact(f, p));
            power = poly_mul(power, p);
        }
        out.push_back(power);
    }
    return out;
}

inline std::vector<i64> odd_prime_powers(i64 b) {
    std::vector<i64> out;
    for (i64 p = 3; p * p <= b; p += 2) {
        if (b % p) continue;
        i64 q = 1;
        while (b % p == 0) {
            b /= p;
            q *= p;
        }
        out.push_back(q);
    }
    if (b > 1) out.push_back(b);
    return out;
}

// --- the reduction engine ---------------------------------------------------

class WReducer {
public:
    explicit WReducer(const Element& e)
        : spec(e.spec), lay(e.spec), P(lay.P) {
        // pad each tied pair so both members have equal size (a line of a
        // tied pair exists together with its partner; elements may omit the
        // empty member)
        row_sizes = e.row_sizes;
        col_sizes = e.col_sizes;
        for (int t = 1; t <= P; ++t) {
            int mr = std::max(row_sizes[lay.upper_row(t)], row_sizes[lay.lower_row(t)]);
            row_sizes[lay.upper_row(t)] = row_sizes[lay.lower_row(t)] = mr;
            int mc = std::max(col_sizes[lay.left_col(t)], col_sizes[lay.right_col(t)]);
            col_sizes[lay.left_col(t)] = col_sizes[lay.right_col(t)] = mc;
        }
        auto bases = [](const std::vector<int>& sizes) {
            std::vector<int> b(sizes.size() + 1, 0);
            for (size_t s = 0; s < sizes.size(); ++s) b[s + 1] = b[s] + sizes[s];
            return b;
        };
        rbase = bases(row_sizes);
        cbase = bases(col_sizes);
        R = rbase.back();
        C = cbase.back();
        rstripe.resize(R);
        cstripe.resize(C);
        for (size_t s = 0; s < row_sizes.size(); ++s)
            for (int k = 0; k < row_sizes[s]; ++k) rstripe[rbase[s] + k] = static_cast<int>(s);
        for (size_t s = 0; s < col_sizes.size(); ++s)
            for (int k = 0; k < col_sizes[s]; ++k) cstripe[cbase[s] + k] = static_cast<int>(s);
        m.assign(R, std::vector<i64>(C, 0));
        for (int r = 0; r < e.total_rows(); ++r)
            for (int c = 0; c < e.total_cols(); ++c) {
                const Residue& v = e.at(r, c);
                if (v.is_zero()) continue;
                int nr = rbase[e.row_stripe(r)] + (r - orig_base(e.row_sizes, e.row_stripe(r)));
                int nc = cbase[e.col_stripe(c)] + (c - orig_base(e.col_sizes, e.col_stripe(c)));
                m[nr][nc] = v.value;
            }
        rdead.assign(R, 0);
        cdead.assign(C, 0);
        // tied-pair and epsilon links between lines; cols are offset by R
        ulink.assign(R + C, -1);
        for (int t = 1; t <= P; ++t)
            for (int k = 0; k < row_sizes[lay.upper_row(t)]; ++k) {
                int a = rbase[lay.upper_row(t)] + k, b = rbase[lay.lower_row(t)] + k;
                ulink[a] = b;
                ulink[b] = a;
            }
        for (int r = 1; r <= P; ++r)
            for (int k = 0; k < col_sizes[lay.left_col(r)]; ++k) {
                int a = R + cbase[lay.left_col(r)] + k, b = R + cbase[lay.right_col(r)] + k;
                ulink[a] = b;
                ulink[b] = a;
            }
    }

    WDecomposition run() {
        integer_stage(true);
        // sweep operations among same-stripe integer lines can disturb the
        // diagonalized block; re-diagonalize until both stages are stable
        for (int it = 0;; ++it) {
            if (it >= 50)
                throw domain_error(errc::search_bound_exceeded,
                                   "integer block failed to stabilize");
            sweep();
            if (z_block_clean()) break;
            integer_stage(false);
        }
        evens_stage();
        WDecomposition out = assemble();
        std::sort(out.words.begin(), out.words.end(), [](const XWord& a, const XWord& b) {
            return word_to_string(a) < word_to_string(b);
        });
        std::sort(out.odd_parts.begin(), out.odd_parts.end());
        return out;
    }

private:
    SpecPtr spec;
    WLayout lay;
    int P, R = 0, C = 0;
    std::vector<int> row_sizes, col_sizes, rbase, cbase, rstripe, cstripe, ulink;
    std::vector<std::vector<i64>> m;
    std::vector<char> rdead, cdead;
    std::vector<i64> markers;
    std::vector<std::pair<int, int>> ties; // epsilon-tied (row line, col line)
    std::set<std::pair<int, int>> theta_marks; // accepted anchor positions
    std::set<std::pair<int, int>> deferred;    // entangled mod-4 corrections

    static int orig_base(const std::vector<int>& sizes, int stripe) {
        int b = 0;
        for (int s = 0; s < stripe; ++s) b += sizes[s];
        return b;
    }

    i64 cmod(int r, int c) const { return spec->cell(rstripe[r], cstripe[c]).modulus; }
    static i64 red(i64 v, i64 mod) { return mod == 0 ? v : ((v % mod) + mod) % mod; }
    int erank(int stripe) const { return 2 * P + 1 - stripe; }
    int frank(int stripe) const { return stripe; }
    bool row_upperfam(int s) const { return s <= P; }     // *_t and *_inf
    bool row_lowerfam(int s) const { return s >= P + 2; } // _t*
    bool col_leftfam(int s) const { return s <= P - 1; }  // ^r*
    bool col_rightfam(int s) const { return s >= P + 1; } // *^r and *^inf
    bool is_odd(int r, int c) const {
        i64 mod = cmod(r, c);
        return mod != 0 && mod != 1 && (m[r][c] & 1);
    }
    bool is_even(int r, int c) const { return cmod(r, c) == 4 && m[r][c] == 2; }

    void line_row_add(int tgt, int src, i64 coef) {
        for (int c = 0; c < C; ++c) {
            i64 mt = cmod(tgt, c);
            if (mt == 1 || cmod(src, c) == 1) continue;
            m[tgt][c] = red(m[tgt][c] + coef * m[src][c], mt);
        }
    }
    void line_col_add(int tgt, int src, i64 coef) {
        for (int r = 0; r < R; ++r) {
            i64 mt = cmod(r, tgt);
            if (mt == 1 || cmod(r, src) == 1) continue;
            m[r][tgt] = red(m[r][tgt] + coef * m[r][src], mt);
        }
    }
    void negate_row(int line) {
        for (int c = 0; c < C; ++c) m[line][c] = red(-m[line][c], cmod(line, c));
    }

    // apply "row tgt += coef * row src" when an admissible transformation
    // realizes it, including the joint and doubled side effects
    bool admissible_row_add(int tgt, int src, i64 coef) {
        if (tgt == src) return false;
        int ts = rstripe[tgt], ss = rstripe[src];
        if (ts == ss) {
            line_row_add(tgt, src, coef);
            if (ts != lay.z_row() && ts != lay.inf_upper_row())
                line_row_add(ulink[tgt], ulink[src], coef);
            return true;
        }
        if (row_upperfam(ts)) {
            if (erank(ss) < erank(ts)) {
                line_row_add(tgt, src, coef);
                return true;
            }
            return false;
        }
        if (row_lowerfam(ts) && row_lowerfam(ss)) {
            int t = 2 * P + 2 - ts, tp = 2 * P + 2 - ss;
            if (tp < t) {
                line_row_add(tgt, src, coef);
                if (t - tp == 1) line_row_add(ulink[tgt], ulink[src], 2 * coef);
                return true;
            }
        }
        return false;
    }
    bool admissible_col_add(int tgt, int src, i64 coef) {
        if (tgt == src) return false;
        int ts = cstripe[tgt], ss = cstripe[src];
        if (ts == ss) {
            line_col_add(tgt, src, coef);
            if (ts != lay.z_col() && ts != lay.inf_right_col())
                line_col_add(ulink[R + tgt] - R, ulink[R + src] - R, coef);
            return true;
        }
        if (col_rightfam(ts)) {
            if (frank(ss) < frank(ts)) {
                line_col_add(tgt, src, coef);
                return true;
            }
            return false;
        }
        if (col_leftfam(ts) && col_leftfam(ss)) {
            int r = ts + 1, rp = ss + 1;
            if (rp < r) {
                line_col_add(tgt, src, coef);
                if (r - rp == 1) line_col_add(ulink[R + tgt] - R, ulink[R + src] - R, 2 * coef);
                return true;
            }
        }
        return false;
    }

    static i64 inv_mod(i64 a, i64 mod) { // a odd, mod a power of 2
        i64 x = 1;
        while (red(a * x, mod) != 1) ++x;
        return x;
    }

    // --- stage 1: the integer block -----------------------------------------
    bool z_block_clean() const {
        for (int k = 0; k < row_sizes[lay.z_row()]; ++k) {
            int zr = rbase[lay.z_row()] + k;
            if (rdead[zr]) continue;
            for (int j = 0; j < col_sizes[lay.z_col()]; ++j) {
                int zc = cbase[lay.z_col()] + j;
                if (cdead[zc] || m[zr][zc] == 0) continue;
                bool tied = false;
                for (auto [tr, tc] : ties)
                    if (tr == zr && tc == zc) tied = true;
                if (!tied) return false;
            }
        }
        return true;
    }

    void integer_stage(bool first) {
        for (auto [zr, zc] : ties) {
            ulink[zr] = -1;
            ulink[R + zc] = -1;
        }
        ties.clear();
        std::vector<int> ZR, ZC;
        for (int k = 0; k < row_sizes[lay.z_row()]; ++k)
            if (!rdead[rbase[lay.z_row()] + k]) ZR.push_back(rbase[lay.z_row()] + k);
        for (int k = 0; k < col_sizes[lay.z_col()]; ++k)
            if (!cdead[cbase[lay.z_col()] + k]) ZC.push_back(cbase[lay.z_col()] + k);
        std::vector<char> rdone(ZR.size(), 0), cdone(ZC.size(), 0);
        std::vector<std::pair<int, int>> diag;
        for (int guard = 0; guard < 10000; ++guard) {
            size_t bi = ZR.size(), bj = ZC.size();
            for (size_t i = 0; i < ZR.size(); ++i) {
                if (rdone[i]) continue;
                for (size_t j = 0; j < ZC.size(); ++j) {
                    if (cdone[j]) continue;
                    i64 v = m[ZR[i]][ZC[j]];
                    if (v != 0 && (bi == ZR.size() ||
                                   std::llabs(v) < std::llabs(m[ZR[bi]][ZC[bj]])))
                        bi = i, bj = j;
                }
            }
            if (bi == ZR.size()) break;
            int zr = ZR[bi], zc = ZC[bj];
            i64 p = m[zr][zc];
            bool clean = true;
            for (size_t i = 0; i < ZR.size(); ++i) {
                if (i == bi || rdone[i]) continue;
                i64 v = m[ZR[i]][zc];
                if (!v) continue;
                i64 q = (2 * v + (v > 0 == p > 0 ? p : -p)) / (2 * p);
                if (q) line_row_add(ZR[i], zr, -q);
                if (m[ZR[i]][zc]) clean = false;
            }
            for (size_t j = 0; j < ZC.size(); ++j) {
                if (j == bj || cdone[j]) continue;
                i64 v = m[zr][ZC[j]];
                if (!v) continue;
                i64 q = (2 * v + (v > 0 == p > 0 ? p : -p)) / (2 * p);
                if (q) line_col_add(ZC[j], zc, -q);
                if (m[zr][ZC[j]]) clean = false;
            }
            if (clean) {
                rdone[bi] = cdone[bj] = 1;
                diag.push_back({zr, zc});
            }
        }
        for (auto [zr, zc] : diag) {
            if (m[zr][zc] < 0) negate_row(zr);
            i64 a = m[zr][zc];
            int v = 0;
            while (a % 2 == 0) {
                a /= 2;
                ++v;
            }
            if (a > 1) {
                if (!first)
                    throw domain_error(errc::not_tabulated,
                                       "integer block gained an odd factor");
                for (i64 q : odd_prime_powers(a)) markers.push_back(q);
            }
            if (v == 0 && !first)
                throw domain_error(errc::not_tabulated, "integer block gained a unit");
            if (v == 0) {
                // a unit tie: the pair of lines is a zero object once cleared
                for (int r = 0; r < R; ++r) {
                    if (r == zr || rdead[r]) continue;
                    i64 mod = cmod(r, zc);
                    if (mod == 1 || mod == 0 || m[r][zc] == 0) continue;
                    i64 k = red((mod - m[r][zc]) * inv_mod(red(m[zr][zc], mod), mod), mod);
                    if (k && !admissible_row_add(r, zr, k))
                        throw domain_error(errc::not_tabulated, "cannot clear a unit tie");
                }
                for (int c = 0; c < C; ++c) {
                    if (c == zc || cdead[c]) continue;
                    i64 mod = cmod(zr, c);
                    if (mod == 1 || mod == 0 || m[zr][c] == 0) continue;
                    i64 k = red((mod - m[zr][c]) * inv_mod(red(m[zr][zc], mod), mod), mod);
                    if (k && !admissible_col_add(c, zc, k))
                        throw domain_error(errc::not_tabulated, "cannot clear a unit tie");
                }
                m[zr][zc] = 0;
                rdead[zr] = 1;
                cdead[zc] = 1;
            } else {
                m[zr][zc] = i64(1) << v; // odd part split off above
                ties.push_back({zr, zc});
                ulink[zr] = R + zc;
                ulink[R + zc] = zr;
            }
        }
    }

    // --- stage 2: chain-directed sparsification of the 2-part ---------------
    int total_odds() const {
        int n = 0;
        for (int r = 0; r < R; ++r) {
            if (rdead[r]) continue;
            for (int c = 0; c < C; ++c)
                if (!cdead[c] && is_odd(r, c)) ++n;
        }
        return n;
    }

    bool guarded_row_add(int tgt, int src, i64 coef) {
        bool joint = rstripe[tgt] == rstripe[src] && rstripe[tgt] != lay.z_row() &&
                     rstripe[tgt] != lay.inf_upper_row();
        if (!joint) return admissible_row_add(tgt, src, coef);
        int before = total_odds();
        admissible_row_add(tgt, src, coef);
        if (total_odds() > before) {
            admissible_row_add(tgt, src, -coef);
            return false;
        }
        return true;
    }
    bool guarded_col_add(int tgt, int src, i64 coef) {
        bool joint = cstripe[tgt] == cstripe[src] && cstripe[tgt] != lay.z_col() &&
                     cstripe[tgt] != lay.inf_right_col();
        if (!joint) return admissible_col_add(tgt, src, coef);
        int before = total_odds();
        admissible_col_add(tgt, src, coef);
        if (total_odds() > before) {
            admissible_col_add(tgt, src, -coef);
            return false;
        }
        return true;
    }

    void sweep() {
        int cap = 200 + 8 * (R + C) * (R + C);
        for (int step = 0; step < cap; ++step) {
            std::vector<int> rcount(R, 0), ccount(C, 0);
            std::vector<std::pair<int, int>> odds;
            for (int r = 0; r < R; ++r) {
                if (rdead[r]) continue;
                for (int c = 0; c < C; ++c)
                    if (!cdead[c] && is_odd(r, c)) {
                        odds.push_back({r, c});
                        ++rcount[r];
                        ++ccount[c];
                    }
            }
            bool conflict = false;
            for (auto [r, c] : odds)
                if (rcount[r] > 1 || ccount[c] > 1) conflict = true;
            if (!conflict) return;
            std::sort(odds.begin(), odds.end(), [&](const auto& a, const auto& b) {
                auto ka = std::tuple(frank(cstripe[a.second]), a.second,
                                     erank(rstripe[a.first]), a.first);
                auto kb = std::tuple(frank(cstripe[b.second]), b.second,
                                     erank(rstripe[b.first]), b.first);
                return ka < kb;
            });
            bool did = false;
            for (auto [r0, c0] : odds) {
                if (!is_odd(r0, c0)) continue;
                for (int r = 0; r < R && !did; ++r) {
                    if (r == r0 || rdead[r] || !is_odd(r, c0)) continue;
                    i64 mod = cmod(r, c0);
                    i64 k = red((mod - m[r][c0]) * inv_mod(red(m[r0][c0], mod), mod), mod);
                    if (k && guarded_row_add(r, r0, k)) did = true;
                }
                for (int c = 0; c < C && !did; ++c) {
                    if (c == c0 || cdead[c] || !is_odd(r0, c)) continue;
                    i64 mod = cmod(r0, c);
                    i64 k = red((mod - m[r0][c]) * inv_mod(red(m[r0][c0], mod), mod), mod);
                    if (k && guarded_col_add(c, c0, k)) did = true;
                }
                if (did) break;
            }
            if (!did) return; // leftover conflicts go to the cycle analysis
        }
    }

    // --- stage 3: even corrections in the mod-4 stripes ---------------------
    bool line_has_odd_row(int r) const {
        for (int c = 0; c < C; ++c)
            if (!cdead[c] && is_odd(r, c)) return true;
        return false;
    }
    bool line_has_odd_col(int c) const {
        for (int r = 0; r < R; ++r)
            if (!rdead[r] && is_odd(r, c)) return true;
        return false;
    }

    // outward walk along dashes starting on the given line (rows: id < R,
    // cols: id >= R); collects the decorations of the crossed letters
    struct Arm {
        std::vector<WDeco> decos;
        bool loop = false;     // returned to a visited letter
        bool conflict = false; // ran into a line with several dashes
        bool exotic = false;   // contains a letter with no finite printable form
    };
    static constexpr int big_param = 1 << 20; // stand-in for an inf parameter

    WDeco line_deco(int id) const {
        if (id < R) {
            int s = rstripe[id];
            if (s == lay.inf_upper_row()) return {WSide::sub, winf, WStar::left};
            if (s == lay.z_row()) return {WSide::sub, winf, WStar::right};
            return {WSide::sub, s <= P - 1 ? s + 1 : 2 * P + 2 - s, WStar::pair};
        }
        int s = cstripe[id - R];
        if (s == lay.inf_right_col()) return {WSide::sup, winf, WStar::left};
        if (s == lay.z_col()) return {WSide::sup, winf, WStar::right};
        return {WSide::sup, s <= P - 1 ? s + 1 : 2 * P + 2 - s, WStar::pair};
    }

    Arm walk_arm(int start, std::set<int>& visited) const {
        Arm arm;
        int cur = start;
        while (cur >= 0) {
            // the single dash on the current line
            int cross = -1;
            if (cur < R) {
                for (int c = 0; c < C; ++c)
                    if (!cdead[c] && is_odd(cur, c)) {
                        if (cross >= 0) {
                            arm.conflict = true;
                            return arm;
                        }
                        cross = R + c;
                    }
            } else {
                for (int r = 0; r < R; ++r)
                    if (!rdead[r] && is_odd(r, cur - R)) {
                        if (cross >= 0) {
                            arm.conflict = true;
                            return arm;
                        }
                        cross = r;
                    }
            }
            if (cross < 0) return arm;
            if (visited.count(cross) || (ulink[cross] >= 0 && visited.count(ulink[cross]))) {
                arm.loop = true;
                return arm;
            }
            visited.insert(cross);
            WDeco d = line_deco(cross);
            if (d.param == winf) {
                d.param = big_param;
                d.star = WStar::pair;
                arm.exotic = true;
            }
            // an epsilon tie continues the word through its partner column
            bool eps_link = ulink[cross] >= 0 &&
                            ((cross < R) != (ulink[cross] < R));
            if (eps_link) {
                arm.exotic = true;
                d.param = big_param;
            }
            arm.decos.push_back(d);
            if (eps_link) {
                WDeco d2 = line_deco(ulink[cross]);
                d2.param = big_param;
                d2.star = WStar::pair;
                arm.decos.push_back(d2);
            }
            cur = ulink[cross] >= 0 ? ulink[cross] : -1;
            if (cur >= 0) visited.insert(cur);
        }
        return arm;
    }

    void evens_stage() {
        for (int guard = 0; guard < 2000; ++guard) {
            bool changed = false;
            deferred.clear();
            std::vector<std::pair<int, int>> evens;
            for (int r = 0; r < R; ++r) {
                if (rdead[r]) continue;
                for (int c = 0; c < C; ++c)
                    if (!cdead[c] && is_even(r, c) && !theta_marks.count({r, c}))
                        evens.push_back({r, c});
            }
            // duplicate corrections on one line: keep the chain-minimal one
            for (auto [r, c] : evens) {
                if (!is_even(r, c)) continue;
                bool t_branch = rstripe[r] == lay.lower_row(1);
                if (t_branch) {
                    for (int c2 = 0; c2 < C; ++c2) {
                        if (c2 == c || cdead[c2] || !is_even(r, c2)) continue;
                        int tgt = frank(cstripe[c2]) > frank(cstripe[c]) ? c2 : c;
                        int src = tgt == c2 ? c : c2;
                        if (admissible_col_add(tgt, src, 1)) changed = true;
                    }
                    for (int r2 = 0; r2 < R; ++r2) {
                        if (r2 == r || rdead[r2] || !is_even(r2, c)) continue;
                        if (admissible_row_add(std::max(r, r2), std::min(r, r2), 1))
                            changed = true;
                    }
                } else {
                    for (int r2 = 0; r2 < R; ++r2) {
                        if (r2 == r || rdead[r2] || !is_even(r2, c)) continue;
                        int tgt = erank(rstripe[r2]) > erank(rstripe[r]) ? r2 : r;
                        int src = tgt == r2 ? r : r2;
                        if (admissible_row_add(tgt, src, 1)) changed = true;
                    }
                    for (int c2 = 0; c2 < C; ++c2) {
                        if (c2 == c || cdead[c2] || !is_even(r, c2)) continue;
                        if (admissible_col_add(std::max(c, c2), std::min(c, c2), 1))
                            changed = true;
                    }
                }
            }
            if (changed) continue;
            for (auto [r, c] : evens) {
                if (!is_even(r, c) || theta_marks.count({r, c})) continue;
                bool t_branch = rstripe[r] == lay.lower_row(1);
                // a dash in the correction's own cross line kills it via a
                // doubled addition into the index-1 stripe
                if (t_branch) {
                    int rp = -1;
                    for (int r2 = 0; r2 < R && rp < 0; ++r2)
                        if (r2 != r && !rdead[r2] && is_odd(r2, c)) rp = r2;
                    if (rp >= 0) {
                        if (rstripe[rp] == rstripe[r])
                            admissible_row_add(r, rp, 2);
                        else
                            line_row_add(r, rp, 2);
                        changed = true;
                        continue;
                    }
                } else {
                    int cp = -1;
                    for (int c2 = 0; c2 < C && cp < 0; ++c2)
                        if (c2 != c && !cdead[c2] && is_odd(r, c2)) cp = c2;
                    if (cp >= 0) {
                        if (cstripe[cp] == cstripe[c])
                            admissible_col_add(c, cp, 2);
                        else
                            line_col_add(c, cp, 2);
                        changed = true;
                        continue;
                    }
                }
                // a dash on the free member of the anchor pair kills it via
                // the doubled block correction through the tied pair
                if (t_branch) {
                    int up = ulink[r]; // the *_1 partner line
                    int a = -1;
                    for (int c2 = 0; c2 < C && a < 0; ++c2)
                        if (!cdead[c2] && is_odd(up, c2)) a = c2;
                    if (a >= 0) {
                        // all pair indices move together
                        for (int k = 0; k < row_sizes[lay.lower_row(1)]; ++k) {
                            int lo = rbase[lay.lower_row(1)] + k;
                            int hi = rbase[lay.upper_row(1)] + k;
                            if (rdead[lo] || rdead[hi]) continue;
                            if (cmod(lo, c) == 4 && cmod(hi, a) != 1)
                                m[lo][c] = red(m[lo][c] + 2 * m[hi][a], 4);
                        }
                        changed = true;
                        continue;
                    }
                } else {
                    int ri = ulink[R + c] - R; // the *^1 partner line
                    int a = -1;
                    for (int r2 = 0; r2 < R && a < 0; ++r2)
                        if (!rdead[r2] && is_odd(r2, ri)) a = r2;
                    if (a >= 0) {
                        for (int k = 0; k < col_sizes[lay.left_col(1)]; ++k) {
                            int le = cbase[lay.left_col(1)] + k;
                            int rg = cbase[lay.right_col(1)] + k;
                            if (cdead[le] || cdead[rg]) continue;
                            if (cmod(r, le) == 4 && cmod(a, rg) != 1)
                                m[r][le] = red(m[r][le] + 2 * m[a][rg], 4);
                        }
                        changed = true;
                        continue;
                    }
                }
                // build the candidate cross-word and apply the verdict rule
                std::set<int> visited{r, c + R};
                int rp = ulink[r], cp = ulink[R + c];
                if (rp >= 0) visited.insert(rp);
                if (cp >= 0) visited.insert(cp);
                Arm left, right;
                if (t_branch) {
                    left = walk_arm(r, visited);
                    right = cp >= 0 ? walk_arm(cp, visited) : Arm{};
                } else {
                    left = rp >= 0 ? walk_arm(rp, visited) : Arm{};
                    right = walk_arm(R + c, visited);
                }
                if (left.conflict || right.conflict) {
                    deferred.insert({r, c}); // entangled; settle later
                    continue;
                }
                if (left.loop || right.loop) {
                    m[r][c] = 0; // loop-closing corrections vanish
                    changed = true;
                    continue;
                }
                XWord cand;
                for (auto it = left.decos.rbegin(); it != left.decos.rend(); ++it)
                    cand.decos.push_back({it->side, it->param, WStar::pair});
                size_t ai = cand.decos.size();
                WDeco sub_d = t_branch ? WDeco{WSide::sub, 1, WStar::pair}
                                       : line_deco(r);
                WDeco sup_d = t_branch ? line_deco(R + c)
                                       : WDeco{WSide::sup, 1, WStar::pair};
                bool exotic = left.exotic || right.exotic;
                if (sub_d.param == winf) {
                    sub_d = {WSide::sub, big_param, WStar::pair};
                    exotic = true;
                }
                if (sup_d.param == winf) {
                    sup_d = {WSide::sup, big_param, WStar::pair};
                    exotic = true;
                }
                sub_d.star = sup_d.star = WStar::pair;
                cand.decos.push_back(sub_d);
                cand.decos.push_back(sup_d);
                for (const auto& d : right.decos)
                    cand.decos.push_back({d.side, d.param, WStar::pair});
                cand.joins.assign(cand.decos.size() - 1, WJoin::star);
                cand.joins[ai] = WJoin::theta;
                WordReport rep = validate_word(cand);
                if (rep.verdict == WordVerdict::decomposable ||
                    rep.verdict == WordVerdict::invalid) {
                    m[r][c] = 0;
                    changed = true;
                } else if (exotic) {
                    throw domain_error(errc::not_tabulated,
                                       "surviving even correction touches an integer line");
                } else {
                    theta_marks.insert({r, c});
                }
            }
            if (!changed) return;
        }
        throw domain_error(errc::search_bound_exceeded, "even-correction normalization");
    }

    // --- stage 4: assembly ---------------------------------------------------
    struct Edge {
        int rl, cl;  // row line, col line (col as raw index)
        bool theta;
    };

    int node_of(int line) const {
        int p = ulink[line];
        return p >= 0 ? std::min(line, p) : line;
    }

    WDecomposition assemble() {
        std::vector<Edge> edges;
        for (int r = 0; r < R; ++r) {
            if (rdead[r]) continue;
            for (int c = 0; c < C; ++c) {
                if (cdead[c]) continue;
                i64 mod = cmod(r, c);
                if (mod == 0 || mod == 1 || m[r][c] == 0) continue;
                if (m[r][c] & 1) {
                    bool mixed = row_upperfam(rstripe[r]) && col_rightfam(cstripe[c]) &&
                                 rstripe[r] != lay.inf_upper_row() &&
                                 cstripe[c] != lay.inf_right_col();
                    edges.push_back({r, c, mixed});
                } else if (theta_marks.count({r, c})) {
                    edges.push_back({r, c, true});
                } else if (deferred.count({r, c})) {
                    throw domain_error(errc::not_tabulated,
                                       "mod-4 correction entangled with other summands");
                } else {
                    throw domain_error(errc::not_tabulated, "stray even entry after reduction");
                }
            }
        }
        // nodes and adjacency
        std::map<int, std::vector<int>> adj; // node -> edge indices
        std::set<int> nodes;
        for (int r = 0; r < R; ++r)
            if (!rdead[r]) nodes.insert(node_of(r));
        for (int c = 0; c < C; ++c)
            if (!cdead[c]) nodes.insert(node_of(R + c));
        for (int n : nodes) adj[n];
        for (size_t i = 0; i < edges.size(); ++i) {
            adj[node_of(edges[i].rl)].push_back(static_cast<int>(i));
            adj[node_of(R + edges[i].cl)].push_back(static_cast<int>(i));
        }
        WDecomposition out;
        out.odd_parts = markers;
        std::set<int> seen;
        for (int start : nodes) {
            if (seen.count(start)) continue;
            // collect the component
            std::vector<int> comp{start};
            seen.insert(start);
            std::vector<int> comp_edges;
            std::set<int> edge_seen;
            for (size_t q = 0; q < comp.size(); ++q)
                for (int ei : adj[comp[q]]) {
                    if (!edge_seen.insert(ei).second) continue;
                    comp_edges.push_back(ei);
                    for (int n2 : {node_of(edges[ei].rl), node_of(R + edges[ei].cl)})
                        if (seen.insert(n2).second) comp.push_back(n2);
                }
            if (comp_edges.empty()) {
                emit_singleton(out, comp.front());
                continue;
            }
            bool cyclic = comp_edges.size() >= comp.size();
            bool line_conflict = false;
            for (int n : comp)
                for (int line : {n, ulink[n]}) {
                    if (line < 0) continue;
                    int odd = 0;
                    if (line < R) {
                        for (int c = 0; c < C; ++c)
                            if (!cdead[c] && is_odd(line, c)) ++odd;
                    } else {
                        for (int r = 0; r < R; ++r)
                            if (!rdead[r] && is_odd(r, line - R)) ++odd;
                    }
                    if (odd > 1) line_conflict = true;
                }
            if (cyclic || line_conflict)
                emit_cyclic(out, comp, comp_edges, edges);
            else
                emit_path(out, comp, comp_edges, edges, adj);
        }
        return out;
    }

    bool is_eps_node(int n) const {
        return ulink[n] >= 0 && (n < R) != (ulink[n] < R);
    }

    void emit_singleton(WDecomposition& out, int n) {
        XWord w;
        if (is_eps_node(n)) {
            int zr = n < R ? n : ulink[n];
            int zc = (n < R ? ulink[n] : n) - R;
            i64 tie = m[zr][zc];
            int v = 0;
            while (tie > 1) {
                tie /= 2;
                ++v;
            }
            w.decos = {{WSide::sub, v, WStar::pair}, {WSide::sup, v, WStar::pair}};
            w.joins = {WJoin::eps};
        } else {
            w.decos = {line_deco(n)};
        }
        out.words.push_back(w);
    }

    // expected junction cells under the positional template rule
    static std::vector<std::pair<int, int>> expected_cells(const XWord& w, const WLayout& lay) {
        std::vector<std::pair<int, int>> cells;
        int anchor = anchor_index(w);
        bool eps = anchor >= 0 && w.joins[anchor] == WJoin::eps;
        // letters of an eps tie live on the integer lines; their parameter is
        // a 2-adic valuation, not a grid coordinate
        auto eps_adj = [&](const WDeco& d) {
            return eps && ((d.side == WSide::sub && &d == &w.decos[anchor]) ||
                           (d.side == WSide::sup && &d == &w.decos[anchor + 1]));
        };
        auto row_line = [&](const WDeco& d, bool a_type) {
            if (eps_adj(d)) return lay.z_row();
            if (d.param == winf) // lone letters have a single line
                return d.star == WStar::left ? lay.inf_upper_row() : lay.z_row();
            return a_type ? lay.upper_row(d.param) : lay.lower_row(d.param);
        };
        auto col_line = [&](const WDeco& d, bool a_type) {
            if (eps_adj(d)) return lay.z_col();
            if (d.param == winf)
                return d.star == WStar::right ? lay.z_col() : lay.inf_right_col();
            return a_type ? lay.left_col(d.param) : lay.right_col(d.param);
        };
        size_t n = w.decos.size();
        for (size_t i = 0; i < w.joins.size(); ++i) {
            size_t j = (i + 1) % n;
            const WDeco& L = w.decos[i];
            const WDeco& Rr = w.decos[j];
            const WDeco& sub = L.side == WSide::sub ? L : Rr;
            const WDeco& sup = L.side == WSide::sub ? Rr : L;
            if (w.joins[i] == WJoin::star) {
                bool left_of = anchor >= 0 && static_cast<int>(i) < anchor;
                bool a_type = (L.side == WSide::sup) != left_of;
                cells.push_back({row_line(sub, a_type), col_line(sup, a_type)});
            } else if (w.joins[i] == WJoin::theta) {
                if (sub.param == 1)
                    cells.push_back({lay.lower_row(1), lay.right_col(sup.param)});
                else if (sup.param == 1)
                    cells.push_back({lay.upper_row(sub.param), lay.left_col(1)});
                else
                    cells.push_back({lay.upper_row(sub.param), lay.right_col(sup.param)});
            } else {
                cells.push_back({lay.z_row(), lay.z_col()});
            }
        }
        return cells;
    }

    void emit_path(WDecomposition& out, const std::vector<int>& comp,
                   const std::vector<int>& comp_edges, const std::vector<Edge>& edges,
                   std::map<int, std::vector<int>>& adj) {
        // find the path order of nodes and edges
        int end = -1;
        for (int n : comp)
            if (adj[n].size() <= 1) {
                if (end < 0 || n < end) end = n;
            }
        if (end < 0) throw domain_error(errc::not_tabulated, "tangled string component");
        for (int n : comp)
            if (adj[n].size() > 2)
                throw domain_error(errc::not_tabulated, "branching string component");
        std::vector<int> node_seq{end};
        std::vector<int> edge_seq;
        std::set<int> used;
        int cur = end;
        while (true) {
            int next_edge = -1;
            for (int ei : adj[cur])
                if (!used.count(ei)) next_edge = ei;
            if (next_edge < 0) break;
            used.insert(next_edge);
            edge_seq.push_back(next_edge);
            int a = node_of(edges[next_edge].rl), b = node_of(R + edges[next_edge].cl);
            cur = a == cur ? b : a;
            node_seq.push_back(cur);
        }
        if (edge_seq.size() != comp_edges.size())
            throw domain_error(errc::not_tabulated, "tangled string component");
        for (int attempt = 0; attempt < 2; ++attempt) {
            XWord w;
            std::vector<std::pair<int, int>> actual;
            std::vector<int> pending; // edge between previous and current node
            for (size_t q = 0; q < node_seq.size(); ++q) {
                int n = node_seq[q];
                if (q > 0) {
                    const Edge& e = edges[edge_seq[q - 1]];
                    w.joins.push_back(e.theta ? WJoin::theta : WJoin::star);
                    actual.push_back({rstripe[e.rl], cstripe[e.cl]});
                }
                if (is_eps_node(n)) {
                    int zr = n < R ? n : ulink[n];
                    int zc = (n < R ? ulink[n] : n) - R;
                    i64 tie = m[zr][zc];
                    int v = 0;
                    while (tie > 1) {
                        tie /= 2;
                        ++v;
                    }
                    w.decos.push_back({WSide::sub, v, WStar::pair});
                    w.joins.push_back(WJoin::eps);
                    actual.push_back({lay.z_row(), lay.z_col()});
                    w.decos.push_back({WSide::sup, v, WStar::pair});
                } else {
                    w.decos.push_back(line_deco(n));
                }
            }
            bool ok = true;
            try {
                check_word_structure(w);
            } catch (const domain_error&) {
                ok = false;
            }
            if (ok) {
                auto exp = expected_cells(w, lay);
                if (exp.size() != actual.size()) ok = false;
                for (size_t i = 0; ok && i < exp.size(); ++i)
                    if (exp[i] != actual[i]) ok = false;
            }
            if (ok) {
                out.words.push_back(w);
                return;
            }
            std::reverse(node_seq.begin(), node_seq.end());
            std::reverse(edge_seq.begin(), edge_seq.end());
        }
        throw domain_error(errc::not_tabulated, "string component violates the template");
    }

    void emit_cyclic(WDecomposition& out, const std::vector<int>& comp,
                     const std::vector<int>& comp_edges, const std::vector<Edge>& edges) {
        // every node must be a finite tied pair touching exactly two cells
        std::map<int, std::set<std::pair<int, int>>> node_cells;
        for (int ei : comp_edges) {
            const Edge& e = edges[ei];
            if (e.theta)
                throw domain_error(errc::not_tabulated, "cross junction on a cyclic component");
            std::pair<int, int> cell{rstripe[e.rl], cstripe[e.cl]};
            node_cells[node_of(e.rl)].insert(cell);
            node_cells[node_of(R + e.cl)].insert(cell);
        }
        for (int n : comp) {
            if (is_eps_node(n) || ulink[n] < 0)
                throw domain_error(errc::not_tabulated, "integer line on a cyclic component");
            if (node_cells[n].size() != 2)
                throw domain_error(errc::not_tabulated, "cyclic component is not a single cycle");
        }
        // bridges: groups of nodes sharing both line stripes and the cell pair
        // (the stripes separate the _- and ^-bridges when the cells coincide)
        using BKey = std::pair<std::pair<int, int>, std::set<std::pair<int, int>>>;
        auto node_key = [&](int n) {
            int a = std::min(n, ulink[n]), b = std::max(n, ulink[n]);
            auto stripe_of = [&](int l) { return l < R ? rstripe[l] : 1000 + cstripe[l - R]; };
            return BKey{{stripe_of(a), stripe_of(b)}, node_cells[n]};
        };
        std::map<BKey, std::vector<int>> bridges;
        for (int n : comp) bridges[node_key(n)].push_back(n);
        std::map<std::pair<int, int>, std::vector<const BKey*>> cell_bridges;
        for (const auto& [key, group] : bridges)
            for (const auto& cell : key.second) cell_bridges[cell].push_back(&key);
        for (const auto& [cell, bs] : cell_bridges)
            if (bs.size() != 2)
                throw domain_error(errc::not_tabulated, "cyclic component is not a single cycle");
        size_t msize = bridges.begin()->second.size();
        for (const auto& [key, group] : bridges)
            if (group.size() != msize)
                throw domain_error(errc::not_tabulated, "unbalanced cyclic component");
        // walk the cell cycle: bridge, cell, bridge, cell, ...
        std::vector<const std::vector<int>*> bridge_seq;
        std::vector<std::pair<int, int>> cell_seq; // cell_seq[i] follows bridge i
        const BKey* cur_key = &bridges.begin()->first;
        std::pair<int, int> cur_cell = *cur_key->second.begin();
        size_t L = bridges.size();
        for (size_t i = 0; i < L; ++i) {
            bridge_seq.push_back(&bridges[*cur_key]);
            cell_seq.push_back(cur_cell);
            const auto& bs = cell_bridges[cur_cell];
            const BKey* next_key = bs[0] == cur_key ? bs[1] : bs[0];
            std::pair<int, int> next_cell = *next_key->second.begin() == cur_cell
                                                ? *std::next(next_key->second.begin())
                                                : *next_key->second.begin();
            cur_key = next_key;
            cur_cell = next_cell;
        }
        if (cur_key != &bridges.begin()->first)
            throw domain_error(errc::not_tabulated, "cyclic component is not a single cycle");
        if (bridge_seq.size() != L || cell_seq.size() != L)
            throw domain_error(errc::not_tabulated, "cyclic component is not a single cycle");
        // orient so each a-cell follows the ^-letter of its junction; the
        // cell BETWEEN deco i-1 and deco i is cell_seq[i-1] read one way and
        // cell_seq[i] read the other
        auto deco_of_node = [&](int n) { return line_deco(n); };
        std::vector<WDeco> decos;
        for (const auto* g : bridge_seq) decos.push_back(deco_of_node(g->front()));
        auto cell_is_aa = [&](const std::pair<int, int>& cell) {
            return row_upperfam(cell.first) && col_leftfam(cell.second);
        };
        // direction check: with decos[i] preceding cell_seq[i] (closing wraps),
        // an aa-cell must be preceded by a sup letter
        auto consistent = [&](const std::vector<WDeco>& ds,
                              const std::vector<std::pair<int, int>>& cs) {
            for (size_t i = 0; i < ds.size(); ++i) {
                bool aa = cell_is_aa(cs[i]);
                bool mixed = !aa && !(row_lowerfam(cs[i].first) && col_rightfam(cs[i].second));
                if (mixed) return false;
                if ((ds[i].side == WSide::sup) != aa) return false;
            }
            return true;
        };
        std::vector<std::pair<int, int>> cells_fwd = cell_seq;
        if (!consistent(decos, cells_fwd)) {
            // reverse: deco order flips, and the cell before deco i becomes
            // the cell after it
            std::reverse(decos.begin(), decos.end());
            std::reverse(bridge_seq.begin(), bridge_seq.end());
            std::reverse(cells_fwd.begin(), cells_fwd.end());
            std::rotate(cells_fwd.begin(), cells_fwd.begin() + 1, cells_fwd.end());
            if (!consistent(decos, cells_fwd))
                throw domain_error(errc::not_tabulated, "cycle violates the template");
        }
        // transfer matrices around the cycle; product = the monodromy
        size_t mm = msize;
        std::vector<std::vector<int>> M(mm, std::vector<int>(mm, 0));
        for (size_t i = 0; i < mm; ++i) M[i][i] = 1;
        auto mat_mul = [&](const std::vector<std::vector<int>>& A,
                           const std::vector<std::vector<int>>& B) {
            std::vector<std::vector<int>> out2(mm, std::vector<int>(mm, 0));
            for (size_t i = 0; i < mm; ++i)
                for (size_t k = 0; k < mm; ++k)
                    if (A[i][k])
                        for (size_t j = 0; j < mm; ++j) out2[i][j] ^= B[k][j];
            return out2;
        };
        // invert a square matrix over the 2-element field
        auto mat_inv = [&](std::vector<std::vector<int>> A) {
            std::vector<std::vector<int>> inv(mm, std::vector<int>(mm, 0));
            for (size_t i = 0; i < mm; ++i) inv[i][i] = 1;
            for (size_t c = 0; c < mm; ++c) {
                size_t p = c;
                while (p < mm && !A[p][c]) ++p;
                if (p == mm)
                    throw domain_error(errc::not_tabulated,
                                       "singular junction block on a cyclic component");
                std::swap(A[p], A[c]);
                std::swap(inv[p], inv[c]);
                for (size_t r = 0; r < mm; ++r) {
                    if (r == c || !A[r][c]) continue;
                    for (size_t j = 0; j < mm; ++j) {
                        A[r][j] ^= A[c][j];
                        inv[r][j] ^= inv[c][j];
                    }
                }
            }
            return inv;
        };
        for (size_t i = 0; i < L; ++i) {
            const auto& prev = *bridge_seq[i];
            const auto& next = *bridge_seq[(i + 1) % L];
            const auto& cell = cells_fwd[i];
            // read the junction block with rows indexed by the _-bridge and
            // columns by the ^-bridge (grid rows always belong to _-letters)
            bool prev_is_sub = decos[i].side == WSide::sub;
            const auto& subg = prev_is_sub ? prev : next;
            const auto& supg = prev_is_sub ? next : prev;
            std::vector<std::vector<int>> A(mm, std::vector<int>(mm, 0));
            for (size_t a = 0; a < mm; ++a)
                for (size_t b = 0; b < mm; ++b) {
                    auto line_in = [&](int n, bool want_row) {
                        for (int l : {n, ulink[n]})
                            if (l >= 0 && (l < R) == want_row &&
                                (want_row ? rstripe[l] == cell.first
                                          : cstripe[l - R] == cell.second))
                                return l;
                        return -1;
                    };
                    int rl = line_in(subg[a], true);
                    int cl = line_in(supg[b], false);
                    if (rl < 0 || cl < 0) continue;
                    A[a][b] = static_cast<int>(m[rl][cl - R] & 1);
                }
            // a block maps the ^-bridge space into the _-bridge space, so a
            // step leaving a _-bridge composes with the inverse; only this
            // typed composition is stable under the admissible line ops
            if (prev_is_sub) A = mat_inv(A);
            else mat_inv(A); // reject non-invertible blocks symmetrically
            M = mat_mul(A, M);
        }
        // the typed product runs against the orientation that carries the
        // companion block, so the monodromy is its inverse
        M = mat_inv(M);
        // elementary divisors of t*Id - M over the 2-element field
        std::vector<std::vector<std::vector<int>>> TM(
            mm, std::vector<std::vector<int>>(mm));
        for (size_t i = 0; i < mm; ++i)
            for (size_t j = 0; j < mm; ++j) {
                std::vector<int> p;
                if (M[i][j]) p = {1};
                if (i == j) {
                    p.resize(2, 0);
                    p[1] ^= 1;
                }
                TM[i][j] = poly_trim(p);
            }
        for (const auto& f : polymat_diagonal(TM)) {
            if (f.size() < 2) continue;
            for (const auto& q : poly_prime_powers(f)) {
                bool is_t_power = true;
                for (size_t d = 0; d + 1 < q.size(); ++d)
                    if (q[d]) is_t_power = false;
                if (is_t_power) {
                    // nilpotent part: the cycle opened into a string that
                    // runs around e times
                    int e = static_cast<int>(q.size()) - 1;
                    XWord w;
                    for (int rep = 0; rep < e; ++rep)
                        for (const auto& d : decos) w.decos.push_back(d);
                    w.joins.assign(w.decos.size() - 1, WJoin::star);
                    out.words.push_back(w);
                } else {
                    XWord w;
                    w.decos = decos;
                    w.joins.assign(decos.size(), WJoin::star);
                    w.cycle = true;
                    w.poly = q;
                    out.words.push_back(canonical_word(w));
                }
            }
        }
        // the component is fully consumed
        for (int n : comp)
            for (int l : {n, ulink[n]}) {
                if (l < 0) continue;
                if (l < R)
                    rdead[l] = 1;
                else
                    cdead[l - R] = 1;
            }
    }
};

} // namespace detail

// Decomposes an element of the dimension-7 grid into its word/band summands
// plus the odd-torsion markers split off the integer block.
inline WDecomposition reduce_W(const Element& e) {
    detail::WReducer red(e);
    return red.run();
}

} // namespace hotype
