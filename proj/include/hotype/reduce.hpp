#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hotype/bimodule.hpp"
#include "hotype/errors.hpp"
#include "hotype/snf.hpp"
#include "hotype/transform.hpp"

namespace hotype {

// ---------------------------------------------------------------------------
// Indecomposable summand descriptors and their matrix realizations.
// ---------------------------------------------------------------------------

enum class Family { empty_row, empty_col, snf, dim5, l1, l2 };

struct IndecDescriptor {
    Family family = Family::empty_row;
    std::string stripe_label; // empty_row / empty_col
    i64 q = 0;                // snf: M(q); dim5 Moore part
    int r = -1;               // dim5: -1 = Moore, 0 = eta on a sphere, >0 = eta on G_r
    int t = 0;                // dim5: 0 = no integer part, else 2^t
    int sup = 0;              // l2 superscript (0 for l1 and for the 44-block shapes)
    int i = 0, l = 0;         // subscripts; l = 0 when absent
    bool has_w = false;       // the two-parameter 44-block shapes
    i64 v = 0, w = 0;

    auto key() const {
        return std::tie(family, sup, i, l, has_w, q, r, t, v, w, stripe_label);
    }
    bool operator<(const IndecDescriptor& o) const { return key() < o.key(); }
    bool operator==(const IndecDescriptor& o) const { return key() == o.key(); }

    std::string to_string() const;
};

inline IndecDescriptor make_empty_row(std::string label) {
    IndecDescriptor d;
    d.family = Family::empty_row;
    d.stripe_label = std::move(label);
    return d;
}
inline IndecDescriptor make_empty_col(std::string label) {
    IndecDescriptor d;
    d.family = Family::empty_col;
    d.stripe_label = std::move(label);
    return d;
}
inline IndecDescriptor make_snf(i64 q) {
    IndecDescriptor d;
    d.family = Family::snf;
    d.q = q;
    return d;
}
// r = -1: Moore M(q); r = 0: eta landing on a sphere; r > 0: eta landing on
// the Moore summand G_r.  t > 0 adds the even attaching coordinate 2^t.
inline IndecDescriptor make_dim5(int r, int t, i64 q = 0) {
    IndecDescriptor d;
    d.family = Family::dim5;
    d.r = r;
    d.t = t;
    d.q = q;
    return d;
}
inline IndecDescriptor make_l1(int i, int l, i64 v) {
    IndecDescriptor d;
    d.family = Family::l1;
    d.i = i;
    d.l = l;
    d.v = v;
    return d;
}
inline IndecDescriptor make_l2(int sup, int i, int l, i64 v) {
    IndecDescriptor d;
    d.family = Family::l2;
    d.sup = sup;
    d.i = i;
    d.l = l;
    d.v = v;
    return d;
}
inline IndecDescriptor make_l2_pair(int i, int l, i64 v, i64 w) {
    // v_i w_{4l} for i in {1,2,3}; l = 4, 6 or 7
    IndecDescriptor d;
    d.family = Family::l2;
    d.i = i;
    d.l = l;
    d.has_w = true;
    d.v = v;
    d.w = w;
    return d;
}

namespace detail {

inline std::string pow2_str(int t) { return "2^" + std::to_string(t); }

} // namespace detail

inline std::string IndecDescriptor::to_string() const {
    switch (family) {
    case Family::empty_row:
        return "empty_row " + stripe_label;
    case Family::empty_col:
        return "empty_col " + stripe_label;
    case Family::snf:
        return "M(" + std::to_string(q) + ")";
    case Family::dim5: {
        if (r < 0) return "M(" + std::to_string(q) + ")";
        std::string inner = "eta";
        if (r > 0) inner = detail::pow2_str(r) + " " + inner;
        if (t > 0) inner += (r > 0 ? " " : "") + detail::pow2_str(t);
        return "C(" + inner + ")";
    }
    case Family::l1: {
        std::string s = "v" + std::to_string(i);
        if (l != 0) s += std::to_string(l);
        return s + "=" + std::to_string(v);
    }
    case Family::l2: {
        if (has_w) {
            std::string tail = l == 4 ? "44" : "4" + std::to_string(l);
            return "v" + std::to_string(i) + "w" + tail + " v=" + std::to_string(v) +
                   " w=" + std::to_string(w);
        }
        std::string s = "v" + std::to_string(i);
        if (l != 0) s += std::to_string(l);
        if (sup != 0) s += "^" + std::to_string(sup);
        return s + "=" + std::to_string(v);
    }
    }
    return "?";
}

using DescriptorList = std::vector<IndecDescriptor>;

inline std::string descriptors_to_string(const DescriptorList& ds) {
    std::string out;
    for (size_t k = 0; k < ds.size(); ++k) {
        if (k) out += ", ";
        out += ds[k].to_string();
    }
    return "{" + out + "}";
}

// Matrix realization of a descriptor over its home bimodule.
inline Element realize(const SpecPtr& spec, const IndecDescriptor& d) {
    std::vector<int> rs(spec->rows(), 0), cs(spec->cols(), 0);
    std::vector<RawEntry> raw;
    auto row_of = [&](int label) { return spec->row_index(std::to_string(label)) + 1; };
    switch (d.family) {
    case Family::empty_row:
        rs[spec->row_index(d.stripe_label)] = 1;
        break;
    case Family::empty_col:
        cs[spec->col_index(d.stripe_label)] = 1;
        break;
    case Family::snf:
        rs[0] = cs[0] = 1;
        raw.push_back({1, 1, 1, 1, d.q});
        break;
    case Family::dim5: {
        rs[0] = 1;
        if (d.r < 0) {
            cs[0] = 1;
            raw.push_back({1, 1, 1, 1, d.q});
        } else {
            int eta_col = d.r == 0 ? spec->col_index("F3") + 1
                                   : spec->col_index("G" + std::to_string(d.r)) + 1;
            cs[eta_col - 1] = 1;
            raw.push_back({1, eta_col, 1, 1, 1});
            if (d.t > 0) {
                cs[0] = 1;
                raw.push_back({1, 1, 1, 1, i64(1) << d.t});
            }
        }
        break;
    }
    case Family::l1: {
        cs[0] = 1;
        rs[row_of(d.i) - 1] = 1;
        raw.push_back({row_of(d.i), 1, 1, 1, d.v});
        if (d.l != 0) {
            rs[row_of(d.l) - 1] = 1;
            raw.push_back({row_of(d.l), 1, 1, 1, 1});
        }
        break;
    }
    case Family::l2: {
        if (d.sup != 0) {
            // single-column shapes v^j_i and v^j_{il}
            cs[d.sup - 1] = 1;
            rs[row_of(d.i) - 1] = 1;
            raw.push_back({row_of(d.i), d.sup, 1, 1, d.v});
            if (d.l != 0) {
                rs[row_of(d.l) - 1] = 1;
                raw.push_back({row_of(d.l), d.sup, 1, 1, 1});
            }
        } else if (!d.has_w) {
            // v_{44}: (1 v) on the stripe-4 row; v_{4l} adds the row (0 1)
            cs[0] = cs[1] = 1;
            rs[row_of(4) - 1] = 1;
            raw.push_back({row_of(4), 1, 1, 1, 1});
            raw.push_back({row_of(4), 2, 1, 1, d.v});
            if (d.l != 4) {
                rs[row_of(d.l) - 1] = 1;
                raw.push_back({row_of(d.l), 2, 1, 1, 1});
            }
        } else {
            // v_i w_{44} = (v 0 / 1 w); v_i w_{4l} adds the row (0 1)
            cs[0] = cs[1] = 1;
            rs[row_of(d.i) - 1] = 1;
            rs[row_of(4) - 1] = 1;
            raw.push_back({row_of(d.i), 1, 1, 1, d.v});
            raw.push_back({row_of(4), 1, 1, 1, 1});
            raw.push_back({row_of(4), 2, 1, 1, d.w});
            if (d.l != 4) {
                rs[row_of(d.l) - 1] = 1;
                raw.push_back({row_of(d.l), 2, 1, 1, 1});
            }
        }
        break;
    }
    }
    return validate_element(spec, std::move(rs), std::move(cs), raw);
}

inline Element realize_sum(const SpecPtr& spec, const DescriptorList& ds) {
    Element acc = make_zero_element(spec, std::vector<int>(spec->rows(), 0),
                                    std::vector<int>(spec->cols(), 0));
    for (const auto& d : ds) acc = direct_sum(acc, realize(spec, d));
    return acc;
}

// ---------------------------------------------------------------------------
// Sphere-map problem: Smith diagonalization plus prime-power splitting.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::pair<i64, int>> factorize(i64 q) {
    std::vector<std::pair<i64, int>> fs;
    for (i64 p = 2; p * p <= q; ++p) {
        if (q % p) continue;
        int e = 0;
        while (q % p == 0) q /= p, ++e;
        fs.push_back({p, e});
    }
    if (q > 1) fs.push_back({q, 1});
    return fs;
}

inline i64 ipow(i64 b, int e) {
    i64 r = 1;
    while (e--) r *= b;
    return r;
}

} // namespace detail

inline DescriptorList snf_reduce(const Element& e) {
    if (e.spec->id != "SPH") throw domain_error(errc::spec_mismatch, "snf_reduce expects SPH");
    int R = e.total_rows(), C = e.total_cols();
    std::vector<std::vector<i64>> a(R, std::vector<i64>(C, 0));
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c) a[r][c] = e.at(r, c).value;
    DescriptorList out;
    int rank1 = 0; // contractible pairs (diagonal 1), dropped
    int k = std::min(R, C);
    std::vector<i64> diag;
    if (k > 0) {
        auto snf = smith_normal_form(a);
        for (int d = 0; d < k; ++d) diag.push_back(snf.d[d][d]);
    }
    for (i64 q : diag) {
        if (q == 1) {
            ++rank1;
        } else if (q == 0) {
            out.push_back(make_empty_row("1"));
            out.push_back(make_empty_col("1"));
        } else {
            for (auto [p, ex] : detail::factorize(q)) out.push_back(make_snf(detail::ipow(p, ex)));
        }
    }
    for (int r = k; r < R; ++r) out.push_back(make_empty_row("1"));
    for (int c = k; c < C; ++c) out.push_back(make_empty_col("1"));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Dimension-5 problem.  Diagonalize the integer block, then eliminate the
// eta block: a row's eta entries may be cleared from rows whose integer
// diagonal has at least the same 2-adic depth, and within a row the sphere
// column beats the Moore columns.  Every surviving row carries at most one
// eta and one even integer entry.
// ---------------------------------------------------------------------------

inline DescriptorList reduce_dim5(const Element& e) {
    if (e.spec->id != "DIM5") throw domain_error(errc::spec_mismatch, "reduce_dim5 expects DIM5");
    const BimoduleSpec& sp = *e.spec;
    int R = e.total_rows();
    int n4 = e.col_sizes[0];
    int c4 = e.col_start(0); // == 0
    int ce = n4;             // eta columns start here
    int ne = e.total_cols() - n4;

    std::vector<std::vector<i64>> a(R, std::vector<i64>(n4, 0));
    std::vector<std::vector<int>> b(R, std::vector<int>(ne, 0));
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < n4; ++c) a[r][c] = e.at(r, c4 + c).value;
        for (int c = 0; c < ne; ++c) b[r][c] = static_cast<int>(e.at(r, ce + c).value);
    }

    int k = std::min(R, n4);
    std::vector<i64> diag(k, 0);
    if (k > 0 && n4 > 0) {
        auto snf = smith_normal_form(a);
        for (int d = 0; d < k; ++d) diag[d] = snf.d[d][d];
        // mirror the row side of the diagonalization on the eta block
        std::vector<std::vector<int>> nb(R, std::vector<int>(ne, 0));
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < ne; ++c) {
                i64 s = 0;
                for (int m = 0; m < R; ++m) s += snf.u[r][m] * b[m][c];
                nb[r][c] = static_cast<int>(reduce_mod(s, 2));
            }
        b = std::move(nb);
    }

    auto val2 = [](i64 q) {
        if (q == 0) return 64;
        int v = 0;
        while (q % 2 == 0) q /= 2, ++v;
        return v;
    };
    auto qval = [&](int r) { return r < k ? diag[r] : 0; };

    // odd diagonal entries clear their whole eta row
    for (int r = 0; r < k; ++r)
        if (diag[r] % 2 != 0) b[r].assign(ne, 0);

    // eta elimination in decreasing 2-adic depth
    std::vector<int> order(R);
    for (int r = 0; r < R; ++r) order[r] = r;
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return val2(qval(x)) > val2(qval(y)); });
    std::vector<int> lead(R, -1);
    for (int u : order) {
        int lu = -1;
        for (int c = 0; c < ne; ++c)
            if (b[u][c]) {
                lu = c;
                break;
            }
        if (lu < 0) continue;
        lead[u] = lu;
        for (int w2 = 0; w2 < R; ++w2) {
            if (w2 == u || !b[w2][lu]) continue;
            if (val2(qval(u)) >= val2(qval(w2)))
                for (int c = 0; c < ne; ++c) b[w2][c] ^= b[u][c];
        }
        // the lead column feeds every other eta column of this row
        for (int c = 0; c < ne; ++c)
            if (c != lu) b[u][c] = 0;
    }

    DescriptorList out;
    std::vector<bool> eta_used(ne, false);
    for (int r = 0; r < R; ++r) {
        i64 q = qval(r) < 0 ? -qval(r) : qval(r);
        int lr = lead[r];
        if (lr >= 0) eta_used[lr] = true;
        int eta_r = -1; // -1 = no eta; 0 = sphere column; >0 = Moore column G_r
        if (lr >= 0) {
            int cs = e.col_stripe(ce + lr);
            eta_r = cs == sp.col_index("F3") ? 0 : cs - sp.col_index("G1") + 1;
        }
        if (q == 1) continue; // contractible pair
        if (q == 0) {
            if (eta_r < 0)
                out.push_back(make_empty_row(sp.row_labels[0]));
            else
                out.push_back(make_dim5(eta_r, 0));
            continue;
        }
        int t = 0;
        i64 m = q;
        while (m % 2 == 0) m /= 2, ++t;
        if (eta_r >= 0)
            out.push_back(make_dim5(eta_r, t));
        else if (t > 0)
            out.push_back(make_dim5(-1, 0, i64(1) << t));
        for (auto [p, ex] : detail::factorize(m)) out.push_back(make_dim5(-1, 0, detail::ipow(p, ex)));
    }
    // unattached columns
    int used4 = 0;
    for (int r = 0; r < k; ++r)
        if (diag[r] != 0) ++used4;
    for (int c = used4; c < n4; ++c) out.push_back(make_empty_col("F4"));
    for (int c = 0; c < ne; ++c)
        if (!eta_used[c]) out.push_back(make_empty_col(sp.col_labels[e.col_stripe(ce + c)]));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// The torsion-free problems U1 and U2.  The 2-primary part is reduced by a
// greedy chain elimination (pivots in the proof's partial order, earliest
// class first, preferring unclaimed columns); the 3-primary part is free of
// pattern restrictions and contributes only block ranks.  The two parts are
// reassembled by enumerating the placements of the 3-ranks onto the 2-part
// summands and free lines, and the remaining unit freedom (one determinant
// constraint per communicating stripe class) is normalized by a small
// GF(2)-linear search.  The lexicographically least descriptor multiset wins.
// ---------------------------------------------------------------------------

namespace detail {

struct UWeight {
    int val, rs, cs;
};

// proof order 1_1 < 1_3 < 1_2 < 1_6 < 1_4 < 2_1 < 2_3 < 2_2 < 4_1
// (stripe labels; indices into row_labels {1,2,3,4,6})
inline const std::vector<UWeight>& u1_chain() {
    static const std::vector<UWeight> c = {{0, 0, 0}, {0, 2, 0}, {0, 1, 0}, {0, 4, 0}, {0, 3, 0},
                                           {1, 0, 0}, {1, 2, 0}, {1, 1, 0}, {2, 0, 0}};
    return c;
}
// the two printed chains interleaved; 1^1_6 must precede 1^2_6 because the
// starred column addition kills (6,2) from (6,1) and not conversely
inline const std::vector<UWeight>& u2_chain() {
    static const std::vector<UWeight> c = {
        {0, 0, 0}, {0, 2, 0}, {0, 1, 0}, {0, 3, 1}, {0, 4, 1}, {0, 6, 1}, {0, 5, 0}, {0, 5, 1},
        {0, 3, 0}, {1, 0, 0}, {1, 2, 0}, {1, 1, 0}, {1, 3, 1}, {1, 4, 1}, {2, 0, 0}, {2, 3, 1}};
    return c;
}

inline i64 two_part_mod(i64 m) { return m == 24 ? 8 : m == 12 ? 4 : m == 2 ? 2 : 0; }

inline int val2of(i64 x) {
    int v = 0;
    while (x % 2 == 0) x /= 2, ++v;
    return v;
}

// 2-part scalar action; starred coefficients carry 2-part 4 and act on a
// mod-2 target by c/4
inline i64 act2(i64 c2, i64 to_m, bool star, i64 v) {
    if (star && to_m == 2) return reduce_mod((c2 / 4) * v, 2);
    return reduce_mod(c2 * v, to_m);
}

struct ValueSlot {
    int line_r = 0, line_c = 0; // global line ids (columns offset by the row count)
    i64 mod = 2;                // full cell modulus (2, 12 or 24)
    i64 shift = 0;              // coupling shift step (0 = none)
    i64 v2 = 0;                 // 2-part value from the elimination
    bool three = false;         // a 3-rank pivot was assigned here
    int block = -1;             // 3-block this slot can host (-1 = none)
};

struct SummandPlan {
    int kind = 0; // 0 single, 1 coupled, 2 v44, 3 v4l, 4 viw44, 5 viw4l
    int sup = 0;  // column stripe label for single/coupled shapes
    int i_label = 0, l_label = 0;
    int c1_line = -1;    // first-stripe column line of the two-column shapes
    int pivot4_line = -1; // stripe-4 pivot row of shapes that can host one
    bool dead = false;    // absorbed into another plan by a merge
    std::vector<ValueSlot> values;
};

class UEngine {
public:
    explicit UEngine(const Element& e) : e_(e), u2_(e.spec->id == "U2") {
        R_ = e.total_rows();
        C_ = e.total_cols();
        a2_.assign(R_, std::vector<i64>(C_, 0));
        m2_.assign(R_, std::vector<i64>(C_, 0));
        a3_.assign(R_, std::vector<int>(C_, 0));
        for (int r = 0; r < R_; ++r)
            for (int c = 0; c < C_; ++c) {
                const Cell& cell = e.cell_at(r, c);
                if (cell.is_zero_cell()) continue;
                m2_[r][c] = two_part_mod(cell.modulus);
                a2_[r][c] = reduce_mod(e.at(r, c).value, m2_[r][c]);
                if (cell.modulus % 3 == 0) a3_[r][c] = static_cast<int>(reduce_mod(e.at(r, c).value, 3));
            }
        rclaim_.assign(R_, -1);
        cclaim_.assign(C_, -1);
        col_widx_.assign(C_, -1);
        pivot_row_of_col_.assign(C_, -1);
        pivot_col_of_row_.assign(R_, -1);
    }

    DescriptorList run() {
        for (int b = 0; b < (u2_ ? 2 : 1); ++b) block_analysis(b);
        eliminate();
        cleanup();
        for (int attempt = 0;; ++attempt) {
            comps_.clear();
            free_rows_.clear();
            free_cols_.clear();
            build_components();
            const Comp* bad = nullptr;
            for (const auto& comp : comps_) {
                try {
                    classify(comp);
                } catch (const domain_error&) {
                    bad = &comp;
                    break;
                }
            }
            if (!bad) break;
            if (attempt >= 4 || !untangle(*bad)) classify(*bad); // rethrows
        }
        return assemble();
    }

private:
    const Element& e_;
    bool u2_;
    int R_ = 0, C_ = 0;
    std::vector<std::vector<i64>> a2_, m2_;
    std::vector<std::vector<int>> a3_;
    std::vector<int> rclaim_, cclaim_, col_widx_, pivot_row_of_col_, pivot_col_of_row_;
    int rank3_[2] = {0, 0};
    bool tight_[2] = {false, false}; // square block of full 3-rank
    int det3_[2] = {1, 1};           // block determinant mod 3 when tight

    int rstripe(int r) const { return e_.row_stripe(r); }
    int cstripe(int c) const { return e_.col_stripe(c); }
    int rlabel(int r) const { return std::stoi(e_.spec->row_labels[rstripe(r)]); }
    int clabel(int c) const { return std::stoi(e_.spec->col_labels[cstripe(c)]); }

    // block 0: first three row stripes against first-stripe columns; block 1
    // (two-column problem only): row stripes 4,5 against second-stripe columns
    bool in_block(int r, int c, int b) const {
        if (b == 0) return rstripe(r) <= 2 && cstripe(c) == 0;
        return (rstripe(r) == 3 || rstripe(r) == 4) && cstripe(c) == 1;
    }

    // rank of the 3-part block; when the block is square of full rank its
    // determinant survives determinant-one transformations and is recorded
    void block_analysis(int b) {
        std::vector<std::vector<int>> m;
        for (int r = 0; r < R_; ++r) {
            std::vector<int> row;
            for (int c = 0; c < C_; ++c)
                if (in_block(r, c, b)) row.push_back(a3_[r][c]);
            if (!row.empty()) m.push_back(row);
        }
        int rows = static_cast<int>(m.size());
        int cols = rows ? static_cast<int>(m[0].size()) : 0;
        int rank = 0, det = 1;
        for (int c = 0; c < cols && rank < rows; ++c) {
            int p = -1;
            for (int r = rank; r < rows; ++r)
                if (m[r][c]) {
                    p = r;
                    break;
                }
            if (p < 0) continue;
            if (p != rank) {
                std::swap(m[rank], m[p]);
                det = (3 - det) % 3; // row swap negates the determinant
            }
            det = det * m[rank][c] % 3;
            for (int r = 0; r < rows; ++r) {
                if (r == rank || !m[r][c]) continue;
                int f = (m[r][c] * (m[rank][c] == 1 ? 2 : 1)) % 3;
                for (int cc = 0; cc < cols; ++cc) m[r][cc] = (m[r][cc] + f * m[rank][cc]) % 3;
            }
            ++rank;
        }
        rank3_[b] = rank;
        tight_[b] = rows > 0 && rows == cols && rank == rows;
        det3_[b] = tight_[b] ? det : 1;
    }

    // row op: row r' += c2 * row r (2-part only; the integer lift is chosen
    // trivial mod 3)
    void apply_row_op(int rt, int rsrc, i64 c2, bool star) {
        for (int c = 0; c < C_; ++c) {
            if (m2_[rsrc][c] == 0 || m2_[rt][c] == 0) continue;
            a2_[rt][c] = reduce_mod(a2_[rt][c] + act2(c2, m2_[rt][c], star, a2_[rsrc][c]), m2_[rt][c]);
        }
    }
    void apply_col_op(int ct, int csrc, i64 c2, bool star) {
        for (int r = 0; r < R_; ++r) {
            if (m2_[r][csrc] == 0 || m2_[r][ct] == 0) continue;
            a2_[r][ct] = reduce_mod(a2_[r][ct] + act2(c2, m2_[r][ct], star, a2_[r][csrc]), m2_[r][ct]);
        }
    }

    // try to zero entry (rt, c) by adding a multiple of row rsrc
    bool kill_by_row(int rt, int rsrc, int c) {
        i64 d = e_.spec->row_ring.d[rstripe(rt)][rstripe(rsrc)];
        if (d == 0) return false;
        bool star = e_.spec->row_ring.starred(rstripe(rt) + 1, rstripe(rsrc) + 1);
        i64 d2 = i64(1) << val2of(d);
        for (i64 c2 = d2; c2 < 8; c2 += d2)
            if (reduce_mod(a2_[rt][c] + act2(c2, m2_[rt][c], star, a2_[rsrc][c]), m2_[rt][c]) == 0) {
                apply_row_op(rt, rsrc, c2, star);
                return true;
            }
        return false;
    }
    bool kill_by_col(int ct, int csrc, int r) {
        i64 d = e_.spec->col_ring.d[cstripe(csrc)][cstripe(ct)];
        if (d == 0) return false;
        bool star = e_.spec->col_ring.starred(cstripe(csrc) + 1, cstripe(ct) + 1);
        i64 d2 = i64(1) << val2of(d);
        for (i64 c2 = d2; c2 < 8; c2 += d2)
            if (reduce_mod(a2_[r][ct] + act2(c2, m2_[r][ct], star, a2_[r][csrc]), m2_[r][ct]) == 0) {
                apply_col_op(ct, csrc, c2, star);
                return true;
            }
        return false;
    }

    void pivotize(int r, int c, int widx) {
        rclaim_[r] = 1;
        pivot_col_of_row_[r] = c;
        if (cclaim_[c] < 0) {
            cclaim_[c] = 1;
            col_widx_[c] = widx;
            pivot_row_of_col_[c] = r;
        }
        for (int r2 = 0; r2 < R_; ++r2)
            if (r2 != r && a2_[r2][c] != 0) kill_by_row(r2, r, c);
        for (int c2 = 0; c2 < C_; ++c2)
            if (c2 != c && a2_[r][c2] != 0) kill_by_col(c2, c, r);
    }

    int weight_index(int val, int rs, int cs) const {
        const auto& chain = u2_ ? u2_chain() : u1_chain();
        for (size_t i = 0; i < chain.size(); ++i)
            if (chain[i].val == val && chain[i].rs == rs && chain[i].cs == cs)
                return static_cast<int>(i);
        return -1;
    }

    // a residual entry on an already claimed line still absorbs entries of
    // later weight classes; try those kills before making (r, c) a pivot
    bool rider_kill(int r, int c, int widx) {
        for (int r2 = 0; r2 < R_; ++r2) {
            if (r2 == r || rclaim_[r2] < 0 || a2_[r2][c] == 0) continue;
            int w2 = weight_index(val2of(a2_[r2][c]), rstripe(r2), cstripe(c));
            if (w2 >= 0 && w2 < widx && kill_by_row(r, r2, c)) return true;
        }
        for (int c2 = 0; c2 < C_; ++c2) {
            if (c2 == c || cclaim_[c2] < 0 || a2_[r][c2] == 0) continue;
            int w2 = weight_index(val2of(a2_[r][c2]), rstripe(r), cstripe(c2));
            if (w2 >= 0 && w2 < widx && kill_by_col(c, c2, r)) return true;
        }
        return false;
    }

    void eliminate() {
        const auto& chain = u2_ ? u2_chain() : u1_chain();
        int rider_budget = 64 * (R_ + C_ + 1);
        bool progress = true;
        while (progress) {
            progress = false;
            for (size_t widx = 0; widx < chain.size() && !progress; ++widx) {
                const auto& w = chain[widx];
                int best_r = -1, best_c = -1;
                bool best_free = false;
                int best_cwidx = -1;
                for (int r = 0; r < R_; ++r) {
                    if (rclaim_[r] >= 0 || rstripe(r) != w.rs) continue;
                    for (int c = 0; c < C_; ++c) {
                        if (cstripe(c) != w.cs || a2_[r][c] == 0) continue;
                        if (val2of(a2_[r][c]) != w.val) continue;
                        bool free = cclaim_[c] < 0;
                        // prefer unclaimed columns; among claimed ones the
                        // latest pivot class; then position
                        int cw = free ? -1 : col_widx_[c];
                        bool better;
                        if (best_r < 0)
                            better = true;
                        else if (free != best_free)
                            better = free;
                        else if (!free && cw != best_cwidx)
                            better = cw > best_cwidx;
                        else
                            better = std::make_pair(r, c) < std::make_pair(best_r, best_c);
                        if (better) {
                            best_r = r;
                            best_c = c;
                            best_free = free;
                            best_cwidx = cw;
                        }
                    }
                }
                if (best_r >= 0) {
                    if (rider_budget > 0 && rider_kill(best_r, best_c, static_cast<int>(widx)))
                        --rider_budget;
                    else
                        pivotize(best_r, best_c, static_cast<int>(widx));
                    progress = true;
                }
            }
        }
    }

    // apply row rt += c2 * rsrc if it strictly shrinks the support of row rt
    bool sparsify_row(int rt, int rsrc) {
        i64 d = e_.spec->row_ring.d[rstripe(rt)][rstripe(rsrc)];
        if (d == 0) return false;
        bool star = e_.spec->row_ring.starred(rstripe(rt) + 1, rstripe(rsrc) + 1);
        i64 d2 = i64(1) << val2of(d);
        int before = 0;
        for (int c = 0; c < C_; ++c) before += a2_[rt][c] != 0;
        i64 best_c2 = 0;
        int best = before;
        for (i64 c2 = d2; c2 < 8; c2 += d2) {
            int after = 0;
            for (int c = 0; c < C_; ++c) {
                i64 v = a2_[rt][c];
                if (m2_[rsrc][c] != 0 && m2_[rt][c] != 0)
                    v = reduce_mod(v + act2(c2, m2_[rt][c], star, a2_[rsrc][c]), m2_[rt][c]);
                after += v != 0;
            }
            if (after < best) {
                best = after;
                best_c2 = c2;
            }
        }
        if (best == before) return false;
        apply_row_op(rt, rsrc, best_c2, star);
        return true;
    }
    bool sparsify_col(int ct, int csrc) {
        i64 d = e_.spec->col_ring.d[cstripe(csrc)][cstripe(ct)];
        if (d == 0) return false;
        bool star = e_.spec->col_ring.starred(cstripe(csrc) + 1, cstripe(ct) + 1);
        i64 d2 = i64(1) << val2of(d);
        int before = 0;
        for (int r = 0; r < R_; ++r) before += a2_[r][ct] != 0;
        i64 best_c2 = 0;
        int best = before;
        for (i64 c2 = d2; c2 < 8; c2 += d2) {
            int after = 0;
            for (int r = 0; r < R_; ++r) {
                i64 v = a2_[r][ct];
                if (m2_[r][csrc] != 0 && m2_[r][ct] != 0)
                    v = reduce_mod(v + act2(c2, m2_[r][ct], star, a2_[r][csrc]), m2_[r][ct]);
                after += v != 0;
            }
            if (after < best) {
                best = after;
                best_c2 = c2;
            }
        }
        if (best == before) return false;
        apply_col_op(ct, csrc, best_c2, star);
        return true;
    }

    // greedy support sparsification: apply any legal line operation that
    // strictly shrinks the support of its target line; the total support count
    // is monotone decreasing, so this terminates
    void cleanup() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (int rt = 0; rt < R_; ++rt)
                for (int rs = 0; rs < R_; ++rs)
                    if (rt != rs && sparsify_row(rt, rs)) changed = true;
            for (int ct = 0; ct < C_; ++ct)
                for (int cs = 0; cs < C_; ++cs)
                    if (ct != cs && sparsify_col(ct, cs)) changed = true;
        }
    }

    // connected components of the leftover 2-part support
    struct Comp {
        std::vector<int> rows, cols;
    };
    std::vector<Comp> comps_;
    std::vector<int> free_rows_, free_cols_;

    int find(std::vector<int>& up, int x) { return up[x] == x ? x : up[x] = find(up, up[x]); }

    void build_components() {
        std::vector<int> up(R_ + C_);
        for (int i = 0; i < R_ + C_; ++i) up[i] = i;
        for (int r = 0; r < R_; ++r)
            for (int c = 0; c < C_; ++c)
                if (a2_[r][c] != 0) up[find(up, r)] = find(up, R_ + c);
        std::map<int, Comp> by_root;
        for (int r = 0; r < R_; ++r) {
            bool nz = false;
            for (int c = 0; c < C_; ++c) nz = nz || a2_[r][c] != 0;
            if (nz)
                by_root[find(up, r)].rows.push_back(r);
            else
                free_rows_.push_back(r);
        }
        for (int c = 0; c < C_; ++c) {
            bool nz = false;
            for (int r = 0; r < R_; ++r) nz = nz || a2_[r][c] != 0;
            if (nz)
                by_root[find(up, R_ + c)].cols.push_back(c);
            else
                free_cols_.push_back(c);
        }
        for (auto& [root, comp] : by_root) comps_.push_back(comp);
    }

    // Bounded search over two-primary transvections confined to one entangled
    // component: find the support-minimal, lexicographically least state whose
    // sub-components all classify.  Needed because reaching a recognizable
    // form can require temporarily growing the support (pre-conditioning an
    // entry before an odd-coefficient kill), which the greedy passes refuse.
    bool untangle(const Comp& comp) {
        const std::vector<int>& rows = comp.rows;
        const std::vector<int>& cols = comp.cols;
        int nr = static_cast<int>(rows.size()), nc = static_cast<int>(cols.size());
        auto pack = [&] {
            std::vector<i64> s(static_cast<size_t>(nr) * nc);
            for (int i = 0; i < nr; ++i)
                for (int j = 0; j < nc; ++j) s[i * nc + j] = a2_[rows[i]][cols[j]];
            return s;
        };
        auto unpack = [&](const std::vector<i64>& s) {
            for (int i = 0; i < nr; ++i)
                for (int j = 0; j < nc; ++j) a2_[rows[i]][cols[j]] = s[i * nc + j];
        };
        std::vector<i64> saved = pack();

        struct TOp {
            bool row;
            int t, s;
            i64 c2;
            bool star;
        };
        std::vector<TOp> ops;
        for (int t = 0; t < nr; ++t)
            for (int s = 0; s < nr; ++s) {
                if (t == s) continue;
                i64 d = e_.spec->row_ring.d[rstripe(rows[t])][rstripe(rows[s])];
                if (d == 0) continue;
                bool star = e_.spec->row_ring.starred(rstripe(rows[t]) + 1, rstripe(rows[s]) + 1);
                for (i64 c2 = i64(1) << val2of(d); c2 < 8; c2 += i64(1) << val2of(d))
                    ops.push_back({true, t, s, c2, star});
            }
        for (int t = 0; t < nc; ++t)
            for (int s = 0; s < nc; ++s) {
                if (t == s) continue;
                i64 d = e_.spec->col_ring.d[cstripe(cols[s])][cstripe(cols[t])];
                if (d == 0) continue;
                bool star = e_.spec->col_ring.starred(cstripe(cols[s]) + 1, cstripe(cols[t]) + 1);
                for (i64 c2 = i64(1) << val2of(d); c2 < 8; c2 += i64(1) << val2of(d))
                    ops.push_back({false, t, s, c2, star});
            }

        auto apply = [&](const std::vector<i64>& in, const TOp& op) {
            std::vector<i64> out = in;
            if (op.row) {
                for (int j = 0; j < nc; ++j) {
                    i64 m = m2_[rows[op.t]][cols[j]];
                    if (m == 0 || m2_[rows[op.s]][cols[j]] == 0) continue;
                    out[op.t * nc + j] =
                        reduce_mod(in[op.t * nc + j] + act2(op.c2, m, op.star, in[op.s * nc + j]), m);
                }
            } else {
                for (int i = 0; i < nr; ++i) {
                    i64 m = m2_[rows[i]][cols[op.t]];
                    if (m == 0 || m2_[rows[i]][cols[op.s]] == 0) continue;
                    out[i * nc + op.t] =
                        reduce_mod(in[i * nc + op.t] + act2(op.c2, m, op.star, in[i * nc + op.s]), m);
                }
            }
            return out;
        };

        auto support = [](const std::vector<i64>& s) {
            int n = 0;
            for (i64 v : s) n += v != 0;
            return n;
        };
        // hill descent with bounded detours: explore states within a small
        // support excursion of the current best; adopt any strictly sparser
        // state and restart from it.  Only when no descent exists does the
        // full neighbourhood get scanned for a recognizable form.
        constexpr size_t budget = 300000;
        std::vector<i64> start = saved;
        std::set<std::vector<i64>> visited;
        std::deque<std::vector<i64>> frontier;
        bool descended = true;
        while (descended) {
            descended = false;
            const int base = support(start);
            visited.clear();
            frontier.clear();
            visited.insert(start);
            frontier.push_back(start);
            while (!frontier.empty() && visited.size() < budget && !descended) {
                std::vector<i64> cur = std::move(frontier.front());
                frontier.pop_front();
                for (const auto& op : ops) {
                    auto next = apply(cur, op);
                    int sup = support(next);
                    if (sup > base + 2) continue;
                    if (sup < base) {
                        start = std::move(next);
                        descended = true;
                        break;
                    }
                    if (visited.insert(next).second) frontier.push_back(next);
                }
            }
        }
        std::vector<const std::vector<i64>*> states;
        states.reserve(visited.size());
        for (const auto& s : visited) states.push_back(&s);
        std::stable_sort(states.begin(), states.end(),
                         [&](const std::vector<i64>* a, const std::vector<i64>* b) {
                             int sa = support(*a), sb = support(*b);
                             return sa != sb ? sa < sb : *a < *b;
                         });
        for (const auto* st : states) {
            unpack(*st);
            // sub-components of this candidate state over the same lines
            std::vector<int> up(nr + nc);
            for (int i = 0; i < nr + nc; ++i) up[i] = i;
            for (int i = 0; i < nr; ++i)
                for (int j = 0; j < nc; ++j)
                    if ((*st)[i * nc + j] != 0) up[find(up, i)] = find(up, nr + j);
            std::map<int, Comp> subs;
            for (int i = 0; i < nr; ++i) {
                bool nz = false;
                for (int j = 0; j < nc; ++j) nz = nz || (*st)[i * nc + j] != 0;
                if (nz) subs[find(up, i)].rows.push_back(rows[i]);
            }
            for (int j = 0; j < nc; ++j) {
                bool nz = false;
                for (int i = 0; i < nr; ++i) nz = nz || (*st)[i * nc + j] != 0;
                if (nz) subs[find(up, nr + j)].cols.push_back(cols[j]);
            }
            bool ok = true;
            for (const auto& [root, sub] : subs) {
                try {
                    classify(sub);
                } catch (const domain_error&) {
                    ok = false;
                    break;
                }
            }
            if (ok) return true;
        }
        unpack(saved);
        return false;
    }

    i64 shift_of_coupled(int sup, int i_label, int l_label) const {
        if (sup == 1) {
            if (i_label == 1) return 12;
            if (i_label == 2 && l_label == 6) return 6;
            return 0;
        }
        if (i_label == 4) return 12;
        if (i_label == 5 && l_label == 7) return 6;
        return 0;
    }

    // classify a 2-part component into a summand plan (3-part handled later)
    SummandPlan classify(const Comp& comp) const {
        auto fail = [&]() -> SummandPlan {
            throw domain_error(errc::spec_mismatch, "unrecognized residual component");
        };
        SummandPlan p;
        auto slot = [&](int r, int c, i64 shift) {
            ValueSlot s;
            s.line_r = r;
            s.line_c = R_ + c;
            s.mod = e_.cell_at(r, c).modulus;
            s.shift = shift;
            s.v2 = a2_[r][c];
            for (int b = 0; b < 2; ++b)
                if (in_block(r, c, b)) s.block = b;
            return s;
        };
        if (comp.cols.size() == 1) {
            int c = comp.cols[0];
            p.sup = clabel(c);
            if (comp.rows.size() == 1) {
                p.kind = 0;
                p.i_label = rlabel(comp.rows[0]);
                if (p.i_label == 4 && p.sup == 1) p.pivot4_line = comp.rows[0];
                p.values.push_back(slot(comp.rows[0], c, 0));
                return p;
            }
            if (comp.rows.size() == 2) {
                int ri = comp.rows[0], rl = comp.rows[1];
                if (rlabel(ri) > rlabel(rl)) std::swap(ri, rl);
                int il = rlabel(ri), ll = rlabel(rl);
                bool ok = p.sup == 1 ? (il >= 1 && il <= 3 && (ll == 4 || ll == 6))
                                     : ((il == 4 || il == 5) && (ll == 6 || ll == 7));
                if (!ok || a2_[rl][c] != 1) return fail();
                p.kind = 1;
                p.i_label = il;
                p.l_label = ll;
                if (ll == 4 && p.sup == 1) p.pivot4_line = rl;
                p.values.push_back(slot(ri, c, shift_of_coupled(p.sup, il, ll)));
                return p;
            }
            return fail();
        }
        if (comp.cols.size() == 2 && u2_) {
            int c1 = comp.cols[0], c2 = comp.cols[1];
            if (cstripe(c1) != 0 || cstripe(c2) != 1) return fail();
            std::vector<int> t_rows, four_rows, l_rows;
            for (int r : comp.rows) {
                int lab = rlabel(r);
                if (lab <= 3)
                    t_rows.push_back(r);
                else if (lab == 4)
                    four_rows.push_back(r);
                else if (lab == 6 || lab == 7)
                    l_rows.push_back(r);
                else
                    return fail();
            }
            if (four_rows.size() != 1 || t_rows.size() > 1 || l_rows.size() > 1) return fail();
            int r4 = four_rows[0];
            if (a2_[r4][c1] != 1) return fail();
            if (!l_rows.empty() && (a2_[l_rows[0]][c2] != 1 || a2_[l_rows[0]][c1] != 0)) return fail();
            if (!t_rows.empty() && a2_[t_rows[0]][c2] != 0) return fail();
            p.c1_line = R_ + c1;
            p.l_label = l_rows.empty() ? 4 : rlabel(l_rows[0]);
            if (t_rows.empty()) {
                p.kind = l_rows.empty() ? 2 : 3;
                p.values.push_back(slot(r4, c2, 12));
            } else {
                p.kind = l_rows.empty() ? 4 : 5;
                p.i_label = rlabel(t_rows[0]);
                p.values.push_back(slot(t_rows[0], c1, p.i_label == 1 ? 12 : 0));
                p.values.push_back(slot(r4, c2, 12));
            }
            return p;
        }
        return fail();
    }

    // ----- placement of the 3-primary ranks -----

    struct Option {
        int block;
        int kind;      // 0 = existing value slot, 1 = attach a free row,
                       // 2 = standalone from free lines, 3 = attach a free
                       // second-stripe column to a shape with a stripe-4
                       // pivot, 4 = absorb a torsion single into such a shape
        int comp = -1; // kind 0/1/3/4
        int value_idx = 0;
        int row_stripe = -1; // consumed free row stripe (kind 1/2)
        int col_stripe = -1; // consumed free col stripe (kind 2/3)
        int comp2 = -1;      // absorbed single (kind 4)
    };

    DescriptorList best_;
    bool has_best_ = false;

    DescriptorList assemble() {
        std::vector<SummandPlan> plans;
        plans.reserve(comps_.size());
        for (const auto& comp : comps_) plans.push_back(classify(comp));

        // available conversion/standalone resources
        std::vector<int> free_rows_by_stripe(e_.spec->rows(), 0);
        for (int r : free_rows_) ++free_rows_by_stripe[rstripe(r)];
        std::vector<int> free_cols_by_stripe(e_.spec->cols(), 0);
        for (int c : free_cols_) ++free_cols_by_stripe[cstripe(c)];

        std::vector<Option> options;
        for (size_t pi = 0; pi < plans.size(); ++pi) {
            auto& p = plans[pi];
            for (size_t vi = 0; vi < p.values.size(); ++vi)
                if (p.values[vi].block >= 0)
                    options.push_back({p.values[vi].block, 0, static_cast<int>(pi),
                                       static_cast<int>(vi), -1, -1});
            // conversions: a single over a mod-2 cell gains a torsion row and
            // becomes a coupled pair; the one-parameter two-column shapes
            // gain a first-column row
            if (p.kind == 0 && p.values[0].mod == 2) {
                if (p.sup == 1 && (p.i_label == 4 || p.i_label == 6))
                    for (int s = 0; s < 3; ++s)
                        options.push_back({0, 1, static_cast<int>(pi), 0, s, -1, -1});
                if (p.sup == 2 && (p.i_label == 6 || p.i_label == 7))
                    for (int s = 3; s < 5; ++s)
                        options.push_back({1, 1, static_cast<int>(pi), 0, s, -1, -1});
            }
            if (p.kind == 2 || p.kind == 3)
                for (int s = 0; s < 3; ++s)
                    options.push_back({0, 1, static_cast<int>(pi), 0, s, -1, -1});
            // shapes whose 2-part keeps only the stripe-4 pivot can regain the
            // second-stripe value position through a fresh column or by
            // absorbing a torsion single standing on one
            bool four_pivot = (p.kind == 0 && p.sup == 1 && p.i_label == 4) ||
                              (p.kind == 1 && p.sup == 1 && p.l_label == 4);
            if (four_pivot) {
                options.push_back({1, 3, static_cast<int>(pi), 0, -1, 1, -1});
                for (size_t qi = 0; qi < plans.size(); ++qi) {
                    const auto& q = plans[qi];
                    if (qi != pi && q.kind == 0 && q.sup == 2 &&
                        (q.i_label == 6 || q.i_label == 7))
                        options.push_back({1, 4, static_cast<int>(pi), 0, -1, -1,
                                           static_cast<int>(qi)});
                }
            }
        }
        for (int s = 0; s < e_.spec->rows(); ++s) {
            int b = s <= 2 ? 0 : (u2_ && (s == 3 || s == 4)) ? 1 : -1;
            if (b < 0) continue;
            options.push_back({b, 2, -1, 0, s, b == 0 ? 0 : 1, -1});
        }

        std::vector<int> used_value(plans.size() * 4 + 4, 0);
        std::vector<int> conv_row(plans.size() + 1, 0), conv_col(plans.size() + 1, 0),
            merged(plans.size() + 1, 0);
        recurse(plans, options, 0, rank3_[0], rank3_[1], free_rows_by_stripe, free_cols_by_stripe,
                used_value, conv_row, conv_col, merged, {});
        if (!has_best_) throw domain_error(errc::spec_mismatch, "no consistent reassembly");
        return best_;
    }

    void recurse(std::vector<SummandPlan>& plans, const std::vector<Option>& options, size_t oi,
                 int needA, int needB, std::vector<int>& frows, std::vector<int>& fcols,
                 std::vector<int>& used_value, std::vector<int>& conv_row,
                 std::vector<int>& conv_col, std::vector<int>& merged,
                 std::vector<Option> chosen) {
        if (needA == 0 && needB == 0) {
            finish(plans, chosen);
            return;
        }
        if (oi >= options.size()) return;
        const Option& o = options[oi];
        // skip this option
        recurse(plans, options, oi + 1, needA, needB, frows, fcols, used_value, conv_row, conv_col,
                merged, chosen);
        int& need = o.block == 0 ? needA : needB;
        if (need == 0) return;
        auto take = [&](bool repeatable) {
            --need;
            chosen.push_back(o);
            recurse(plans, options, oi + (repeatable ? 0 : 1), needA, needB, frows, fcols,
                    used_value, conv_row, conv_col, merged, chosen);
            chosen.pop_back();
            ++need;
        };
        // feasibility and resource accounting
        if (o.kind == 0) {
            int id = o.comp * 4 + o.value_idx;
            if (used_value[id]) return;
            used_value[id] = 1;
            take(false);
            used_value[id] = 0;
        } else if (o.kind == 1) {
            if (conv_row[o.comp] || merged[o.comp] || frows[o.row_stripe] == 0) return;
            conv_row[o.comp] = 1;
            --frows[o.row_stripe];
            take(false);
            ++frows[o.row_stripe];
            conv_row[o.comp] = 0;
        } else if (o.kind == 2) {
            if (frows[o.row_stripe] == 0 || fcols[o.col_stripe] == 0) return;
            --frows[o.row_stripe];
            --fcols[o.col_stripe];
            // the same standalone option may be taken repeatedly
            take(true);
            ++frows[o.row_stripe];
            ++fcols[o.col_stripe];
        } else if (o.kind == 3) {
            if (conv_col[o.comp] || fcols[o.col_stripe] == 0) return;
            conv_col[o.comp] = 1;
            --fcols[o.col_stripe];
            take(false);
            ++fcols[o.col_stripe];
            conv_col[o.comp] = 0;
        } else {
            if (conv_col[o.comp] || merged[o.comp2] || conv_row[o.comp2] || used_value[o.comp2 * 4])
                return;
            conv_col[o.comp] = 1;
            merged[o.comp2] = 1;
            take(false);
            merged[o.comp2] = 0;
            conv_col[o.comp] = 0;
        }
    }

    // materialize one placement choice: consume actual free lines, mutate the
    // affected plans, then normalize units over the result
    void finish(const std::vector<SummandPlan>& base, const std::vector<Option>& chosen) {
        std::vector<SummandPlan> plans = base;
        std::vector<std::vector<int>> rq(e_.spec->rows()), cq(e_.spec->cols());
        for (int r : free_rows_) rq[rstripe(r)].push_back(r);
        for (int c : free_cols_) cq[cstripe(c)].push_back(c);
        auto pop = [](std::vector<int>& q) {
            int id = q.back();
            q.pop_back();
            return id;
        };
        // column attachments first: they may turn a single into a v44-style
        // shape that a row attachment then upgrades further
        for (int phase = 0; phase < 2; ++phase)
            for (const auto& o : chosen) {
                bool col_phase = o.kind == 3 || o.kind == 4;
                if (col_phase != (phase == 0)) continue;
                if (o.kind == 0) {
                    plans[o.comp].values[o.value_idx].three = true;
                    continue;
                }
                ValueSlot s;
                s.three = true;
                s.v2 = 0;
                s.block = o.block;
                if (o.kind == 3 || o.kind == 4) {
                    SummandPlan& p = plans[o.comp];
                    // the stripe-4 pivot row recorded during classification
                    s.line_r = p.pivot4_line;
                    if (o.kind == 3)
                        s.line_c = R_ + pop(cq[o.col_stripe]);
                    else {
                        SummandPlan& q = plans[o.comp2];
                        s.line_c = q.values[0].line_c;
                        q.dead = true;
                    }
                    s.mod = 24;
                    s.shift = 12;
                    int l_new = o.kind == 3 ? 4 : plans[o.comp2].i_label;
                    if (p.kind == 0) {
                        p.kind = l_new == 4 ? 2 : 3;
                        p.c1_line = p.values[0].line_c;
                        p.l_label = l_new;
                        p.i_label = 0;
                        p.values.insert(p.values.begin(), s);
                    } else {
                        p.kind = l_new == 4 ? 4 : 5;
                        p.c1_line = p.values[0].line_c;
                        p.l_label = l_new;
                        p.values.push_back(s);
                    }
                    continue;
                }
                if (o.kind == 1) {
                    int new_label = std::stoi(e_.spec->row_labels[o.row_stripe]);
                    SummandPlan& p = plans[o.comp];
                    s.line_r = pop(rq[o.row_stripe]);
                    if (p.kind == 0) {
                        // single over a torsion cell becomes a coupled pair
                        p.kind = 1;
                        p.l_label = p.i_label;
                        p.i_label = new_label;
                        s.line_c = p.values[0].line_c;
                        s.mod = (new_label == 1 || new_label == 4) ? 24 : 12;
                        s.shift = shift_of_coupled(p.sup, p.i_label, p.l_label);
                    } else {
                        // the one-parameter two-column shapes gain the lead row
                        p.kind = p.kind == 2 ? 4 : 5;
                        p.i_label = new_label;
                        s.line_c = p.c1_line;
                        s.mod = new_label == 1 ? 24 : 12;
                        s.shift = new_label == 1 ? 12 : 0;
                    }
                    p.values.insert(p.values.begin(), s);
                    continue;
                }
                // standalone single on fresh lines
                int new_label = std::stoi(e_.spec->row_labels[o.row_stripe]);
                SummandPlan p;
                p.kind = 0;
                p.sup = o.col_stripe + 1;
                p.i_label = new_label;
                s.line_r = pop(rq[o.row_stripe]);
                s.line_c = R_ + pop(cq[o.col_stripe]);
                s.mod = e_.spec->cell(o.row_stripe, o.col_stripe).modulus;
                s.shift = 0;
                p.values.push_back(s);
                plans.push_back(p);
            }
        DescriptorList fixed;
        for (int s = 0; s < e_.spec->rows(); ++s)
            for (size_t k = 0; k < rq[s].size(); ++k)
                fixed.push_back(make_empty_row(e_.spec->row_labels[s]));
        for (int s = 0; s < e_.spec->cols(); ++s)
            for (size_t k = 0; k < cq[s].size(); ++k)
                fixed.push_back(make_empty_col(e_.spec->col_labels[s]));
        normalize_units(plans, fixed);
    }

    // --- unit normalization ---------------------------------------------
    // Line scalings by odd units decompose as sign times an element of the
    // subgroup {1,5,7,11} of U(24), an F2-plane.  Signs are free per line
    // (folded into the value canonicalization); the plane parts multiply to 1
    // over each communicating stripe class unless the class owns a line with
    // no entries above Z/2, which absorbs any unit.  The achievable
    // effective-unit tuples on the value slots form an F2-subspace; it is
    // enumerated and the least resulting descriptor multiset is kept.

    static i64 unit_of_bits(int b) { return b == 0 ? 1 : b == 1 ? 5 : b == 2 ? 7 : 11; }

    std::vector<std::vector<int>> row_classes() const {
        if (u2_) return {{0, 1, 2}, {3, 4}, {5}, {6}};
        return {{0, 1, 2}, {3}, {4}};
    }
    std::vector<std::vector<int>> col_classes() const {
        if (u2_) return {{0}, {1}};
        return {{0}};
    }

    void normalize_units(const std::vector<SummandPlan>& plans, const DescriptorList& fixed) {
        std::vector<std::pair<int, int>> vslots; // (plan, value) of the mod>2 slots
        std::map<int, int> var;                  // active line id -> variable index
        for (size_t pi = 0; pi < plans.size(); ++pi)
            for (size_t vi = 0; vi < plans[pi].values.size(); ++vi) {
                if (plans[pi].dead) continue;
                const ValueSlot& s = plans[pi].values[vi];
                if (s.mod <= 2) continue;
                vslots.push_back({static_cast<int>(pi), static_cast<int>(vi)});
                if (!var.count(s.line_r)) var.emplace(s.line_r, static_cast<int>(var.size()));
                if (!var.count(s.line_c)) var.emplace(s.line_c, static_cast<int>(var.size()));
            }
        int k = static_cast<int>(vslots.size());

        std::vector<int> act_row(e_.spec->rows(), 0), act_col(e_.spec->cols(), 0);
        for (const auto& [line, v] : var) {
            (void)v;
            if (line < R_)
                ++act_row[rstripe(line)];
            else
                ++act_col[cstripe(line - R_)];
        }

        std::vector<uint64_t> constraints;
        auto add_class = [&](const std::vector<int>& cls, bool row) {
            for (int s : cls) {
                int total = row ? e_.row_sizes[s] : e_.col_sizes[s];
                if ((row ? act_row[s] : act_col[s]) < total) return; // absorber present
            }
            uint64_t m = 0;
            for (const auto& [line, v] : var) {
                bool is_row = line < R_;
                if (is_row != row) continue;
                int s = is_row ? rstripe(line) : cstripe(line - R_);
                if (std::find(cls.begin(), cls.end(), s) == cls.end()) continue;
                m |= uint64_t(3) << (2 * v);
            }
            if (m) {
                constraints.push_back(m & 0x5555555555555555ull);
                constraints.push_back(m & 0xaaaaaaaaaaaaaaaaull);
            }
        };
        for (const auto& cls : row_classes()) add_class(cls, true);
        for (const auto& cls : col_classes()) add_class(cls, false);

        // achievable effective-unit tuples = image of the constraint kernel
        std::vector<uint64_t> kernel = f2_kernel(constraints, 2 * static_cast<int>(var.size()));
        std::vector<uint64_t> images;
        for (uint64_t kv : kernel) {
            uint64_t img = 0;
            for (int s = 0; s < k; ++s) {
                const ValueSlot& vs = plans[vslots[s].first].values[vslots[s].second];
                int vr = var[vs.line_r], vc = var[vs.line_c];
                uint64_t bits = ((kv >> (2 * vr)) ^ (kv >> (2 * vc))) & 3;
                img |= bits << (2 * s);
            }
            images.push_back(img);
        }
        std::vector<uint64_t> basis = f2_reduce(images);

        // the block determinant, when pinned, sits on one assigned pivot
        std::vector<int> delta_slots[2];
        for (int s = 0; s < k; ++s) {
            const ValueSlot& vs = plans[vslots[s].first].values[vslots[s].second];
            if (vs.three && vs.block >= 0) delta_slots[vs.block].push_back(s);
        }
        std::vector<int> dchoice[2];
        for (int b = 0; b < 2; ++b) {
            dchoice[b] = {-1};
            if (!tight_[b]) continue;
            // determinant-one transformations pin the product of the pivot
            // values times the sign of the pivot matching; compare the block
            // determinant against the parity of this placement
            std::vector<std::pair<int, int>> piv;
            for (int s : delta_slots[b]) {
                const ValueSlot& vs = plans[vslots[s].first].values[vslots[s].second];
                piv.push_back({vs.line_r, vs.line_c});
            }
            std::sort(piv.begin(), piv.end());
            int inv = 0;
            for (size_t a = 0; a < piv.size(); ++a)
                for (size_t bb = a + 1; bb < piv.size(); ++bb)
                    if (piv[a].second > piv[bb].second) ++inv;
            int eff = det3_[b];
            if (inv % 2) eff = eff == 1 ? 2 : 1;
            if (eff == 2) {
                if (delta_slots[b].empty())
                    throw domain_error(errc::spec_mismatch, "determinant without a pivot slot");
                dchoice[b] = delta_slots[b];
            }
        }

        size_t n = basis.size();
        for (int d0 : dchoice[0])
            for (int d1 : dchoice[1])
                for (uint64_t sel = 0; sel < (uint64_t(1) << n); ++sel) {
                    uint64_t tuple = 0;
                    for (size_t b = 0; b < n; ++b)
                        if ((sel >> b) & 1) tuple ^= basis[b];
                    DescriptorList cand = fixed;
                    bool ok = true;
                    for (size_t pi = 0; pi < plans.size() && ok; ++pi) {
                        if (plans[pi].dead) continue;
                        std::vector<i64> vals;
                        for (size_t vi = 0; vi < plans[pi].values.size() && ok; ++vi) {
                            const ValueSlot& s = plans[pi].values[vi];
                            if (s.mod <= 2) {
                                vals.push_back(1);
                                continue;
                            }
                            int idx = -1;
                            for (int q = 0; q < k; ++q)
                                if (vslots[q] ==
                                    std::make_pair(static_cast<int>(pi), static_cast<int>(vi)))
                                    idx = q;
                            i64 u = unit_of_bits(static_cast<int>((tuple >> (2 * idx)) & 3));
                            i64 v3 = s.three ? (idx == d0 || idx == d1 ? 2 : 1) : 0;
                            i64 base = s.mod % 3 == 0
                                           ? crt_recombine(Residue(two_part_mod(s.mod), s.v2),
                                                           Residue(3, v3))
                                                 .value
                                           : s.v2;
                            i64 canon = canonical_value(reduce_mod(u * base, s.mod), s.mod, s.shift);
                            if (canon == 0) ok = false;
                            vals.push_back(canon);
                        }
                        if (ok) cand.push_back(plan_descriptor(plans[pi], vals));
                    }
                    if (!ok) continue;
                    std::sort(cand.begin(), cand.end());
                    if (!has_best_ || cand < best_) {
                        best_ = cand;
                        has_best_ = true;
                    }
                }
    }

    static i64 canonical_value(i64 v, i64 mod, i64 shift) {
        i64 best = -1;
        int steps = shift == 0 ? 1 : static_cast<int>(mod / shift);
        for (int k = 0; k < steps; ++k) {
            i64 x = reduce_mod(v + k * (shift == 0 ? 0 : shift), mod);
            for (i64 y : {x, reduce_mod(mod - x, mod)})
                if (y != 0 && (best < 0 || y < best)) best = y;
        }
        if (best < 0) return 0;
        return best;
    }

    IndecDescriptor plan_descriptor(const SummandPlan& p, const std::vector<i64>& vals) const {
        if (u2_) {
            switch (p.kind) {
            case 0:
                return make_l2(p.sup, p.i_label, 0, vals[0]);
            case 1:
                return make_l2(p.sup, p.i_label, p.l_label, vals[0]);
            case 2:
                return make_l2(0, 4, 4, vals[0]);
            case 3:
                return make_l2(0, 4, p.l_label, vals[0]);
            case 4:
                return make_l2_pair(p.i_label, 4, vals[0], vals[1]);
            default:
                return make_l2_pair(p.i_label, p.l_label, vals[0], vals[1]);
            }
        }
        if (p.kind == 0) return make_l1(p.i_label, 0, vals[0]);
        return make_l1(p.i_label, p.l_label, vals[0]);
    }

    // --- tiny F2 helpers -------------------------------------------------
    static std::vector<uint64_t> f2_reduce(std::vector<uint64_t> vecs) {
        std::vector<uint64_t> basis;
        for (uint64_t v : vecs) {
            for (uint64_t b : basis) v = std::min(v, v ^ b);
            if (v) basis.push_back(v);
        }
        return basis;
    }
    static std::vector<uint64_t> f2_kernel(const std::vector<uint64_t>& rows, int nvars) {
        // Gaussian elimination over the constraint rows; kernel basis by
        // back-substitution on free variables
        std::vector<uint64_t> r = rows;
        std::vector<int> pivot_col;
        size_t rank = 0;
        for (int c = 0; c < nvars && rank < r.size(); ++c) {
            size_t p = rank;
            while (p < r.size() && !((r[p] >> c) & 1)) ++p;
            if (p == r.size()) continue;
            std::swap(r[rank], r[p]);
            for (size_t q = 0; q < r.size(); ++q)
                if (q != rank && ((r[q] >> c) & 1)) r[q] ^= r[rank];
            pivot_col.push_back(c);
            ++rank;
        }
        std::vector<uint64_t> kernel;
        std::vector<bool> is_pivot(nvars, false);
        for (int c : pivot_col) is_pivot[c] = true;
        for (int c = 0; c < nvars; ++c) {
            if (is_pivot[c]) continue;
            uint64_t v = uint64_t(1) << c;
            for (size_t q = 0; q < rank; ++q)
                if ((r[q] >> c) & 1) v |= uint64_t(1) << pivot_col[q];
            kernel.push_back(v);
        }
        return kernel;
    }
};

} // namespace detail

inline DescriptorList reduce_U1(const Element& e) {
    if (e.spec->id != "U1") throw domain_error(errc::spec_mismatch, "reduce_U1 expects U1");
    return detail::UEngine(e).run();
}

inline DescriptorList reduce_U2(const Element& e) {
    if (e.spec->id != "U2") throw domain_error(errc::spec_mismatch, "reduce_U2 expects U2");
    return detail::UEngine(e).run();
}

} // namespace hotype
