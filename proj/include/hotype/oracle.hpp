#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hotype/bimodule.hpp"
#include "hotype/errors.hpp"
#include "hotype/transform.hpp"

namespace hotype {

// ---------------------------------------------------------------------------
// Orbit exploration by exhaustive BFS over a finite generator set.  States are
// flattened entry vectors of a fixed shape; generators are lists of in-place
// entry updates, each reading the pre-update state.
// ---------------------------------------------------------------------------

using State = std::vector<i64>;

enum class UpdKind { add_scaled, negate };

struct GenUpdate {
    UpdKind kind = UpdKind::add_scaled;
    int dst = 0;
    int src = 0;
    i64 coeff = 0;
    i64 mod = 0; // modulus of the destination cell (0 = Z)
    bool star = false;
};

struct GenOp {
    std::vector<GenUpdate> updates;
};

inline State flatten(const Element& e) {
    State s;
    s.reserve(static_cast<size_t>(e.total_rows()) * e.total_cols());
    for (const auto& row : e.entries)
        for (const auto& v : row) s.push_back(v.value);
    return s;
}

inline Element unflatten(const Element& shape, const State& s) {
    Element e = make_zero_element(shape.spec, shape.row_sizes, shape.col_sizes);
    size_t k = 0;
    for (int r = 0; r < e.total_rows(); ++r)
        for (int c = 0; c < e.total_cols(); ++c)
            e.entries[r][c] = Residue(e.entries[r][c].modulus, s[k++]);
    return e;
}

inline void apply_gen(const GenOp& g, const State& in, State& out) {
    out = in;
    for (const auto& u : g.updates) {
        i64 v = in[u.src];
        i64 add;
        if (u.kind == UpdKind::negate)
            add = -2 * v;
        else if (u.star && u.mod == 2)
            add = (u.coeff / 12) * v;
        else
            add = u.coeff * v;
        out[u.dst] = reduce_mod(out[u.dst] + add, u.mod);
    }
}

namespace detail {

struct StateHash {
    size_t operator()(const State& s) const {
        size_t h = 1469598103934665603ull;
        for (i64 v : s) {
            h ^= static_cast<size_t>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

} // namespace detail

// Generators of the transformation group image on elements of this shape:
// pattern-legal elementary additions (coefficients over a complete residue
// system mod 24 for finite cells, +-d where a Z cell is involved) plus sign
// flips of single rows and columns.
inline std::vector<GenOp> ring_generators(const Element& e) {
    std::vector<GenOp> gens;
    int R = e.total_rows(), C = e.total_cols();
    const BimoduleSpec& sp = *e.spec;

    auto row_has_z_cell = [&](int stripe) {
        for (int cs = 0; cs < sp.cols(); ++cs)
            if (sp.cell(stripe, cs).modulus == 0) return true;
        return false;
    };
    auto col_has_z_cell = [&](int stripe) {
        for (int rs = 0; rs < sp.rows(); ++rs)
            if (sp.cell(rs, stripe).modulus == 0) return true;
        return false;
    };

    auto coeff_set = [](i64 d, bool has_z) {
        std::vector<i64> cs;
        if (has_z) {
            cs = {d, -d};
        } else {
            for (i64 c = d; c < 24; c += d)
                cs.push_back(c);
        }
        return cs;
    };

    // row r += c * row s
    for (int r = 0; r < R; ++r)
        for (int s = 0; s < R; ++s) {
            if (r == s) continue;
            int rs = e.row_stripe(r), ss = e.row_stripe(s);
            i64 d = sp.row_ring.d[rs][ss];
            if (d == 0) continue;
            bool star = sp.row_ring.starred(rs + 1, ss + 1);
            bool has_z = row_has_z_cell(rs) || row_has_z_cell(ss);
            for (i64 c : coeff_set(d, has_z)) {
                GenOp op;
                for (int col = 0; col < C; ++col) {
                    int cs2 = e.col_stripe(col);
                    const Cell& to = sp.cell(rs, cs2);
                    const Cell& from = sp.cell(ss, cs2);
                    if (to.is_zero_cell() || from.is_zero_cell()) continue;
                    i64 eff = to.modulus == 0 ? c : reduce_mod(c, to.modulus);
                    if (!star && eff == 0 && to.modulus != 0) continue;
                    op.updates.push_back({UpdKind::add_scaled, r * C + col, s * C + col, c,
                                          to.modulus, star});
                }
                if (!op.updates.empty()) gens.push_back(std::move(op));
            }
        }
    // col c += q * col b
    for (int b = 0; b < C; ++b)
        for (int c = 0; c < C; ++c) {
            if (b == c) continue;
            int bs = e.col_stripe(b), cs = e.col_stripe(c);
            i64 d = sp.col_ring.d[bs][cs];
            if (d == 0) continue;
            bool star = sp.col_ring.starred(bs + 1, cs + 1);
            bool has_z = col_has_z_cell(bs) || col_has_z_cell(cs);
            for (i64 q : coeff_set(d, has_z)) {
                GenOp op;
                for (int r = 0; r < R; ++r) {
                    int rs = e.row_stripe(r);
                    const Cell& to = sp.cell(rs, cs);
                    const Cell& from = sp.cell(rs, bs);
                    if (to.is_zero_cell() || from.is_zero_cell()) continue;
                    i64 eff = to.modulus == 0 ? q : reduce_mod(q, to.modulus);
                    if (!star && eff == 0 && to.modulus != 0) continue;
                    op.updates.push_back({UpdKind::add_scaled, r * C + c, r * C + b, q,
                                          to.modulus, star});
                }
                if (!op.updates.empty()) gens.push_back(std::move(op));
            }
        }
    // sign flips
    for (int r = 0; r < R; ++r) {
        GenOp op;
        for (int col = 0; col < C; ++col) {
            const Cell& cell = e.spec->cell(e.row_stripe(r), e.col_stripe(col));
            if (cell.is_zero_cell() || cell.modulus == 2) continue;
            op.updates.push_back({UpdKind::negate, r * C + col, r * C + col, 0, cell.modulus, false});
        }
        if (!op.updates.empty()) gens.push_back(std::move(op));
    }
    for (int c = 0; c < C; ++c) {
        GenOp op;
        for (int r = 0; r < R; ++r) {
            const Cell& cell = e.spec->cell(e.row_stripe(r), e.col_stripe(c));
            if (cell.is_zero_cell() || cell.modulus == 2) continue;
            op.updates.push_back({UpdKind::negate, r * C + c, r * C + c, 0, cell.modulus, false});
        }
        if (!op.updates.empty()) gens.push_back(std::move(op));
    }
    return gens;
}

struct OrbitKey {
    Element canonical;

    bool operator==(const OrbitKey& o) const { return canonical == o.canonical; }
};

// BFS closure of one state.  The generator set contains inverses (negative /
// complementary coefficients and self-inverse flips), so the closure is the
// full orbit.  Entries in Z cells are capped at |v| <= z_cap; states beyond
// the cap are not expanded (relevant for SPH / DIM5 integer blocks only).
struct OrbitResult {
    State canonical;
    std::vector<State> members;
};

inline OrbitResult orbit_bfs(const State& start, const std::vector<GenOp>& gens, size_t budget,
                             i64 z_cap) {
    std::unordered_set<State, detail::StateHash> visited;
    std::deque<State> frontier;
    visited.insert(start);
    frontier.push_back(start);
    State best = start;
    State next;
    while (!frontier.empty()) {
        State cur = std::move(frontier.front());
        frontier.pop_front();
        for (const auto& g : gens) {
            apply_gen(g, cur, next);
            bool in_cap = true;
            for (const auto& u : g.updates)
                if (u.mod == 0 && (next[u.dst] > z_cap || next[u.dst] < -z_cap)) in_cap = false;
            if (!in_cap) continue;
            if (visited.insert(next).second) {
                if (visited.size() > budget)
                    throw domain_error(errc::budget_exceeded,
                                       "orbit exceeds " + std::to_string(budget) + " states");
                if (next < best) best = next;
                frontier.push_back(next);
            }
        }
    }
    OrbitResult res;
    res.canonical = std::move(best);
    res.members.assign(visited.begin(), visited.end());
    return res;
}

// Orbit canonicalization with a shared cache: each orbit is explored once and
// all its members are mapped to the canonical representative.
class OrbitCache {
public:
    OrbitCache(std::vector<GenOp> gens, size_t budget = 2'000'000, i64 z_cap = 4096)
        : gens_(std::move(gens)), budget_(budget), z_cap_(z_cap) {}

    const State& canonical(const State& s) {
        auto it = cache_.find(s);
        if (it != cache_.end()) return canon_[it->second];
        OrbitResult res = orbit_bfs(s, gens_, budget_, z_cap_);
        canon_.push_back(res.canonical);
        size_t id = canon_.size() - 1;
        for (auto& m : res.members) cache_.emplace(std::move(m), id);
        orbit_sizes_.push_back(res.members.size());
        return canon_[id];
    }

    size_t orbit_size(const State& s) {
        canonical(s);
        return orbit_sizes_[cache_.at(s)];
    }

    // All members of the orbit of s (explores if needed).
    std::vector<State> members(const State& s) {
        canonical(s);
        size_t id = cache_.at(s);
        std::vector<State> out;
        for (const auto& [st, oid] : cache_)
            if (oid == id) out.push_back(st);
        return out;
    }

    size_t orbit_count() const { return canon_.size(); }

private:
    std::vector<GenOp> gens_;
    size_t budget_;
    i64 z_cap_;
    std::unordered_map<State, size_t, detail::StateHash> cache_;
    std::vector<State> canon_;
    std::vector<size_t> orbit_sizes_;
};

inline OrbitKey orbit_canonical(const Element& e, size_t budget = 2'000'000) {
    auto res = orbit_bfs(flatten(e), ring_generators(e), budget, 4096);
    return OrbitKey{unflatten(e, res.canonical)};
}

// Direct-sum split test: an element is decomposable iff its rows+columns admit
// a bipartition into two non-empty parts with no entry crossing.  The zero
// 0x... object conventions: an all-zero element with at least two lines is
// decomposable; a single row or single column alone is an empty object.
inline bool is_split(const Element& e) {
    int R = e.total_rows(), C = e.total_cols();
    int n = R + C;
    if (n <= 1) return false;
    // iterate proper bipartitions; fix line 0 in part A
    for (unsigned bits = 1; bits < (1u << (n - 1)); ++bits) {
        // part B = lines with bit set (line 0 never in B)
        auto in_b = [&](int line) { return line > 0 && ((bits >> (line - 1)) & 1u); };
        bool ok = true;
        for (int r = 0; r < R && ok; ++r)
            for (int c = 0; c < C && ok; ++c)
                if (!e.at(r, c).is_zero() && in_b(r) != in_b(R + c)) ok = false;
        if (ok) return true;
    }
    return false;
}

inline bool orbit_has_split(OrbitCache& cache, const Element& shape, const State& s) {
    for (const auto& m : cache.members(s)) {
        Element e = unflatten(shape, m);
        if (is_split(e)) return true;
    }
    return false;
}

} // namespace hotype
