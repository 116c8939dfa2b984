#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "hotype/errors.hpp"
#include "hotype/residue.hpp"
#include "hotype/tiled_ring.hpp"

namespace hotype {

// One cell of a bimodule grid.  modulus == 0 is the infinite cyclic group Z,
// modulus == 1 is the zero group (entries forced to 0).
struct Cell {
    i64 modulus = 1;
    bool starred = false;

    bool is_zero_cell() const { return modulus == 1; }
};

// A grid of residue-group cells together with tiled orders acting on the row
// and column stripes.  Elements over the spec are block matrices with entries
// in the cells.
struct BimoduleSpec {
    std::string id;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<Cell>> cells; // [row_stripe][col_stripe]
    TiledRing row_ring;
    TiledRing col_ring;
    // W's transformation calculus is not a tiled order; specs with this flag
    // use the admissible-transformation generators from words.hpp instead.
    bool ring_transforms = true;

    int rows() const { return static_cast<int>(row_labels.size()); }
    int cols() const { return static_cast<int>(col_labels.size()); }

    const Cell& cell(int rs, int cs) const { return cells[rs][cs]; }

    int row_index(const std::string& label) const {
        for (int i = 0; i < rows(); ++i)
            if (row_labels[i] == label) return i;
        throw domain_error(errc::entry_out_of_grid, "unknown row stripe " + label);
    }
    int col_index(const std::string& label) const {
        for (int j = 0; j < cols(); ++j)
            if (col_labels[j] == label) return j;
        throw domain_error(errc::entry_out_of_grid, "unknown column stripe " + label);
    }
};

using SpecPtr = std::shared_ptr<const BimoduleSpec>;

namespace detail {

inline TiledRing u2_row_ring() {
    return validate_tiled_ring(
        {
            {1, 2, 2, 12, 24, 12, 24},
            {1, 1, 1, 12, 24, 6, 24},
            {1, 2, 1, 12, 24, 12, 24},
            {0, 0, 0, 1, 2, 12, 12},
            {0, 0, 0, 1, 1, 12, 6},
            {0, 0, 0, 0, 0, 1, 1},
            {0, 0, 0, 0, 0, 0, 1},
        },
        {{4, 6}});
}

inline TiledRing u2_col_ring() {
    return validate_tiled_ring({{1, 12}, {0, 1}}, {{1, 2}});
}

// Rows {1,2,3,4,6} of the 7-stripe order, i.e. the order acting on the
// single-column problem.
inline TiledRing u1_row_ring() {
    return validate_tiled_ring(
        {
            {1, 2, 2, 12, 12},
            {1, 1, 1, 12, 6},
            {1, 2, 1, 12, 12},
            {0, 0, 0, 1, 12},
            {0, 0, 0, 0, 1},
        },
        {{4, 5}});
}

} // namespace detail

inline SpecPtr make_sph_spec() {
    auto s = std::make_shared<BimoduleSpec>();
    s->id = "SPH";
    s->row_labels = {"1"};
    s->col_labels = {"1"};
    s->cells = {{Cell{0, false}}};
    s->row_ring = identity_ring(1);
    s->col_ring = identity_ring(1);
    return s;
}

// Columns F4 | F3 | G_1 .. G_4: one integer column block and mod-2 blocks for
// the Hopf-map coordinates.  Column stripe j can be added into stripe k when
// a morphism of the underlying wedge summands induces a non-zero map, namely
// F4 -> F3, F4 -> G_r, F3 -> G_r and G_r -> G_t (either direction).
inline SpecPtr make_dim5_spec(int max_r = 4) {
    auto s = std::make_shared<BimoduleSpec>();
    s->id = "DIM5";
    s->row_labels = {"rows"};
    s->col_labels = {"F4", "F3"};
    for (int r = 1; r <= max_r; ++r) s->col_labels.push_back("G" + std::to_string(r));
    int n = s->cols();
    s->cells.assign(1, std::vector<Cell>(n));
    s->cells[0][0] = Cell{0, false};
    for (int j = 1; j < n; ++j) s->cells[0][j] = Cell{2, false};
    std::vector<std::vector<i64>> d(n, std::vector<i64>(n, 0));
    for (int i = 0; i < n; ++i) d[i][i] = 1;
    d[0][1] = 1;                       // F4 -> F3
    for (int j = 2; j < n; ++j) {
        d[0][j] = 1;                   // F4 -> G_r
        d[1][j] = 1;                   // F3 -> G_r
        for (int k = 2; k < n; ++k)
            if (j != k) d[j][k] = 1;   // G_r <-> G_t
    }
    s->row_ring = identity_ring(1);
    s->col_ring = validate_tiled_ring(std::move(d));
    return s;
}

inline SpecPtr make_u1_spec() {
    auto s = std::make_shared<BimoduleSpec>();
    s->id = "U1";
    s->row_labels = {"1", "2", "3", "4", "6"};
    s->col_labels = {"1"};
    s->cells = {
        {Cell{24, false}},
        {Cell{12, false}},
        {Cell{12, false}},
        {Cell{2, false}},
        {Cell{2, true}},
    };
    s->row_ring = detail::u1_row_ring();
    s->col_ring = identity_ring(1);
    return s;
}

inline SpecPtr make_u2_spec() {
    auto s = std::make_shared<BimoduleSpec>();
    s->id = "U2";
    s->row_labels = {"1", "2", "3", "4", "5", "6", "7"};
    s->col_labels = {"1", "2"};
    auto c = [](i64 m, bool st = false) { return Cell{m, st}; };
    s->cells = {
        {c(24), c(1)},
        {c(12), c(1)},
        {c(12), c(1)},
        {c(2), c(24)},
        {c(1), c(12)},
        {c(2, true), c(2)},
        {c(1), c(2)},
    };
    s->row_ring = detail::u2_row_ring();
    s->col_ring = detail::u2_col_ring();
    return s;
}

// The dimension-7 grid.  Row stripes in display order *_1 .. *_P, *_inf,
// _inf*, _P* .. _1*; column stripes ^1* .. ^P*, ^inf*, *^inf, *^P .. *^1.
inline SpecPtr make_w_spec(int max_param = 4) {
    auto s = std::make_shared<BimoduleSpec>();
    s->id = "W";
    for (int t = 1; t <= max_param; ++t) s->row_labels.push_back("*_" + std::to_string(t));
    s->row_labels.push_back("*_inf");
    s->row_labels.push_back("_inf*");
    for (int t = max_param; t >= 1; --t) s->row_labels.push_back("_" + std::to_string(t) + "*");
    for (int r = 1; r <= max_param; ++r) s->col_labels.push_back("^" + std::to_string(r) + "*");
    s->col_labels.push_back("^inf*");
    s->col_labels.push_back("*^inf");
    for (int r = max_param; r >= 1; --r) s->col_labels.push_back("*^" + std::to_string(r));

    auto modulus = [&](const std::string& row, const std::string& col) -> i64 {
        bool row_upper = row[0] == '*';            // *_t family
        bool row_inf_z = row == "_inf*";
        bool col_left = col[0] == '^';             // ^r* family
        bool col_inf_z = col == "^inf*";
        if (row_upper) {
            if (col_left) {
                if (row == "*_1") return 2;
                return col == "^1*" ? 4 : 2;
            }
            if (row == "*_1") return 1;
            return col == "*^1" ? 1 : 2;
        }
        if (row_inf_z) {
            if (col_left) return col_inf_z ? 0 : 1;
            return 2;
        }
        // finite _t* rows
        if (col_left) return 1;
        if (row == "_1*") return col == "*^1" ? 2 : 4;
        return 2;
    };
    s->cells.assign(s->rows(), std::vector<Cell>(s->cols()));
    for (int i = 0; i < s->rows(); ++i)
        for (int j = 0; j < s->cols(); ++j)
            s->cells[i][j] = Cell{modulus(s->row_labels[i], s->col_labels[j]), false};
    s->row_ring = identity_ring(s->rows());
    s->col_ring = identity_ring(s->cols());
    s->ring_transforms = false;
    return s;
}

inline SpecPtr builtin_spec(const std::string& id) {
    if (id == "SPH") return make_sph_spec();
    if (id == "DIM5") return make_dim5_spec();
    if (id == "U1") return make_u1_spec();
    if (id == "U2") return make_u2_spec();
    if (id == "W") return make_w_spec();
    throw domain_error(errc::unknown_spec, id);
}

// A block matrix over a bimodule grid: row_sizes[i] rows in stripe i,
// col_sizes[j] columns in stripe j, entries reduced into their cells.
struct Element {
    SpecPtr spec;
    std::vector<int> row_sizes;
    std::vector<int> col_sizes;
    std::vector<std::vector<Residue>> entries; // [row][col], dense

    int total_rows() const { return std::accumulate(row_sizes.begin(), row_sizes.end(), 0); }
    int total_cols() const { return std::accumulate(col_sizes.begin(), col_sizes.end(), 0); }

    int row_stripe(int r) const {
        for (size_t i = 0; i < row_sizes.size(); ++i) {
            if (r < row_sizes[i]) return static_cast<int>(i);
            r -= row_sizes[i];
        }
        throw domain_error(errc::entry_out_of_grid, "row index");
    }
    int col_stripe(int c) const {
        for (size_t j = 0; j < col_sizes.size(); ++j) {
            if (c < col_sizes[j]) return static_cast<int>(j);
            c -= col_sizes[j];
        }
        throw domain_error(errc::entry_out_of_grid, "column index");
    }
    int row_start(int stripe) const {
        return std::accumulate(row_sizes.begin(), row_sizes.begin() + stripe, 0);
    }
    int col_start(int stripe) const {
        return std::accumulate(col_sizes.begin(), col_sizes.begin() + stripe, 0);
    }

    const Cell& cell_at(int r, int c) const { return spec->cell(row_stripe(r), col_stripe(c)); }

    Residue& at(int r, int c) { return entries[r][c]; }
    const Residue& at(int r, int c) const { return entries[r][c]; }

    bool operator==(const Element& o) const {
        return spec->id == o.spec->id && row_sizes == o.row_sizes && col_sizes == o.col_sizes &&
               entries == o.entries;
    }
};

inline Element make_zero_element(SpecPtr spec, std::vector<int> row_sizes,
                                 std::vector<int> col_sizes) {
    if (static_cast<int>(row_sizes.size()) != spec->rows() ||
        static_cast<int>(col_sizes.size()) != spec->cols())
        throw domain_error(errc::entry_out_of_grid, "stripe size list has wrong length");
    Element e;
    e.spec = spec;
    e.row_sizes = std::move(row_sizes);
    e.col_sizes = std::move(col_sizes);
    int R = e.total_rows(), C = e.total_cols();
    e.entries.assign(R, std::vector<Residue>(C));
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            e.entries[r][c] = Residue(e.cell_at(r, c).is_zero_cell() ? 1 : e.cell_at(r, c).modulus, 0);
    return e;
}

struct RawEntry {
    // Stripe references are 1-based indices into the spec's stripe lists;
    // string labels are also accepted in the text format.
    int row_stripe = 1;
    int col_stripe = 1;
    int row = 1; // 1-based within the stripe
    int col = 1;
    i64 value = 0;
};

inline Element validate_element(SpecPtr spec, std::vector<int> row_sizes,
                                std::vector<int> col_sizes, const std::vector<RawEntry>& raw) {
    Element e = make_zero_element(std::move(spec), std::move(row_sizes), std::move(col_sizes));
    for (const auto& en : raw) {
        if (en.row_stripe < 1 || en.row_stripe > e.spec->rows() || en.col_stripe < 1 ||
            en.col_stripe > e.spec->cols())
            throw domain_error(errc::entry_out_of_grid, "stripe index out of range");
        int rs = en.row_stripe - 1, cs = en.col_stripe - 1;
        if (en.row < 1 || en.row > e.row_sizes[rs] || en.col < 1 || en.col > e.col_sizes[cs])
            throw domain_error(errc::entry_out_of_grid,
                               "entry position exceeds stripe multiplicity");
        const Cell& cell = e.spec->cell(rs, cs);
        if (cell.is_zero_cell())
            throw domain_error(errc::entry_in_zero_cell,
                               "(" + e.spec->row_labels[rs] + "," + e.spec->col_labels[cs] + ")");
        int r = e.row_start(rs) + en.row - 1;
        int c = e.col_start(cs) + en.col - 1;
        e.entries[r][c] = Residue(cell.modulus, en.value);
    }
    return e;
}

inline Element direct_sum(const Element& a, const Element& b) {
    if (a.spec->id != b.spec->id)
        throw domain_error(errc::spec_mismatch, a.spec->id + " vs " + b.spec->id);
    std::vector<int> rs(a.row_sizes), cs(a.col_sizes);
    for (size_t i = 0; i < rs.size(); ++i) rs[i] += b.row_sizes[i];
    for (size_t j = 0; j < cs.size(); ++j) cs[j] += b.col_sizes[j];
    Element out = make_zero_element(a.spec, rs, cs);
    auto copy_in = [&](const Element& src, bool second) {
        for (int r = 0; r < src.total_rows(); ++r)
            for (int c = 0; c < src.total_cols(); ++c) {
                if (src.at(r, c).is_zero()) continue;
                int rstripe = src.row_stripe(r);
                int cstripe = src.col_stripe(c);
                int rr = out.row_start(rstripe) + (r - src.row_start(rstripe)) +
                         (second ? a.row_sizes[rstripe] : 0);
                int cc = out.col_start(cstripe) + (c - src.col_start(cstripe)) +
                         (second ? a.col_sizes[cstripe] : 0);
                out.entries[rr][cc] = src.at(r, c);
            }
    };
    copy_in(a, false);
    copy_in(b, true);
    return out;
}

// ---------------------------------------------------------------------------
// Element text format: a JSON document with fields bimodule, row_sizes,
// col_sizes and entries.  print_element emits a canonical form (sorted
// non-zero entries, fixed key order) so that parse(print(e)) == e.
// ---------------------------------------------------------------------------

inline std::string print_element(const Element& e) {
    nlohmann::ordered_json j;
    j["bimodule"] = e.spec->id;
    j["row_sizes"] = e.row_sizes;
    j["col_sizes"] = e.col_sizes;
    auto entries = nlohmann::ordered_json::array();
    for (int rs = 0; rs < e.spec->rows(); ++rs)
        for (int cs = 0; cs < e.spec->cols(); ++cs)
            for (int r = 0; r < e.row_sizes[rs]; ++r)
                for (int c = 0; c < e.col_sizes[cs]; ++c) {
                    const Residue& v = e.at(e.row_start(rs) + r, e.col_start(cs) + c);
                    if (v.is_zero()) continue;
                    nlohmann::ordered_json en;
                    en["row_stripe"] = rs + 1;
                    en["col_stripe"] = cs + 1;
                    en["row"] = r + 1;
                    en["col"] = c + 1;
                    en["value"] = v.value;
                    entries.push_back(en);
                }
    j["entries"] = entries;
    return j.dump(2) + "\n";
}

inline Element parse_element(const std::string& text,
                             const std::function<SpecPtr(const std::string&)>& lookup =
                                 [](const std::string& id) { return builtin_spec(id); }) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw domain_error(errc::parse_error, ex.what());
    }
    if (!j.contains("bimodule")) throw domain_error(errc::parse_error, "missing field bimodule");
    SpecPtr spec = lookup(j["bimodule"].get<std::string>());
    std::vector<int> rs = j.value("row_sizes", std::vector<int>(spec->rows(), 0));
    std::vector<int> cs = j.value("col_sizes", std::vector<int>(spec->cols(), 0));
    std::vector<RawEntry> raw;
    for (const auto& en : j.value("entries", nlohmann::json::array())) {
        RawEntry r;
        auto stripe = [&](const nlohmann::json& v, bool row) -> int {
            if (v.is_string())
                return (row ? spec->row_index(v.get<std::string>())
                            : spec->col_index(v.get<std::string>())) +
                       1;
            return v.get<int>();
        };
        r.row_stripe = stripe(en.at("row_stripe"), true);
        r.col_stripe = stripe(en.at("col_stripe"), false);
        r.row = en.value("row", 1);
        r.col = en.value("col", 1);
        r.value = en.at("value").get<i64>();
        raw.push_back(r);
    }
    return validate_element(spec, std::move(rs), std::move(cs), raw);
}

} // namespace hotype
