#include <doctest.h>

#include "hotype/reduce.hpp"

using namespace hotype;

namespace {

Element sph(std::vector<std::vector<i64>> m) {
    auto spec = builtin_spec("SPH");
    int R = static_cast<int>(m.size());
    int C = R ? static_cast<int>(m[0].size()) : 0;
    std::vector<RawEntry> raw;
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
            if (m[r][c]) raw.push_back({1, 1, r + 1, c + 1, m[r][c]});
    return validate_element(spec, {R}, {C}, raw);
}

// rows given as (F4 value, eta column stripe label or ""), one fresh column
// per non-zero entry
Element dim5(const std::vector<std::tuple<i64, std::string>>& rows) {
    auto spec = builtin_spec("DIM5");
    std::vector<int> rs(1, static_cast<int>(rows.size()));
    std::vector<int> cs(spec->cols(), 0);
    std::vector<RawEntry> raw;
    int r = 0;
    for (auto& [q, eta] : rows) {
        ++r;
        if (q != 0) raw.push_back({1, 1, r, ++cs[0], q});
        if (!eta.empty()) {
            int stripe = spec->col_index(eta) + 1;
            raw.push_back({1, stripe, r, ++cs[stripe - 1], 1});
        }
    }
    return validate_element(spec, rs, cs, raw);
}

std::vector<std::string> names(const DescriptorList& ds) {
    std::vector<std::string> out;
    for (auto& d : ds) out.push_back(d.to_string());
    return out;
}

} // namespace

TEST_CASE("snf_reduce: diagonal splitting into prime-power Moore summands") {
    CHECK(names(snf_reduce(sph({{4}}))) == std::vector<std::string>{"M(4)"});
    CHECK(snf_reduce(sph({{1}})).empty());
    CHECK(names(snf_reduce(sph({{0}}))) ==
          std::vector<std::string>{"empty_row 1", "empty_col 1"});
    CHECK(names(snf_reduce(sph({{2, 0}, {0, 3}}))) == std::vector<std::string>{"M(2)", "M(3)"});
    CHECK(names(snf_reduce(sph({{2, 4}, {6, 8}}))) == std::vector<std::string>{"M(2)", "M(4)"});
    CHECK(names(snf_reduce(sph({{6, 0}}))) ==
          std::vector<std::string>{"empty_col 1", "M(2)", "M(3)"});
    CHECK(names(snf_reduce(sph({{12}}))) == std::vector<std::string>{"M(3)", "M(4)"});
}

TEST_CASE("descriptor strings") {
    CHECK(make_snf(4).to_string() == "M(4)");
    CHECK(make_dim5(0, 0).to_string() == "C(eta)");
    CHECK(make_dim5(0, 2).to_string() == "C(eta2^2)");
    CHECK(make_dim5(2, 0).to_string() == "C(2^2 eta)");
    CHECK(make_dim5(1, 2).to_string() == "C(2^1 eta 2^2)");
    CHECK(make_l1(1, 0, 3).to_string() == "v1=3");
    CHECK(make_l1(2, 6, 1).to_string() == "v26=1");
    CHECK(make_l2(1, 1, 0, 1).to_string() == "v1^1=1");
    CHECK(make_l2(2, 4, 7, 2).to_string() == "v47^2=2");
    CHECK(make_l2(0, 4, 4, 3).to_string() == "v44=3");
    CHECK(make_l2(0, 4, 6, 3).to_string() == "v46=3");
    CHECK(make_l2_pair(2, 4, 1, 1).to_string() == "v2w44 v=1 w=1");
    CHECK(make_l2_pair(1, 6, 2, 3).to_string() == "v1w46 v=2 w=3");
}

TEST_CASE("reduce_dim5: the four Chang families and Moore splitting") {
    CHECK(names(reduce_dim5(dim5({{0, "F3"}}))) == std::vector<std::string>{"C(eta)"});
    CHECK(names(reduce_dim5(dim5({{2, "F3"}}))) == std::vector<std::string>{"C(eta2^1)"});
    CHECK(names(reduce_dim5(dim5({{0, "G1"}}))) == std::vector<std::string>{"C(2^1 eta)"});
    CHECK(names(reduce_dim5(dim5({{4, "G2"}}))) ==
          std::vector<std::string>{"C(2^2 eta 2^2)"});
    CHECK(names(reduce_dim5(dim5({{3, ""}}))) == std::vector<std::string>{"M(3)"});
    // an odd degree swallows the eta; the sphere column is left unattached
    CHECK(names(reduce_dim5(dim5({{1, "F3"}}))) == std::vector<std::string>{"empty_col F3"});
    CHECK(names(reduce_dim5(dim5({{3, "F3"}}))) ==
          std::vector<std::string>{"empty_col F3", "M(3)"});
    CHECK(names(reduce_dim5(dim5({{6, "F3"}}))) ==
          std::vector<std::string>{"C(eta2^1)", "M(3)"});
    CHECK(names(reduce_dim5(dim5({{12, "G3"}}))) ==
          std::vector<std::string>{"C(2^3 eta 2^2)", "M(3)"});
}

TEST_CASE("reduce_dim5: zero matrix gives sphere markers only") {
    auto spec = builtin_spec("DIM5");
    auto z = make_zero_element(spec, {2}, {1, 1, 0, 0, 0, 0});
    CHECK(names(reduce_dim5(z)) ==
          std::vector<std::string>{"empty_row rows", "empty_row rows", "empty_col F3",
                                   "empty_col F4"});
}

TEST_CASE("reduce_dim5: eta attaches to the deepest even part") {
    // two rows sharing one sphere eta column; the eta stays with 4, not 2
    auto spec = builtin_spec("DIM5");
    auto e = validate_element(spec, {2}, {2, 1, 0, 0, 0, 0},
                              {{1, 1, 1, 1, 4}, {1, 1, 2, 2, 2}, {1, 2, 1, 1, 1}, {1, 2, 2, 1, 1}});
    CHECK(names(reduce_dim5(e)) == std::vector<std::string>{"C(eta2^2)", "M(2)"});
}

TEST_CASE("reduce_dim5 is idempotent on its own realizations") {
    auto spec = builtin_spec("DIM5");
    for (int r = 0; r <= 4; ++r)
        for (int t = 0; t <= 3; ++t) {
            auto d = make_dim5(r, t);
            auto red = reduce_dim5(realize(spec, d));
            REQUIRE(red.size() == 1);
            CHECK(red[0] == d);
        }
    for (i64 q : {2, 3, 4, 5, 8, 9}) {
        auto d = make_dim5(-1, 0, q);
        auto red = reduce_dim5(realize(spec, d));
        REQUIRE(red.size() == 1);
        CHECK(red[0] == d);
    }
}

TEST_CASE("snf_reduce is idempotent on its own realizations") {
    auto spec = builtin_spec("SPH");
    for (i64 q : {2, 3, 4, 8, 9, 25}) {
        auto red = snf_reduce(realize(spec, make_snf(q)));
        REQUIRE(red.size() == 1);
        CHECK(red[0] == make_snf(q));
    }
}

// ---------------------------------------------------------------------------
// torsion-free reductions
// ---------------------------------------------------------------------------

namespace {

DescriptorList all_l1() {
    DescriptorList out;
    for (i64 v = 1; v <= 12; ++v) out.push_back(make_l1(1, 0, v));
    for (int i : {2, 3})
        for (i64 v = 1; v <= 6; ++v) out.push_back(make_l1(i, 0, v));
    for (int i : {4, 6}) out.push_back(make_l1(i, 0, 1));
    for (int i : {1, 2, 3})
        for (int l : {4, 6}) {
            i64 hi = (i == 2 && l == 6) ? 3 : 6;
            for (i64 v = 1; v <= hi; ++v) out.push_back(make_l1(i, l, v));
        }
    return out;
}

DescriptorList all_l2() {
    DescriptorList out;
    for (i64 v = 1; v <= 12; ++v) out.push_back(make_l2(1, 1, 0, v));
    for (int i : {2, 3})
        for (i64 v = 1; v <= 6; ++v) out.push_back(make_l2(1, i, 0, v));
    for (int i : {4, 6}) out.push_back(make_l2(1, i, 0, 1));
    for (i64 v = 1; v <= 12; ++v) out.push_back(make_l2(2, 4, 0, v));
    for (i64 v = 1; v <= 6; ++v) out.push_back(make_l2(2, 5, 0, v));
    for (int i : {6, 7}) out.push_back(make_l2(2, i, 0, 1));
    for (int i : {1, 2, 3})
        for (int l : {4, 6}) {
            i64 hi = (i == 2 && l == 6) ? 3 : 6;
            for (i64 v = 1; v <= hi; ++v) out.push_back(make_l2(1, i, l, v));
        }
    for (int i : {4, 5})
        for (int l : {6, 7}) {
            i64 hi = (i == 5 && l == 7) ? 3 : 6;
            for (i64 v = 1; v <= hi; ++v) out.push_back(make_l2(2, i, l, v));
        }
    for (i64 v = 1; v <= 6; ++v) out.push_back(make_l2(0, 4, 4, v));
    for (int l : {6, 7})
        for (i64 v = 1; v <= 6; ++v) out.push_back(make_l2(0, 4, l, v));
    for (int i : {1, 2, 3})
        for (i64 v = 1; v <= 6; ++v)
            for (i64 w = 1; w <= 6; ++w) {
                out.push_back(make_l2_pair(i, 4, v, w));
                out.push_back(make_l2_pair(i, 6, v, w));
                out.push_back(make_l2_pair(i, 7, v, w));
            }
    return out;
}

} // namespace

TEST_CASE("reduce_U1: basic shapes") {
    auto u1 = builtin_spec("U1");
    auto z = make_zero_element(u1, {1, 0, 0, 0, 0}, {1});
    CHECK(names(reduce_U1(z)) == std::vector<std::string>{"empty_row 1", "empty_col 1"});
    auto d = validate_element(u1, {2, 0, 0, 0, 0}, {2}, {{1, 1, 1, 1, 8}, {1, 1, 2, 2, 3}});
    CHECK(names(reduce_U1(d)) ==
          std::vector<std::string>{"empty_row 1", "empty_col 1", "v1=1"});
    // invertible entries disappear into an identity block: nothing remains
    auto one = validate_element(u1, {1, 0, 0, 0, 0}, {1}, {{1, 1, 1, 1, 23}});
    CHECK(names(reduce_U1(one)) == std::vector<std::string>{"v1=1"});
}

TEST_CASE("reduce_U1 is idempotent on the full catalog") {
    auto u1 = builtin_spec("U1");
    for (const auto& d : all_l1()) {
        auto red = reduce_U1(realize(u1, d));
        REQUIRE_MESSAGE(red.size() == 1, d.to_string());
        CHECK_MESSAGE(red[0] == d, (d.to_string() + " -> " + red[0].to_string()));
    }
}

TEST_CASE("reduce_U2 is idempotent on the full catalog") {
    auto u2 = builtin_spec("U2");
    for (const auto& d : all_l2()) {
        auto red = reduce_U2(realize(u2, d));
        REQUIRE_MESSAGE(red.size() == 1, d.to_string());
        CHECK_MESSAGE(red[0] == d, (d.to_string() + " -> " + red[0].to_string()));
    }
}

TEST_CASE("reduce_U2: 1x1 first-stripe entry 23 is the unit class") {
    auto u2 = builtin_spec("U2");
    auto e = validate_element(u2, {1, 0, 0, 0, 0, 0, 0}, {1, 0}, {{1, 1, 1, 1, 23}});
    CHECK(names(reduce_U2(e)) == std::vector<std::string>{"v1^1=1"});
}
