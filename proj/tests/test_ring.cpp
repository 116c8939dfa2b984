#include <doctest.h>

#include "hotype/residue.hpp"
#include "hotype/snf.hpp"
#include "hotype/tiled_ring.hpp"

using namespace hotype;

TEST_CASE("reduce_mod picks least non-negative representatives") {
    CHECK(reduce_mod(7, 5) == 2);
    CHECK(reduce_mod(-1, 5) == 4);
    CHECK(reduce_mod(-10, 5) == 0);
    CHECK(reduce_mod(-7, 0) == -7);
}

TEST_CASE("residue arithmetic") {
    Residue a(12, 7), b(12, 8);
    CHECK((a + b).value == 3);
    CHECK((-a).value == 5);
    CHECK((5 * a).value == 11);
    CHECK(Residue(0, -3).value == -3);
}

TEST_CASE("crt split and recombine round-trip over Z/24") {
    for (i64 v = 0; v < 24; ++v) {
        auto [two, three] = crt_split(Residue(24, v));
        CHECK(two.modulus == 8);
        CHECK(three.modulus == 3);
        CHECK(crt_recombine(two, three) == Residue(24, v));
    }
}

TEST_CASE("crt split rejects moduli with other prime factors") {
    CHECK_THROWS_AS(crt_split(Residue(10, 1)), domain_error);
    CHECK_THROWS_AS(crt_split(Residue(0, 1)), domain_error);
}

TEST_CASE("scalar action: plain coefficients lift and multiply") {
    CHECK(scalar_act(5, 24, 12, false, Residue(24, 7)).value == reduce_mod(35, 12));
    CHECK(scalar_act(2, 12, 24, false, Residue(12, 7)).value == 14);
    CHECK(scalar_act(1, 2, 24, false, Residue(2, 1)).value == 1);
}

TEST_CASE("scalar action: starred coefficient on a mod-2 target drops the 12") {
    CHECK(scalar_act(12, 2, 2, true, Residue(2, 1)).value == 1);
    CHECK(scalar_act(24, 2, 2, true, Residue(2, 1)).value == 0);
    CHECK(scalar_act(36, 2, 2, true, Residue(2, 1)).value == 1);
    // on any other target it is ordinary multiplication by 12b
    CHECK(scalar_act(12, 2, 24, true, Residue(2, 1)).value == 12);
    CHECK_THROWS_AS(scalar_act(5, 2, 2, true, Residue(2, 1)), domain_error);
}

TEST_CASE("tiled order validation") {
    CHECK_NOTHROW(validate_tiled_ring({{1, 2}, {0, 1}}));
    CHECK_THROWS_AS(validate_tiled_ring({{2, 0}, {0, 1}}), domain_error);
    // triangular patterns have no two-way communication, so no divisibility
    // constraints beyond the zero clause
    CHECK_NOTHROW(validate_tiled_ring({{1, 2, 3}, {0, 1, 2}, {0, 0, 1}}));
    // stripes 2,3 communicate both ways but d_13 = 4 does not divide d_12*d_23
    CHECK_THROWS_AS(validate_tiled_ring({{1, 1, 4}, {1, 1, 1}, {1, 1, 1}}), domain_error);
    // zero cell reachable through non-zero product
    CHECK_THROWS_AS(validate_tiled_ring({{1, 2, 0}, {0, 1, 2}, {0, 0, 1}}), domain_error);
    CHECK_THROWS_AS(validate_tiled_ring({{1, 0}, {0, 1}}, {{1, 2}}), domain_error);
}

TEST_CASE("smith normal form") {
    auto check_snf = [](std::vector<std::vector<i64>> a, std::vector<i64> diag) {
        auto res = smith_normal_form(a);
        int R = static_cast<int>(a.size()), C = static_cast<int>(a[0].size());
        // D == U * A * V
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) {
                i64 s = 0;
                for (int k = 0; k < R; ++k)
                    for (int l = 0; l < C; ++l) s += res.u[i][k] * a[k][l] * res.v[l][j];
                CHECK(s == res.d[i][j]);
                if (i != j) CHECK(res.d[i][j] == 0);
            }
        for (size_t k = 0; k < diag.size(); ++k) CHECK(res.d[k][k] == diag[k]);
    };
    check_snf({{2, 4}, {6, 8}}, {2, 4});
    check_snf({{0, 0}, {0, 0}}, {0, 0});
    check_snf({{1, 2, 3}, {4, 5, 6}}, {1, 3});
    check_snf({{6}, {10}}, {2});
    check_snf({{-4, 2}, {2, 2}}, {2, 6});
}
