#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hotype/errors.hpp"
#include "hotype/residue.hpp"

namespace hotype {

using Pos = std::pair<int, int>; // 1-based (row, col)

// A tiled order inside Mat(n, Z): the subring of integer matrices (a_ij) with
// d_ij | a_ij, where d_ii = 1 and d_ik | d_ij * d_jk (every integer divides 0,
// and d_ij = 0 forces a_ij = 0).  Starred positions additionally carry the
// *-rule action of residue.hpp.
struct TiledRing {
    int n = 0;
    std::vector<std::vector<i64>> d;
    std::set<Pos> star;

    bool starred(int i, int j) const { return star.count({i, j}) != 0; }
};

// "x divides y" with the convention that every integer divides 0.
inline bool divides(i64 x, i64 y) {
    if (y == 0) return true;
    if (x == 0) return false;
    return y % x == 0;
}

inline TiledRing validate_tiled_ring(std::vector<std::vector<i64>> d, std::set<Pos> star = {}) {
    int n = static_cast<int>(d.size());
    for (auto& row : d)
        if (static_cast<int>(row.size()) != n)
            throw domain_error(errc::divisibility_violated, "grid is not square");
    for (int i = 0; i < n; ++i)
        if (d[i][i] != 1)
            throw domain_error(errc::diagonal_not_one,
                               "d[" + std::to_string(i + 1) + "][" + std::to_string(i + 1) + "] != 1");
    // The divisibility clause applies where stripes j and k communicate in
    // both directions; a zero cell must not be reachable through a non-zero
    // product.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                bool bad;
                if (d[i][k] == 0)
                    bad = d[i][j] * d[j][k] != 0;
                else
                    bad = d[j][k] != 0 && d[k][j] != 0 && !divides(d[i][k], d[i][j] * d[j][k]);
                if (bad)
                    throw domain_error(errc::divisibility_violated,
                                       "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                                           std::to_string(k + 1) + ")");
            }
    for (auto& [i, j] : star) {
        if (i < 1 || i > n || j < 1 || j > n || d[i - 1][j - 1] == 0)
            throw domain_error(errc::star_on_zero_cell,
                               "(" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    return TiledRing{n, std::move(d), std::move(star)};
}

inline TiledRing identity_ring(int n) {
    std::vector<std::vector<i64>> d(n, std::vector<i64>(n, 0));
    for (int i = 0; i < n; ++i) d[i][i] = 1;
    return TiledRing{n, std::move(d), {}};
}

} // namespace hotype
