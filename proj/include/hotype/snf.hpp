#pragma once

#include <vector>

#include "hotype/residue.hpp"

namespace hotype {

// Smith normal form of an integer matrix.  Returns D = U * A * V with U, V
// unimodular and D diagonal, d_1 | d_2 | ..., diagonal entries non-negative.
struct SnfResult {
    std::vector<std::vector<i64>> d, u, v;
};

namespace detail {

inline void snf_row_add(std::vector<std::vector<i64>>& m, int dst, int src, i64 c) {
    for (size_t j = 0; j < m[dst].size(); ++j) m[dst][j] += c * m[src][j];
}
inline void snf_col_add(std::vector<std::vector<i64>>& m, int dst, int src, i64 c) {
    for (auto& row : m) row[dst] += c * row[src];
}
inline void snf_row_swap(std::vector<std::vector<i64>>& m, int a, int b) { std::swap(m[a], m[b]); }
inline void snf_col_swap(std::vector<std::vector<i64>>& m, int a, int b) {
    for (auto& row : m) std::swap(row[a], row[b]);
}
inline void snf_row_neg(std::vector<std::vector<i64>>& m, int a) {
    for (auto& v : m[a]) v = -v;
}
inline void snf_col_neg(std::vector<std::vector<i64>>& m, int a) {
    for (auto& row : m) row[a] = -row[a];
}

} // namespace detail

inline SnfResult smith_normal_form(std::vector<std::vector<i64>> a) {
    int R = static_cast<int>(a.size());
    int C = R == 0 ? 0 : static_cast<int>(a[0].size());
    SnfResult res;
    res.u.assign(R, std::vector<i64>(R, 0));
    res.v.assign(C, std::vector<i64>(C, 0));
    for (int i = 0; i < R; ++i) res.u[i][i] = 1;
    for (int j = 0; j < C; ++j) res.v[j][j] = 1;

    using namespace detail;
    int k = 0;
    while (k < R && k < C) {
        // find a pivot
        int pr = -1, pc = -1;
        for (int i = k; i < R && pr < 0; ++i)
            for (int j = k; j < C; ++j)
                if (a[i][j] != 0) {
                    pr = i;
                    pc = j;
                    break;
                }
        if (pr < 0) break;
        snf_row_swap(a, k, pr);
        snf_row_swap(res.u, k, pr);
        snf_col_swap(a, k, pc);
        snf_col_swap(res.v, k, pc);
        for (;;) {
            bool clean = true;
            for (int i = k + 1; i < R; ++i) {
                if (a[i][k] == 0) continue;
                i64 q = a[i][k] / a[k][k];
                snf_row_add(a, i, k, -q);
                snf_row_add(res.u, i, k, -q);
                if (a[i][k] != 0) {
                    snf_row_swap(a, k, i);
                    snf_row_swap(res.u, k, i);
                    clean = false;
                }
            }
            for (int j = k + 1; j < C; ++j) {
                if (a[k][j] == 0) continue;
                i64 q = a[k][j] / a[k][k];
                snf_col_add(a, j, k, -q);
                snf_col_add(res.v, j, k, -q);
                if (a[k][j] != 0) {
                    snf_col_swap(a, k, j);
                    snf_col_swap(res.v, k, j);
                    clean = false;
                }
            }
            if (!clean) continue;
            // ensure the pivot divides the remaining block
            int bi = -1, bj = -1;
            for (int i = k + 1; i < R && bi < 0; ++i)
                for (int j = k + 1; j < C; ++j)
                    if (a[i][j] % a[k][k] != 0) {
                        bi = i;
                        bj = j;
                        break;
                    }
            if (bi < 0) break;
            snf_row_add(a, k, bi, 1);
            snf_row_add(res.u, k, bi, 1);
            (void)bj;
        }
        if (a[k][k] < 0) {
            snf_row_neg(a, k);
            snf_row_neg(res.u, k);
        }
        ++k;
    }
    res.d = std::move(a);
    return res;
}

} // namespace hotype
