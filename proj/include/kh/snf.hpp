#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <vector>

#include "kh/basics.hpp"

namespace kh {

using bigint = boost::multiprecision::cpp_int;

/// Sparse integer matrix, row-major.
struct SparseMat {
    int nrows = 0, ncols = 0;
    std::vector<std::map<int, i64>> rows;

    SparseMat() = default;
    SparseMat(int r, int c) : nrows(r), ncols(c), rows(size_t(r)) {}
    void add(int r, int c, i64 v) {
        if (!v) return;
        i64 nv = checked_add(rows[size_t(r)][c], v);
        if (nv)
            rows[size_t(r)][c] = nv;
        else
            rows[size_t(r)].erase(c);
    }
};

struct SmithSummary {
    int rank = 0;
    std::vector<i64> torsion;  // invariant factors >= 2, each dividing the next
};

/// Rank and nontrivial invariant factors. Unit pivots are eliminated
/// sparsely first; any residue falls back to exact bignum Smith reduction.
SmithSummary smith(const SparseMat& m);

/// Whether M x = v has an integer solution.
bool solvable(const SparseMat& m, const std::vector<i64>& v);

/// One integer solution of M x = v, if any.
bool solve(const SparseMat& m, const std::vector<i64>& v, std::vector<i64>& x);

}  // namespace kh
