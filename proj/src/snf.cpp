#include "kh/snf.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace kh {

namespace {

// Sparse elimination of +-1 pivots, optionally carrying a right-hand side.
// Leaves the residual (non-unit) part and the pivot record behind.
struct UnitElim {
    std::vector<std::map<int, i64>> rows;
    std::vector<std::set<int>> col_rows;   // col -> rows with a nonzero entry
    std::vector<char> row_active, col_active;
    std::vector<i64> rhs;
    bool track_rhs = false;

    struct Pivot {
        int r, c;
        i64 eps;
        std::map<int, i64> row_snapshot;  // row content at elimination time
    };
    std::vector<Pivot> pivots;

    explicit UnitElim(const SparseMat& m, const std::vector<i64>* v = nullptr) {
        rows = m.rows;
        rows.resize(size_t(m.nrows));
        col_rows.resize(size_t(m.ncols));
        row_active.assign(size_t(m.nrows), 1);
        col_active.assign(size_t(m.ncols), 1);
        for (int r = 0; r < m.nrows; ++r)
            for (auto& [c, val] : rows[size_t(r)]) col_rows[size_t(c)].insert(r);
        if (v) {
            rhs = *v;
            track_rhs = true;
        }
    }

    void run() {
        std::vector<std::pair<int, int>> stack;
        for (size_t r = 0; r < rows.size(); ++r)
            for (auto& [c, val] : rows[r])
                if (val == 1 || val == -1) stack.push_back({int(r), c});
        while (!stack.empty()) {
            auto [r, c] = stack.back();
            stack.pop_back();
            if (!row_active[size_t(r)] || !col_active[size_t(c)]) continue;
            auto it = rows[size_t(r)].find(c);
            if (it == rows[size_t(r)].end() || (it->second != 1 && it->second != -1)) continue;
            i64 eps = it->second;
            // clear the column with row operations
            std::vector<int> users(col_rows[size_t(c)].begin(), col_rows[size_t(c)].end());
            for (int r2 : users) {
                if (r2 == r || !row_active[size_t(r2)]) continue;
                auto jt = rows[size_t(r2)].find(c);
                if (jt == rows[size_t(r2)].end()) continue;
                i64 f = checked_mul(jt->second, eps);  // row2 -= f * row
                for (auto& [cc, vv] : rows[size_t(r)]) {
                    i64 nv = checked_add(get(r2, cc), checked_mul(-f, vv));
                    set(r2, cc, nv);
                    if (nv == 1 || nv == -1) stack.push_back({r2, cc});
                }
                if (track_rhs) rhs[size_t(r2)] = checked_add(rhs[size_t(r2)], checked_mul(-f, rhs[size_t(r)]));
            }
            pivots.push_back({r, c, eps, rows[size_t(r)]});
            row_active[size_t(r)] = 0;
            col_active[size_t(c)] = 0;
        }
    }

    i64 get(int r, int c) const {
        auto it = rows[size_t(r)].find(c);
        return it == rows[size_t(r)].end() ? 0 : it->second;
    }
    void set(int r, int c, i64 v) {
        if (v)
            rows[size_t(r)][c] = v;
        else
            rows[size_t(r)].erase(c);
        if (v)
            col_rows[size_t(c)].insert(r);
        else
            col_rows[size_t(c)].erase(r);
    }

    // residual active entries as a dense matrix with index maps
    void residual(std::vector<std::vector<bigint>>& m, std::vector<int>& rmap, std::vector<int>& cmap) const {
        rmap.clear();
        cmap.clear();
        std::set<int> cols_used;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (!row_active[r]) continue;
            bool nz = false;
            for (auto& [c, v] : rows[r])
                if (col_active[size_t(c)] && v) {
                    nz = true;
                    cols_used.insert(c);
                }
            if (nz || (track_rhs && rhs[r] != 0)) rmap.push_back(int(r));
        }
        cmap.assign(cols_used.begin(), cols_used.end());
        std::map<int, int> cidx;
        for (size_t j = 0; j < cmap.size(); ++j) cidx[cmap[j]] = int(j);
        m.assign(rmap.size(), std::vector<bigint>(cmap.size(), 0));
        for (size_t i = 0; i < rmap.size(); ++i)
            for (auto& [c, v] : rows[size_t(rmap[i])])
                if (col_active[size_t(c)] && v) m[i][size_t(cidx[c])] = v;
    }
};

// Classic Smith reduction of a dense bignum matrix. If track_v/track_V are
// given, row operations are mirrored on *track_v and column operations
// accumulate into *track_V (so original x = V * new variables).
void dense_smith(std::vector<std::vector<bigint>>& a, std::vector<bigint>* track_v,
                 std::vector<std::vector<bigint>>* track_V, std::vector<bigint>& diag) {
    size_t R = a.size(), C = R ? a[0].size() : 0;
    diag.clear();
    if (track_V) {
        track_V->assign(C, std::vector<bigint>(C, 0));
        for (size_t j = 0; j < C; ++j) (*track_V)[j][j] = 1;
    }
    size_t t = 0;
    while (t < R && t < C) {
        // find smallest nonzero entry in the remaining block
        size_t pr = t, pc = t;
        bigint best = 0;
        for (size_t i = t; i < R; ++i)
            for (size_t j = t; j < C; ++j)
                if (a[i][j] != 0 && (best == 0 || abs(a[i][j]) < abs(best))) {
                    best = a[i][j];
                    pr = i;
                    pc = j;
                }
        if (best == 0) break;
        std::swap(a[pr], a[t]);
        if (track_v) std::swap((*track_v)[pr], (*track_v)[t]);
        for (size_t i = 0; i < R; ++i) std::swap(a[i][pc], a[i][t]);
        if (track_V) std::swap((*track_V)[pc], (*track_V)[t]);

        bool clean = true;
        for (size_t i = t + 1; i < R; ++i) {
            if (a[i][t] == 0) continue;
            bigint qn = a[i][t] / a[t][t];
            if (qn != 0) {
                for (size_t j = t; j < C; ++j) a[i][j] -= qn * a[t][j];
                if (track_v) (*track_v)[i] -= qn * (*track_v)[t];
            }
            if (a[i][t] != 0) clean = false;
        }
        for (size_t j = t + 1; j < C; ++j) {
            if (a[t][j] == 0) continue;
            bigint qn = a[t][j] / a[t][t];
            if (qn != 0) {
                for (size_t i = 0; i < R; ++i) a[i][j] -= qn * a[i][t];
                if (track_V)
                    for (size_t k = 0; k < C; ++k) (*track_V)[k][j] -= qn * (*track_V)[k][t];
            }
            if (a[t][j] != 0) clean = false;
        }
        if (!clean) continue;  // remainders left; repeat with a smaller pivot
        ++t;
    }
    for (size_t i = 0; i < t; ++i) diag.push_back(abs(a[i][i]));
    // enforce the divisibility chain
    for (size_t i = 0; i < diag.size(); ++i)
        for (size_t j = i + 1; j < diag.size(); ++j)
            if (diag[j] % diag[i] != 0) {
                bigint g = gcd(diag[i], diag[j]);
                bigint l = diag[i] / g * diag[j];
                diag[i] = g;
                diag[j] = l;
            }
    std::sort(diag.begin(), diag.end());
}

}  // namespace

SmithSummary smith(const SparseMat& m) {
    UnitElim elim(m);
    elim.run();
    std::vector<std::vector<bigint>> res;
    std::vector<int> rmap, cmap;
    elim.residual(res, rmap, cmap);
    std::vector<bigint> diag;
    dense_smith(res, nullptr, nullptr, diag);
    SmithSummary out;
    out.rank = int(elim.pivots.size()) + int(diag.size());
    for (auto& dv : diag)
        if (dv > 1) {
            if (dv > bigint(std::numeric_limits<i64>::max()))
                throw overflow_error("torsion order exceeds int64");
            out.torsion.push_back(i64(dv));
        }
    return out;
}

bool solve(const SparseMat& m, const std::vector<i64>& v, std::vector<i64>& x) {
    if (int(v.size()) != m.nrows) throw std::invalid_argument("solve: rhs size mismatch");
    UnitElim elim(m, &v);
    elim.run();
    std::vector<std::vector<bigint>> res;
    std::vector<int> rmap, cmap;
    elim.residual(res, rmap, cmap);
    std::vector<bigint> rv(rmap.size());
    for (size_t i = 0; i < rmap.size(); ++i) rv[i] = elim.rhs[size_t(rmap[i])];

    std::vector<std::vector<bigint>> V;
    std::vector<bigint> diag;
    dense_smith(res, &rv, &V, diag);

    size_t C = cmap.size();
    std::vector<bigint> y(C, 0);
    for (size_t i = 0; i < rv.size(); ++i) {
        if (i < diag.size()) {
            if (diag[i] == 0) {
                if (rv[i] != 0) return false;
            } else {
                bigint pivot = res[i][i];
                if (rv[i] % pivot != 0) return false;
                y[i] = rv[i] / pivot;
            }
        } else if (rv[i] != 0)
            return false;
    }
    std::vector<bigint> xr(C, 0);
    for (size_t j = 0; j < C; ++j) {
        bigint s = 0;
        for (size_t k = 0; k < C; ++k) s += V[j][k] * y[k];
        xr[j] = s;
    }

    std::vector<bigint> full(size_t(m.ncols), 0);
    for (size_t j = 0; j < C; ++j) full[size_t(cmap[j])] = xr[j];
    // rows that never became pivots and have no residual must have rhs 0
    for (int r = 0; r < m.nrows; ++r) {
        bool in_res = std::find(rmap.begin(), rmap.end(), r) != rmap.end();
        bool is_piv = false;
        for (auto& p : elim.pivots) is_piv |= (p.r == r);
        if (!in_res && !is_piv && elim.rhs[size_t(r)] != 0) return false;
    }
    // back-substitute unit pivots in reverse elimination order
    for (auto it = elim.pivots.rbegin(); it != elim.pivots.rend(); ++it) {
        bigint s = elim.rhs[size_t(it->r)];
        for (auto& [c, coef] : it->row_snapshot) {
            if (c == it->c) continue;
            s -= bigint(coef) * full[size_t(c)];
        }
        full[size_t(it->c)] = bigint(it->eps) * s;
    }
    x.assign(size_t(m.ncols), 0);
    for (int j = 0; j < m.ncols; ++j) {
        if (full[size_t(j)] > bigint(std::numeric_limits<i64>::max()) ||
            full[size_t(j)] < bigint(std::numeric_limits<i64>::min()))
            throw overflow_error("solution exceeds int64");
        x[size_t(j)] = i64(full[size_t(j)]);
    }
    return true;
}

bool solvable(const SparseMat& m, const std::vector<i64>& v) {
    std::vector<i64> x;
    return solve(m, v, x);
}

}  // namespace kh
