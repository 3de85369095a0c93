#include "kh/homology.hpp"

#include <algorithm>
#include <sstream>

namespace kh {

std::string GradedGroups::str() const {
    std::ostringstream os;
    for (auto& [gr, g] : groups) {
        if (g.rank == 0 && g.torsion.empty()) continue;
        os << "(" << gr.h << "," << gr.q << ") " << g.rank;
        for (i64 t : g.torsion) os << " Z/" << t;
        os << "\n";
    }
    return os.str();
}

namespace {

void check_budget(const Diagram& d, const HomologyOptions& opt) {
    int n = int(d.crossings.size());
    if (n > opt.crossing_budget)
        throw budget_error("crossing count " + std::to_string(n) + " exceeds budget " +
                               std::to_string(opt.crossing_budget) + " (would need " +
                               std::to_string(u64(1) << n) + " states)",
                           u64(1) << n);
}

// enumerate all label masks over nl loops with vm bits set
template <class F>
void for_masks(int nl, int vm, F&& f) {
    if (vm < 0 || vm > nl) return;
    u64 mask = (vm == 0) ? 0 : ((u64(1) << vm) - 1);
    while (true) {
        f(mask);
        if (vm == 0 || nl == vm) break;
        // Gosper's hack
        u64 c = mask & (~mask + 1), r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
        if (mask >= (u64(1) << nl)) break;
    }
}

}  // namespace

std::vector<Gen> generators_at(const Diagram& d, Bigrading gr, u64 generator_budget) {
    int n = int(d.crossings.size());
    auto [np, nn] = crossing_counts(d);
    int w = gr.h + nn;  // |sigma|
    std::vector<Gen> out;
    if (w < 0 || w > n) return out;
    for (u64 bits = 0;; ++bits) {
        if (__builtin_popcountll(bits) == w) {
            LoopSet ls = resolve(d, Smoothing{bits, n});
            int nl = int(ls.loops.size());
            // q = (nl - 2 vm) + h + np - nn
            int twice_vm = nl + gr.h + np - nn - gr.q;
            if (twice_vm >= 0 && twice_vm % 2 == 0) {
                int vm = twice_vm / 2;
                for_masks(nl, vm, [&](u64 mask) {
                    out.push_back(Gen{bits, mask});
                    if (out.size() > generator_budget)
                        throw budget_error("generator budget exceeded", out.size());
                });
            }
        }
        if (n == 0 || bits + 1 == (u64(1) << n)) break;
    }
    return out;
}

SparseMat differential_matrix(const Diagram& d, const std::vector<Gen>& from, const std::vector<Gen>& to) {
    std::map<Gen, int> index;
    for (size_t i = 0; i < to.size(); ++i) index[to[i]] = int(i);
    SparseMat m(int(to.size()), int(from.size()));
    for (size_t j = 0; j < from.size(); ++j) {
        Chain dg = differential_gen(d, from[j]);
        for (auto& [g, c] : dg.terms()) {
            auto it = index.find(g);
            if (it == index.end()) throw std::logic_error("differential image outside target basis");
            m.add(it->second, int(j), c);
        }
    }
    return m;
}

GradedGroups homology(const Diagram& d, const HomologyOptions& opt) {
    check_budget(d, opt);
    int n = int(d.crossings.size());
    auto [np, nn] = crossing_counts(d);

    if (n == 0) {
        // crossingless diagram: no differential; rank from label counts
        GradedGroups out;
        int nl = int(d.free_loops.size());
        for (int vm = 0; vm <= nl; ++vm) {
            i64 binom = 1;
            for (int k = 0; k < vm; ++k) binom = binom * (nl - k) / (k + 1);
            Bigrading gr{0, nl - 2 * vm};
            out.groups[gr].rank += binom;
        }
        return out;
    }

    // collect gradings per state
    std::map<int, std::set<int>> hs_by_q;
    u64 total_gens = 0;
    for (u64 bits = 0;; ++bits) {
        LoopSet ls = resolve(d, Smoothing{bits, n});
        int nl = int(ls.loops.size());
        int h = __builtin_popcountll(bits) - nn;
        total_gens += u64(1) << nl;
        if (total_gens > opt.generator_budget) throw budget_error("generator budget exceeded", total_gens);
        for (int vm = 0; vm <= nl; ++vm) hs_by_q[(nl - 2 * vm) + h + np - nn].insert(h);
        if (bits + 1 == (u64(1) << n)) break;
    }

    auto in_window = [&](Bigrading gr) {
        if (opt.window_min && (gr.h < opt.window_min->h || gr.q < opt.window_min->q)) return false;
        if (opt.window_max && (gr.h > opt.window_max->h || gr.q > opt.window_max->q)) return false;
        return true;
    };

    GradedGroups out;
    for (auto& [q, hset] : hs_by_q) {
        bool any = false;
        for (int h : hset)
            if (in_window({h, q})) any = true;
        if (!any) continue;
        std::map<int, std::vector<Gen>> basis;
        for (int h : hset) basis[h] = generators_at(d, {h, q}, opt.generator_budget);
        std::map<int, SmithSummary> boundary;  // h -> smith of d: (h,q) -> (h+1,q)
        for (int h : hset) {
            auto next = basis.find(h + 1);
            std::vector<Gen> empty;
            const std::vector<Gen>& to = (next != basis.end()) ? next->second : empty;
            boundary[h] = smith(differential_matrix(d, basis[h], to));
        }
        for (int h : hset) {
            Bigrading gr{h, q};
            if (!in_window(gr)) continue;
            i64 dim = i64(basis[h].size());
            i64 rk_out = boundary[h].rank;
            i64 rk_in = boundary.count(h - 1) ? boundary[h - 1].rank : 0;
            GradedGroups::Group grp;
            grp.rank = dim - rk_out - rk_in;
            if (boundary.count(h - 1)) grp.torsion = boundary[h - 1].torsion;
            if (grp.rank || !grp.torsion.empty()) out.groups[gr] = grp;
        }
    }
    return out;
}

bool is_boundary(const Diagram& d, const Chain& a, const HomologyOptions& opt) {
    if (a.is_zero()) return true;
    check_budget(d, opt);
    Bigrading gr;
    if (!homogeneous_grading(d, a, gr)) throw std::invalid_argument("chain is not homogeneous");
    std::vector<Gen> from = generators_at(d, {gr.h - 1, gr.q}, opt.generator_budget);
    std::vector<Gen> to = generators_at(d, gr, opt.generator_budget);
    SparseMat m = differential_matrix(d, from, to);
    std::map<Gen, int> index;
    for (size_t i = 0; i < to.size(); ++i) index[to[i]] = int(i);
    std::vector<i64> v(to.size(), 0);
    for (auto& [g, c] : a.terms()) {
        auto it = index.find(g);
        if (it == index.end()) throw std::logic_error("chain term outside graded basis");
        v[size_t(it->second)] = c;
    }
    return solvable(m, v);
}

bool classes_agree_up_to_sign(const Diagram& d, const Chain& a, const Chain& b, const HomologyOptions& opt) {
    Bigrading ga, gb;
    if (!homogeneous_grading(d, a, ga) || !homogeneous_grading(d, b, gb))
        throw std::invalid_argument("chains must be homogeneous");
    if (!a.is_zero() && !b.is_zero() && ga != gb) return false;
    return is_boundary(d, a - b, opt) || is_boundary(d, a + b, opt);
}

}  // namespace kh
