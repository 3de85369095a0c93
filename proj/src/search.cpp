#include "kh/search.hpp"

#include <algorithm>
#include <sstream>

namespace kh {

Gen orientation_induced_generator(const Diagram& d) {
    Smoothing s = oriented_smoothing(d);
    LoopSet ls = resolve(d, s);
    Gen g{s.bits, 0};
    for (size_t i = 0; i < ls.loops.size(); ++i)
        if (ls.loops[i].tracing0) g.labels |= u64(1) << i;
    return g;
}

bool enumerate_candidate_cycles(const Diagram& d, Bigrading target, const SearchOptions& opt,
                                const std::function<bool(const Chain&)>& emit) {
    auto dptr = std::make_shared<Diagram>(d);
    std::vector<Gen> gens;
    try {
        gens = generators_at(d, target, opt.node_budget);
    } catch (const budget_error&) {
        return false;
    }
    Gen base = orientation_induced_generator(d);
    auto dist = [&](const Gen& g) {
        return __builtin_popcountll(g.bits ^ base.bits) * 64 + __builtin_popcountll(g.labels ^ base.labels);
    };
    std::stable_sort(gens.begin(), gens.end(), [&](const Gen& a, const Gen& b) { return dist(a) < dist(b); });

    u64 examined = 0;
    for (auto& g : gens) {
        if (++examined > opt.node_budget) return false;
        if (!is_cycle(d, g)) continue;
        Chain c(dptr);
        c.add(g, 1);
        if (!emit(c)) return true;
    }
    // two-term corrections: for each non-cycle phi, solve d(alpha) = d(phi)
    // over the restricted generator set and emit phi - alpha
    std::vector<Gen> support = generators_at(d, target, opt.node_budget);
    std::vector<Gen> restricted;
    for (auto& g : support)
        if (!opt.correction_support || opt.correction_support(g)) restricted.push_back(g);
    if (restricted.empty()) return true;
    std::vector<Gen> image = generators_at(d, {target.h + 1, target.q}, opt.node_budget);
    SparseMat M = differential_matrix(d, restricted, image);
    std::map<Gen, int> image_index;
    for (size_t i = 0; i < image.size(); ++i) image_index[image[i]] = int(i);

    for (auto& g : gens) {
        if (++examined > opt.node_budget) return false;
        if (is_cycle(d, g)) continue;
        if (opt.correction_support && opt.correction_support(g)) continue;  // alpha could be phi itself
        Chain dphi = differential_gen(d, g);
        std::vector<i64> v(image.size(), 0);
        bool inside = true;
        for (auto& [t, c] : dphi.terms()) {
            auto it = image_index.find(t);
            if (it == image_index.end()) {
                inside = false;
                break;
            }
            v[size_t(it->second)] = c;
        }
        if (!inside) continue;
        std::vector<i64> x;
        if (!solve(M, v, x)) continue;
        Chain cand(dptr);
        cand.add(g, 1);
        for (size_t j = 0; j < restricted.size(); ++j)
            if (x[j]) cand.add(restricted[j], -x[j]);
        if (cand.terms().size() < 2) continue;
        if (!is_cycle(d, cand)) throw std::logic_error("correction solve produced a non-cycle");
        if (!emit(cand)) return true;
    }
    return true;
}

std::string Certificate::str(const Diagram& d) const {
    std::ostringstream os;
    os << "certificate\n";
    os << "diagram-hash " << diagram_hash << "\n";
    os << "movie-a-hash " << movie_a_hash << "\n";
    os << "movie-b-hash " << movie_b_hash << "\n";
    os << "value-a " << value_a << "\n";
    os << "value-b " << value_b << "\n";
    os << "representative\n" << emit_chain(d, representative);
    os << "transcript\n" << transcript;
    return os.str();
}

std::optional<Certificate> distinguish(std::shared_ptr<const Diagram> d, const Movie& a, const Movie& b,
                                       const SearchOptions& opt) {
    if (!(a.first() == *d) || !(b.first() == *d)) throw invalid_move("movies must start at the given diagram");
    if (!a.last().crossings.empty() || !a.last().free_loops.empty() || !b.last().crossings.empty() ||
        !b.last().free_loops.empty())
        throw invalid_move("movies must end at the empty diagram");
    if (a.chi() != b.chi()) throw invalid_move("movies have different Euler characteristics");
    // grading gate: only cycles in CKh^{0,-chi} can map onto CKh(emptyset)
    Bigrading target{0, -a.chi()};
    std::optional<Certificate> found;
    enumerate_candidate_cycles(*d, target, opt, [&](const Chain& c) {
        i64 va = evaluate_movie(a, c).scalar();
        i64 vb = evaluate_movie(b, c).scalar();
        if (std::llabs(va) == std::llabs(vb)) return true;  // keep searching
        Certificate cert;
        cert.representative = c;
        cert.value_a = va;
        cert.value_b = vb;
        cert.diagram_hash = d->content_hash();
        cert.movie_a_hash = a.content_hash();
        cert.movie_b_hash = b.content_hash();
        std::ostringstream ts;
        ts << "cycle-check " << (is_cycle(*d, c) ? "pass" : "fail") << "\n";
        ts << "grading (0," << -a.chi() << ")\n";
        ts << "recompute-a " << evaluate_movie(a, c).scalar() << "\n";
        ts << "recompute-b " << evaluate_movie(b, c).scalar() << "\n";
        cert.transcript = ts.str();
        found = std::move(cert);
        return false;  // stop
    });
    return found;
}

}  // namespace kh
