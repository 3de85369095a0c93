#include "oracle.hpp"

#include <map>

namespace kh_oracle {

using kh::Diagram;
using kh::Laurent;

namespace {

// independent loop counter (plain union-find over arc ids)
struct UF {
    std::map<int, int> p;
    int find(int a) {
        if (!p.count(a)) p[a] = a;
        while (p[a] != a) a = p[a] = p[p[a]];
        return a;
    }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

Laurent bracket(const Diagram& d, size_t next, std::vector<int>& choice) {
    if (next == d.crossings.size()) {
        UF uf;
        for (int a : d.arcs()) uf.find(a);
        int ones = 0;
        for (size_t i = 0; i < d.crossings.size(); ++i) {
            auto& sl = d.crossings[i].slot;
            if (!choice[i]) {
                uf.unite(sl[0], sl[1]);
                uf.unite(sl[2], sl[3]);
            } else {
                uf.unite(sl[0], sl[3]);
                uf.unite(sl[1], sl[2]);
                ++ones;
            }
        }
        std::map<int, int> roots;
        for (int a : d.arcs()) roots[uf.find(a)] = 1;
        Laurent delta = Laurent::q(1) + Laurent::q(-1);
        Laurent term = delta.pow(unsigned(roots.size()));
        Laurent sign_q = Laurent(ones % 2 ? -1 : 1, ones);  // (-q)^{|sigma|}
        return term * sign_q;
    }
    choice[next] = 0;
    Laurent a = bracket(d, next + 1, choice);
    choice[next] = 1;
    Laurent b = bracket(d, next + 1, choice);
    return a + b;
}

}  // namespace

Laurent jones(const Diagram& d) {
    std::vector<int> choice(d.crossings.size(), 0);
    Laurent sum = bracket(d, 0, choice);
    auto [np, nn] = kh::crossing_counts(d);
    Laurent shift = Laurent(nn % 2 ? -1 : 1, np - 2 * nn);
    return sum * shift;
}

}  // namespace kh_oracle
