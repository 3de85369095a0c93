#include "kh/chain.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace kh {

i64 Chain::scalar() const {
    if (!d_ || !d_->crossings.empty() || !d_->free_loops.empty())
        throw std::logic_error("scalar() requires a chain on the empty diagram");
    if (terms_.empty()) return 0;
    return terms_.begin()->second;
}

int v_minus(const LoopSet& ls, u64 labels) {
    (void)ls;
    return __builtin_popcountll(labels);
}

Bigrading grading(const Diagram& d, const Gen& g) {
    auto [np, nn] = crossing_counts(d);
    Smoothing s{g.bits, int(d.crossings.size())};
    LoopSet ls = resolve(d, s);
    int vm = v_minus(ls, g.labels);
    int vp = int(ls.loops.size()) - vm;
    int h = s.weight() - nn;
    int q = vp - vm + h + np - nn;
    return {h, q};
}

bool homogeneous_grading(const Diagram& d, const Chain& c, Bigrading& gr) {
    bool first = true;
    for (auto& [g, coef] : c.terms()) {
        Bigrading b = grading(d, g);
        if (first) {
            gr = b;
            first = false;
        } else if (b != gr)
            return false;
    }
    return true;
}

std::vector<std::pair<u64, i64>> transport_labels(const LoopSet& pre, u64 labels, const LoopSet& post,
                                                  const std::function<int(int)>& arc_map) {
    size_t np = pre.loops.size(), nq = post.loops.size();
    // incidence via mapped arcs
    std::vector<std::vector<int>> pre_to_post(np);
    std::vector<std::vector<int>> post_to_pre(nq);
    std::map<int, int> post_arc_loop;
    for (size_t j = 0; j < nq; ++j)
        for (int a : post.loops[j].arcs) post_arc_loop[a] = int(j);
    for (size_t i = 0; i < np; ++i) {
        std::set<int> hit;
        for (int a : pre.loops[i].arcs) {
            int b = arc_map(a);
            if (b == 0) continue;
            auto it = post_arc_loop.find(b);
            if (it == post_arc_loop.end())
                throw std::logic_error("transport_labels: mapped arc missing from post partition");
            hit.insert(it->second);
        }
        if (hit.empty()) throw std::logic_error("transport_labels: pre loop with no surviving arcs");
        for (int j : hit) {
            pre_to_post[i].push_back(j);
            post_to_pre[j].push_back(int(i));
        }
    }

    int split_pre = -1, merge_post = -1;
    for (size_t i = 0; i < np; ++i) {
        if (pre_to_post[i].size() == 2) {
            if (split_pre >= 0 || merge_post >= 0) throw std::logic_error("transport_labels: not a single saddle");
            split_pre = int(i);
        } else if (pre_to_post[i].size() != 1)
            throw std::logic_error("transport_labels: pre loop maps to >2 post loops");
    }
    for (size_t j = 0; j < nq; ++j) {
        if (post_to_pre[j].size() == 2) {
            if (split_pre >= 0 || merge_post >= 0) throw std::logic_error("transport_labels: not a single saddle");
            merge_post = int(j);
        } else if (post_to_pre[j].size() != 1)
            throw std::logic_error("transport_labels: post loop has >2 preimages");
        else if (post_to_pre[j].empty())
            throw std::logic_error("transport_labels: post loop with no preimage");
    }

    auto pre_label = [&](int i) { return (labels >> i) & 1; };  // 1 = x

    if (split_pre < 0 && merge_post < 0) {
        u64 out = 0;
        for (size_t i = 0; i < np; ++i)
            if (pre_label(int(i))) out |= u64(1) << pre_to_post[i][0];
        return {{out, 1}};
    }

    u64 base = 0;
    for (size_t i = 0; i < np; ++i) {
        if (int(i) == split_pre) continue;
        if (merge_post >= 0 && pre_to_post[i][0] == merge_post) continue;
        if (pre_label(int(i))) base |= u64(1) << pre_to_post[i][0];
    }

    if (merge_post >= 0) {
        int i1 = post_to_pre[merge_post][0], i2 = post_to_pre[merge_post][1];
        bool x1 = pre_label(i1), x2 = pre_label(i2);
        if (x1 && x2) return {};                     // m(x,x) = 0
        u64 out = base;
        if (x1 || x2) out |= u64(1) << merge_post;   // m(1,x) = m(x,1) = x
        return {{out, 1}};                           // m(1,1) = 1
    }

    int j1 = pre_to_post[split_pre][0], j2 = pre_to_post[split_pre][1];
    if (pre_label(split_pre)) {
        // Delta(x) = x (x) x
        return {{base | (u64(1) << j1) | (u64(1) << j2), 1}};
    }
    // Delta(1) = 1 (x) x + x (x) 1
    return {{base | (u64(1) << j2), 1}, {base | (u64(1) << j1), 1}};
}

Chain differential_gen(const Diagram& d, const Gen& g) {
    int n = int(d.crossings.size());
    Smoothing s{g.bits, n};
    LoopSet pre = resolve(d, s);
    Chain out(std::make_shared<Diagram>(d));
    auto ident = [](int a) { return a; };
    for (int i = 0; i < n; ++i) {
        if (s.bit(i)) continue;
        Smoothing t{g.bits | (u64(1) << i), n};
        LoopSet post = resolve(d, t);
        int xi = __builtin_popcountll(g.bits & ((u64(1) << i) - 1));
        i64 sign = (xi % 2 == 0) ? 1 : -1;
        for (auto& [lab, coef] : transport_labels(pre, g.labels, post, ident))
            out.add(Gen{t.bits, lab}, checked_mul(sign, coef));
    }
    return out;
}

Chain differential(const Diagram& d, const Chain& c) {
    Chain out(c.diagram_ptr());
    for (auto& [g, coef] : c.terms()) {
        Chain dg = differential_gen(d, g);
        out = out + dg * coef;
    }
    return out;
}

bool is_cycle(const Diagram& d, const Gen& g) {
    int n = int(d.crossings.size());
    Smoothing s{g.bits, n};
    LoopSet pre = resolve(d, s);
    for (int i = 0; i < n; ++i) {
        if (s.bit(i)) continue;
        // in the 0-smoothing the site strands are (slot0,slot1) and (slot2,slot3);
        // flipping merges the loops through them, or splits if they coincide
        auto& sl = d.crossings[i].slot;
        int la = pre.index_of(sl[0]);
        int lb = pre.index_of(sl[2]);
        if (la == lb) return false;  // split: Delta terms never vanish
        bool xa = (g.labels >> la) & 1, xb = (g.labels >> lb) & 1;
        if (!(xa && xb)) return false;
    }
    return true;
}

bool is_cycle(const Diagram& d, const Chain& c) { return differential(d, c).is_zero(); }

Laurent graded_euler_characteristic(const Diagram& d) {
    int n = int(d.crossings.size());
    auto [np, nn] = crossing_counts(d);
    Laurent total;
    Laurent loop_factor = Laurent::q(1) + Laurent::q(-1);
    for (u64 bits = 0;; ++bits) {
        Smoothing s{bits, n};
        LoopSet ls = resolve(d, s);
        int h = s.weight() - nn;
        Laurent term = loop_factor.pow(unsigned(ls.loops.size())) * Laurent((h % 2 == 0) ? 1 : -1, h + np - nn);
        total = total + term;
        if (bits + 1 == (u64(1) << n) || n == 0) break;
    }
    return total;
}

std::string emit_chain(const Diagram& d, const Chain& c) {
    std::ostringstream os;
    int n = int(d.crossings.size());
    if (c.is_zero()) {
        os << "0\n";
        return os.str();
    }
    for (auto& [g, coef] : c.terms()) {
        os << (coef >= 0 ? "+" : "") << coef << " * [";
        for (int i = 0; i < n; ++i) os << (((g.bits >> i) & 1) ? '1' : '0');
        os << " |";
        LoopSet ls = resolve(d, Smoothing{g.bits, n});
        for (size_t k = 0; k < ls.loops.size(); ++k) {
            os << (k ? ", " : " ") << "a" << ls.loops[k].id << ":" << (((g.labels >> k) & 1) ? 'x' : '1');
        }
        os << "]\n";
    }
    return os.str();
}

Chain parse_chain(std::shared_ptr<const Diagram> d, const std::string& text) {
    Chain c(d);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int n = int(d->crossings.size());
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "0") continue;
        i64 coef;
        try {
            coef = std::stoll(tok);
        } catch (...) {
            throw parse_error("bad coefficient '" + tok + "'", lineno);
        }
        std::string star, bracket;
        ls >> star;
        if (star != "*") throw parse_error("expected '*'", lineno);
        std::string rest;
        std::getline(ls, rest);
        auto lb = rest.find('[');
        auto bar = rest.find('|');
        auto rb = rest.find(']');
        if (lb == std::string::npos || bar == std::string::npos || rb == std::string::npos)
            throw parse_error("expected [bits | labels]", lineno);
        std::string bitstr;
        for (char ch : rest.substr(lb + 1, bar - lb - 1)) {
            if (ch == ' ' || ch == '\t') continue;
            if (ch != '0' && ch != '1') throw parse_error("bad smoothing bit", lineno);
            bitstr.push_back(ch);
        }
        if (int(bitstr.size()) != n) throw parse_error("smoothing length mismatch", lineno);
        Gen g;
        for (int i = 0; i < n; ++i)
            if (bitstr[size_t(i)] == '1') g.bits |= u64(1) << i;
        LoopSet lsec = resolve(*d, Smoothing{g.bits, n});
        std::istringstream labs(rest.substr(bar + 1, rb - bar - 1));
        std::string item;
        std::set<int> seen;
        int count = 0;
        while (std::getline(labs, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos) throw parse_error("expected loop:label", lineno);
            std::string idtok, lab;
            {
                std::istringstream t(item.substr(0, colon));
                t >> idtok;
            }
            {
                std::istringstream t(item.substr(colon + 1));
                t >> lab;
            }
            int id = idtok.empty() ? -1 : std::stoi(idtok.substr(idtok[0] == 'a' ? 1 : 0));
            int idx = lsec.index_of_id(id);
            if (idx < 0) throw parse_error("no loop with id a" + std::to_string(id), lineno);
            if (!seen.insert(idx).second) throw parse_error("duplicate loop label", lineno);
            if (lab == "x")
                g.labels |= u64(1) << idx;
            else if (lab != "1")
                throw parse_error("label must be 1 or x", lineno);
            ++count;
        }
        if (count != int(lsec.loops.size()))
            throw parse_error("labeling must cover all " + std::to_string(lsec.loops.size()) + " loops", lineno);
        c.add(g, coef);
    }
    return c;
}

}  // namespace kh
