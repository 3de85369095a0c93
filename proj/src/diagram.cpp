#include "kh/diagram.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace kh {

int LoopSet::index_of(int arc) const {
    for (size_t i = 0; i < loops.size(); ++i)
        if (std::binary_search(loops[i].arcs.begin(), loops[i].arcs.end(), arc)) return int(i);
    return -1;
}

int LoopSet::index_of_id(int id) const {
    for (size_t i = 0; i < loops.size(); ++i)
        if (loops[i].id == id) return int(i);
    return -1;
}

std::vector<int> Diagram::arcs() const {
    std::set<int> s(free_loops.begin(), free_loops.end());
    for (auto& c : crossings)
        for (int a : c.slot) s.insert(a);
    return {s.begin(), s.end()};
}

int Diagram::n_arcs() const { return int(arcs().size()); }

int Diagram::max_arc() const {
    int m = 0;
    for (int a : arcs()) m = std::max(m, a);
    return m;
}

void Diagram::validate() const {
    // every arc id: exactly two crossing-slot occurrences, or one free-loop record
    std::map<int, int> occ;
    for (auto& c : crossings) {
        if (c.sign != 1 && c.sign != -1) throw parse_error("crossing sign must be + or -");
        for (int a : c.slot) {
            if (a <= 0) throw parse_error("arc ids must be positive");
            occ[a]++;
        }
    }
    std::set<int> fl;
    for (int a : free_loops) {
        if (a <= 0) throw parse_error("arc ids must be positive");
        if (!fl.insert(a).second) throw parse_error("duplicate free loop arc a" + std::to_string(a));
        if (occ.count(a)) throw parse_error("free loop arc a" + std::to_string(a) + " also meets a crossing");
    }
    for (auto& [a, k] : occ)
        if (k != 2) throw parse_error("dangling arc a" + std::to_string(a) + " (appears " + std::to_string(k) +
                                      " times, expected 2)");
    // orientation: each arc incoming at exactly one of its two slot ends
    std::map<int, int> in_count, out_count;
    for (size_t ci = 0; ci < crossings.size(); ++ci) {
        in_count[under_in(ci)]++;
        in_count[over_in(ci)]++;
        out_count[under_out(ci)]++;
        out_count[over_out(ci)]++;
    }
    for (auto& [a, k] : occ) {
        if (in_count[a] != 1 || out_count[a] != 1)
            throw parse_error("inconsistent orientation at arc a" + std::to_string(a));
    }
}

std::vector<std::vector<int>> Diagram::components() const {
    // strand-mates: under_in <-> under_out, over_in <-> over_out
    std::map<int, int> parent;
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (int a : arcs()) parent[a] = a;
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    for (size_t ci = 0; ci < crossings.size(); ++ci) {
        unite(under_in(ci), under_out(ci));
        unite(over_in(ci), over_out(ci));
    }
    std::map<int, std::vector<int>> comp;
    for (int a : arcs()) comp[find(a)].push_back(a);
    std::vector<std::vector<int>> out;
    for (auto& [r, v] : comp) {
        std::sort(v.begin(), v.end());
        out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

u64 Diagram::content_hash() const { return fnv1a(emit_diagram(*this)); }

int slot_for(int sign, char vert, char horiz) {
    // counterclockwise from the incoming under-strand
    if (sign > 0) {
        if (vert == 'B') return horiz == 'R' ? 0 : 3;
        return horiz == 'R' ? 1 : 2;
    }
    if (vert == 'B') return horiz == 'R' ? 1 : 0;
    return horiz == 'R' ? 2 : 3;
}

std::pair<int, int> crossing_counts(const Diagram& d) {
    int p = 0, n = 0;
    for (auto& c : d.crossings) (c.sign > 0 ? p : n)++;
    return {p, n};
}

int writhe(const Diagram& d) {
    auto [p, n] = crossing_counts(d);
    return p - n;
}

Smoothing oriented_smoothing(const Diagram& d) {
    Smoothing s;
    s.size = int(d.crossings.size());
    for (size_t i = 0; i < d.crossings.size(); ++i)
        if (d.crossings[i].sign < 0) s.bits |= (u64(1) << i);
    return s;
}

LoopSet resolve(const Diagram& d, const Smoothing& s) {
    if (s.size != int(d.crossings.size()))
        throw std::invalid_argument("smoothing length " + std::to_string(s.size) + " != crossing count " +
                                    std::to_string(d.crossings.size()));
    if (d.crossings.size() > 64) throw budget_error("more than 64 crossings", d.crossings.size());

    std::map<int, int> parent;
    for (int a : d.arcs()) parent[a] = a;
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    for (size_t i = 0; i < d.crossings.size(); ++i) {
        auto& sl = d.crossings[i].slot;
        if (!s.bit(int(i))) {
            unite(sl[0], sl[1]);
            unite(sl[2], sl[3]);
        } else {
            unite(sl[0], sl[3]);
            unite(sl[1], sl[2]);
        }
    }

    std::map<int, LoopSet::Loop> by_root;
    for (int a : d.arcs()) {
        auto& lp = by_root[find(a)];
        lp.arcs.push_back(a);
    }
    for (size_t i = 0; i < d.crossings.size(); ++i) {
        int r = find(d.crossings[i].slot[0]);
        // both resolved pairs at a crossing may lie in different loops
        int r2 = find(d.crossings[i].slot[2]);
        for (int root : {r, r2}) {
            if (!s.bit(int(i)))
                by_root[root].tracing0 = true;
            else
                by_root[root].tracing1 = true;
        }
    }

    LoopSet out;
    for (auto& [root, lp] : by_root) {
        std::sort(lp.arcs.begin(), lp.arcs.end());
        lp.id = lp.arcs.front();
        out.loops.push_back(std::move(lp));
    }
    std::sort(out.loops.begin(), out.loops.end(),
              [](const LoopSet::Loop& a, const LoopSet::Loop& b) { return a.id < b.id; });
    return out;
}

namespace {

struct LineReader {
    std::istringstream in;
    int lineno = 0;
    explicit LineReader(const std::string& s) : in(s) {}
    std::optional<std::string> next() {
        std::string line;
        while (std::getline(in, line)) {
            ++lineno;
            auto h = line.find('#');
            if (h != std::string::npos) line.erase(h);
            size_t b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            size_t e = line.find_last_not_of(" \t\r");
            return line.substr(b, e - b + 1);
        }
        return std::nullopt;
    }
};

int parse_arc_id(const std::string& tok, int lineno) {
    size_t i = (!tok.empty() && tok[0] == 'a') ? 1 : 0;
    try {
        size_t pos = 0;
        int v = std::stoi(tok.substr(i), &pos);
        if (pos != tok.size() - i || v <= 0) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw parse_error("bad arc id '" + tok + "'", lineno);
    }
}

}  // namespace

Diagram parse_diagram(const std::string& text) {
    LineReader rd(text);
    Diagram d;
    auto first = rd.next();
    if (!first) return d;  // empty source -> empty diagram
    std::istringstream hs(*first);
    std::string kw;
    long ncross = -1;
    hs >> kw >> ncross;
    if (kw != "crossings" || ncross < 0 || !hs)
        throw parse_error("expected header 'crossings N'", rd.lineno);
    if (ncross > 64) throw budget_error("more than 64 crossings", u64(ncross));
    for (long i = 0; i < ncross; ++i) {
        auto line = rd.next();
        if (!line) throw parse_error("expected " + std::to_string(ncross) + " crossing lines", rd.lineno);
        std::istringstream ls(*line);
        std::string sgn;
        ls >> sgn;
        Crossing c;
        if (sgn == "+")
            c.sign = +1;
        else if (sgn == "-")
            c.sign = -1;
        else
            throw parse_error("crossing line must start with + or -", rd.lineno);
        std::string t;
        for (int k = 0; k < 4; ++k) {
            if (!(ls >> t)) throw parse_error("crossing needs four arc ids", rd.lineno);
            c.slot[k] = parse_arc_id(t, rd.lineno);
        }
        if (ls >> t) throw parse_error("trailing token '" + t + "'", rd.lineno);
        d.crossings.push_back(c);
    }
    std::vector<std::vector<int>> declared_comps;
    while (auto line = rd.next()) {
        std::istringstream ls(*line);
        std::string w;
        ls >> w;
        if (w == "loop") {
            std::string t;
            if (!(ls >> t)) throw parse_error("loop line needs an arc id", rd.lineno);
            d.free_loops.push_back(parse_arc_id(t, rd.lineno));
        } else if (w == "comp") {
            std::vector<int> comp;
            std::string t;
            while (ls >> t) comp.push_back(parse_arc_id(t, rd.lineno));
            std::sort(comp.begin(), comp.end());
            declared_comps.push_back(comp);
        } else {
            throw parse_error("unknown directive '" + w + "'", rd.lineno);
        }
    }
    std::sort(d.free_loops.begin(), d.free_loops.end());
    d.validate();
    if (!declared_comps.empty()) {
        for (int a : d.free_loops) declared_comps.push_back({a});
        std::sort(declared_comps.begin(), declared_comps.end());
        if (declared_comps != d.components())
            throw parse_error("declared components do not match the diagram's strand structure");
    }
    return d;
}

std::string emit_diagram(const Diagram& d) {
    std::ostringstream os;
    os << "crossings " << d.crossings.size() << "\n";
    for (auto& c : d.crossings) {
        os << (c.sign > 0 ? "+" : "-");
        for (int a : c.slot) os << " a" << a;
        os << "\n";
    }
    for (auto& comp : d.components()) {
        bool is_free = comp.size() == 1 && std::binary_search(d.free_loops.begin(), d.free_loops.end(), comp[0]);
        if (is_free) continue;
        os << "comp";
        for (int a : comp) os << " a" << a;
        os << "\n";
    }
    for (int a : d.free_loops) os << "loop a" << a << "\n";
    return os.str();
}

}  // namespace kh
