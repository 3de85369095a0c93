#include "kh/cobordism.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace kh {

namespace {

struct SlotRef {
    int ci = -1, slot = -1;
};

std::vector<SlotRef> occurrences(const Diagram& d, int arc) {
    std::vector<SlotRef> out;
    for (size_t ci = 0; ci < d.crossings.size(); ++ci)
        for (int s = 0; s < 4; ++s)
            if (d.crossings[ci].slot[size_t(s)] == arc) out.push_back({int(ci), s});
    return out;
}

bool slot_incoming(const Diagram& d, int ci, int slot) {
    int sign = d.crossings[size_t(ci)].sign;
    switch (slot) {
        case 0: return true;   // under-in
        case 2: return false;  // under-out
        case 1: return sign < 0;
        default: return sign > 0;  // slot 3
    }
}

// slot indices by corner, depending on the crossing sign
int slot_BR(int sign) { return sign > 0 ? 0 : 1; }
int slot_TR(int sign) { return sign > 0 ? 1 : 2; }
int slot_TL(int sign) { return sign > 0 ? 2 : 3; }
int slot_BL(int sign) { return sign > 0 ? 3 : 0; }

SlotRef incoming_end(const Diagram& d, int arc) {
    for (auto& r : occurrences(d, arc))
        if (slot_incoming(d, r.ci, r.slot)) return r;
    return {};
}

u64 splice_bit(u64 bits, int pos) {
    u64 low = bits & ((u64(1) << pos) - 1);
    u64 high = bits >> (pos + 1);
    return low | (high << pos);
}

u64 insert_bit(u64 bits, int pos, bool value) {
    u64 low = bits & ((u64(1) << pos) - 1);
    u64 high = bits >> pos;
    return low | (u64(value) << pos) | (high << (pos + 1));
}

// Removes crossings, fuses arc groups, deletes arcs; fused classes keep the
// minimal id; classes that lose all their crossing slots become free loops.
struct Surgery {
    Diagram post;
    std::map<int, int> arc_map;
    std::vector<int> cross_map;
};

Surgery remove_and_fuse(const Diagram& pre, const std::vector<int>& remove,
                        const std::vector<std::vector<int>>& fuse_groups, const std::vector<int>& delete_arcs) {
    std::map<int, int> parent;
    for (int a : pre.arcs()) parent[a] = a;
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (auto& grp : fuse_groups)
        for (size_t i = 1; i < grp.size(); ++i) parent[find(grp[0])] = find(grp[i]);
    std::map<int, int> rep;  // root -> min member
    for (int a : pre.arcs()) {
        int r = find(a);
        auto it = rep.find(r);
        if (it == rep.end() || a < it->second) rep[r] = a;
    }
    std::set<int> removed(remove.begin(), remove.end());
    std::set<int> deleted(delete_arcs.begin(), delete_arcs.end());

    Surgery out;
    out.cross_map.assign(pre.crossings.size(), -1);
    int next = 0;
    for (size_t ci = 0; ci < pre.crossings.size(); ++ci) {
        if (removed.count(int(ci))) continue;
        Crossing c = pre.crossings[ci];
        for (int s = 0; s < 4; ++s) {
            int a = c.slot[size_t(s)];
            if (deleted.count(a)) throw invalid_move("deleted arc still used by a crossing");
            c.slot[size_t(s)] = rep[find(a)];
        }
        out.cross_map[ci] = next++;
        out.post.crossings.push_back(c);
    }
    for (int a : pre.arcs()) {
        if (deleted.count(a)) continue;
        out.arc_map[a] = rep[find(a)];
    }
    // free loops: classes with no remaining slot occurrences
    std::set<int> used;
    for (auto& c : out.post.crossings)
        for (int a : c.slot) used.insert(a);
    std::set<int> free_out;
    for (auto& [a, m] : out.arc_map)
        if (!used.count(m)) free_out.insert(m);
    out.post.free_loops.assign(free_out.begin(), free_out.end());
    return out;
}

std::function<int(int)> map_fn(const std::map<int, int>& m) {
    return [&m](int a) {
        auto it = m.find(a);
        return it == m.end() ? 0 : it->second;
    };
}

// loop set with one loop removed, plus mask compression
LoopSet drop_loop(const LoopSet& ls, int idx, u64& mask) {
    LoopSet out;
    u64 nm = 0;
    int k = 0;
    for (size_t i = 0; i < ls.loops.size(); ++i) {
        if (int(i) == idx) continue;
        out.loops.push_back(ls.loops[i]);
        if ((mask >> i) & 1) nm |= u64(1) << k;
        ++k;
    }
    mask = nm;
    return out;
}

}  // namespace

std::string event_str(const Event& e) {
    std::ostringstream os;
    switch (e.kind) {
        case EventKind::Birth: os << "birth"; break;
        case EventKind::Death: os << "death a" << e.a; break;
        case EventKind::Saddle: os << "saddle a" << e.a << " a" << e.b; break;
        case EventKind::Dot: os << "dot a" << e.a; break;
        case EventKind::R1Remove: os << "r1 c" << e.c1 + 1; break;
        case EventKind::R1Create: os << (e.sign > 0 ? "r1+inv a" : "r1-inv a") << e.a; break;
        case EventKind::R2Remove: os << "r2 c" << e.c1 + 1 << " c" << e.c2 + 1; break;
        case EventKind::R2Create:
            os << "r2inv a" << e.a << " a" << e.b << (e.sign > 0 ? " over" : " under");
            break;
        case EventKind::R3: os << "r3 c" << e.c1 + 1 << " c" << e.c2 + 1 << " c" << e.c3 + 1; break;
        case EventKind::Isotopy: {
            os << "isotopy";
            for (auto& [x, y] : e.arc_corr)
                if (x != y) os << " a" << x << ">a" << y;
            for (size_t i = 0; i < e.cross_corr.size(); ++i)
                if (e.cross_corr[i] != int(i)) os << " c" << i + 1 << ">c" << e.cross_corr[i] + 1;
            break;
        }
        case EventKind::Resolve: os << "resolve c" << e.c1 + 1; break;
    }
    return os.str();
}

namespace {

AppliedEvent apply_birth(std::shared_ptr<const Diagram> pre, const Event& ev) {
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    auto post = std::make_shared<Diagram>(*pre);
    int na = pre->max_arc() + 1;
    post->free_loops.push_back(na);
    std::sort(post->free_loops.begin(), post->free_loops.end());
    ae.post = post;
    for (int a : pre->arcs()) ae.arc_map[a] = a;
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < ae.cross_map.size(); ++i) ae.cross_map[i] = int(i);
    ae.chi = 1;
    return ae;
}

AppliedEvent apply_death(std::shared_ptr<const Diagram> pre, const Event& ev) {
    if (!std::binary_search(pre->free_loops.begin(), pre->free_loops.end(), ev.a))
        throw invalid_move("death site a" + std::to_string(ev.a) + " is not a crossingless loop");
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    auto post = std::make_shared<Diagram>(*pre);
    post->free_loops.erase(std::find(post->free_loops.begin(), post->free_loops.end(), ev.a));
    ae.post = post;
    for (int a : pre->arcs())
        if (a != ev.a) ae.arc_map[a] = a;
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < ae.cross_map.size(); ++i) ae.cross_map[i] = int(i);
    ae.chi = 1;
    return ae;
}

AppliedEvent apply_saddle(std::shared_ptr<const Diagram> pre, const Event& ev) {
    int a = ev.a, b = ev.b;
    auto arcs = pre->arcs();
    if (!std::binary_search(arcs.begin(), arcs.end(), a) || !std::binary_search(arcs.begin(), arcs.end(), b))
        throw invalid_move("saddle site arc missing");
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = -1;
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < ae.cross_map.size(); ++i) ae.cross_map[i] = int(i);
    bool fa = std::binary_search(pre->free_loops.begin(), pre->free_loops.end(), a);
    bool fb = std::binary_search(pre->free_loops.begin(), pre->free_loops.end(), b);
    auto post = std::make_shared<Diagram>(*pre);
    for (int x : pre->arcs()) ae.arc_map[x] = x;
    if (a == b) {
        // split off a fresh crossingless loop
        int na = pre->max_arc() + 1;
        post->free_loops.push_back(na);
        std::sort(post->free_loops.begin(), post->free_loops.end());
    } else if (fa || fb) {
        int keep = std::min(a, b), lose = std::max(a, b);
        auto& fl = post->free_loops;
        if (fa) fl.erase(std::find(fl.begin(), fl.end(), a));
        if (fb) fl.erase(std::find(fl.begin(), fl.end(), b));
        if (fa && fb) {
            fl.push_back(keep);
            std::sort(fl.begin(), fl.end());
        } else {
            // the surviving strand arc takes the minimal id
            for (auto& c : post->crossings)
                for (int s = 0; s < 4; ++s)
                    if (c.slot[size_t(s)] == lose) c.slot[size_t(s)] = keep;
        }
        ae.arc_map[a] = keep;
        ae.arc_map[b] = keep;
    } else {
        // exchange the incoming ends: start(a)->end(b) keeps id a
        SlotRef ia = incoming_end(*pre, a), ib = incoming_end(*pre, b);
        post->crossings[size_t(ia.ci)].slot[size_t(ia.slot)] = b;
        post->crossings[size_t(ib.ci)].slot[size_t(ib.slot)] = a;
    }
    post->validate();
    ae.post = post;
    return ae;
}

AppliedEvent apply_dot(std::shared_ptr<const Diagram> pre, const Event& ev) {
    auto arcs = pre->arcs();
    if (!std::binary_search(arcs.begin(), arcs.end(), ev.a)) throw invalid_move("dot site arc missing");
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.post = pre;
    for (int x : arcs) ae.arc_map[x] = x;
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < ae.cross_map.size(); ++i) ae.cross_map[i] = int(i);
    ae.chi = -2;
    return ae;
}

// curl pair preference: the resolve() construction puts the curl on
// (under-out, over-in); try that pair first
std::pair<int, int> find_curl(const Diagram& d, int ci) {
    auto& sl = d.crossings[size_t(ci)].slot;
    int sign = d.crossings[size_t(ci)].sign;
    std::vector<std::pair<int, int>> prefs;
    if (sign > 0)
        prefs = {{2, 3}, {0, 1}, {1, 2}, {3, 0}};
    else
        prefs = {{1, 2}, {3, 0}, {0, 1}, {2, 3}};
    for (auto [p, q] : prefs)
        if (sl[size_t(p)] == sl[size_t(q)]) return {p, q};
    throw invalid_move("crossing c" + std::to_string(ci + 1) + " is not a kink");
}

AppliedEvent apply_r1_remove(std::shared_ptr<const Diagram> pre, const Event& ev) {
    int ci = ev.c1;
    if (ci < 0 || ci >= int(pre->crossings.size())) throw invalid_move("no such crossing");
    auto [p, q] = find_curl(*pre, ci);
    auto& sl = pre->crossings[size_t(ci)].slot;
    int k = sl[size_t(p)];
    int sign = pre->crossings[size_t(ci)].sign;
    // orientation forces: positive kinks close the curl in the 0-smoothing
    bool circle_in_zero = ((p == 0 && q == 1) || (p == 2 && q == 3));
    if (circle_in_zero != (sign > 0)) throw invalid_move("kink chirality inconsistent with its sign");
    std::vector<int> others;
    for (int s = 0; s < 4; ++s)
        if (s != p && s != q) others.push_back(sl[size_t(s)]);
    int e = others[0], f = others[1];
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = 0;
    Surgery sg = remove_and_fuse(*pre, {ci}, {{e, f}}, {k});
    ae.post = std::make_shared<Diagram>(std::move(sg.post));
    ae.arc_map = std::move(sg.arc_map);
    ae.cross_map = std::move(sg.cross_map);
    ae.post->validate();
    return ae;
}

AppliedEvent apply_r1_create(std::shared_ptr<const Diagram> pre, const Event& ev) {
    int a = ev.a;
    auto arcs = pre->arcs();
    if (!std::binary_search(arcs.begin(), arcs.end(), a)) throw invalid_move("r1 creation arc missing");
    bool fa = std::binary_search(pre->free_loops.begin(), pre->free_loops.end(), a);
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = 0;
    auto post = std::make_shared<Diagram>(*pre);
    int k = pre->max_arc() + 1;
    int f = k + 1;
    Crossing c;
    c.sign = ev.sign;
    if (ev.sign > 0) {
        // pass strand: in at slot 0, out at slot 1; curl at (2,3)
        c.slot = {a, fa ? a : f, k, k};
    } else {
        // pass strand: in at slot 0, out at slot 3; curl at (1,2)
        c.slot = {a, k, k, fa ? a : f};
    }
    if (fa) {
        post->free_loops.erase(std::find(post->free_loops.begin(), post->free_loops.end(), a));
    } else {
        SlotRef ia = incoming_end(*pre, a);  // a's old end now belongs to f
        post->crossings[size_t(ia.ci)].slot[size_t(ia.slot)] = f;
    }
    post->crossings.push_back(c);
    post->validate();
    ae.post = post;
    for (int x : arcs) ae.arc_map[x] = x;
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < ae.cross_map.size(); ++i) ae.cross_map[i] = int(i);
    return ae;
}

AppliedEvent apply_r2_remove(std::shared_ptr<const Diagram> pre, const Event& ev) {
    int c = ev.c1, d = ev.c2;
    int nc = int(pre->crossings.size());
    if (c < 0 || d < 0 || c >= nc || d >= nc || c == d) throw invalid_move("bad r2 site");
    if (pre->crossings[size_t(c)].sign == pre->crossings[size_t(d)].sign)
        throw invalid_move("r2 pair must have opposite signs");
    auto slots_of = [&](int ci) { return pre->crossings[size_t(ci)].slot; };
    std::vector<int> shared;
    for (int x : slots_of(c))
        for (int y : slots_of(d))
            if (x == y && std::find(shared.begin(), shared.end(), x) == shared.end()) shared.push_back(x);
    int m, n;
    if (ev.a && ev.b) {
        // caller-disambiguated bigon (needed when the strands also share
        // their outer arcs)
        if (std::find(shared.begin(), shared.end(), ev.a) == shared.end() ||
            std::find(shared.begin(), shared.end(), ev.b) == shared.end() || ev.a == ev.b)
            throw invalid_move("named bigon arcs are not shared by the r2 pair");
        m = ev.a;
        n = ev.b;
    } else {
        if (shared.size() != 2) throw invalid_move("r2 pair shares " + std::to_string(shared.size()) +
                                                   " arcs; name the bigon arcs explicitly");
        m = shared[0];
        n = shared[1];
    }
    auto axis_under = [&](int ci, int arc) {
        auto sl = slots_of(ci);
        for (int s = 0; s < 4; ++s)
            if (sl[size_t(s)] == arc) return s == 0 || s == 2;
        throw invalid_move("arc not at crossing");
    };
    if (axis_under(c, m) != axis_under(d, m) || axis_under(c, n) != axis_under(d, n) ||
        axis_under(c, m) == axis_under(c, n))
        throw invalid_move("r2 pair strands are not a removable bigon");
    auto externals = [&](int ci, int arc) {
        // the other arc on the same axis
        auto sl = slots_of(ci);
        bool under = axis_under(ci, arc);
        std::vector<int> ax = under ? std::vector<int>{sl[0], sl[2]} : std::vector<int>{sl[1], sl[3]};
        return ax[0] == arc ? ax[1] : ax[0];
    };
    int em_c = externals(c, m), em_d = externals(d, m);
    int en_c = externals(c, n), en_d = externals(d, n);
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = 0;
    ae.bigon_m = m;
    ae.bigon_n = n;
    Surgery sg = remove_and_fuse(*pre, {c, d}, {{em_c, m, em_d}, {en_c, n, en_d}}, {});
    ae.post = std::make_shared<Diagram>(std::move(sg.post));
    ae.arc_map = std::move(sg.arc_map);
    ae.cross_map = std::move(sg.cross_map);
    ae.post->validate();
    return ae;
}

// sign > 0: the first new crossing is positive (a passes over b, then back);
// sign < 0: the first new crossing is negative. Both bigon chiralities are
// needed when the creation realizes a braid-word insertion of sigma sigma^-1
// or sigma^-1 sigma.
AppliedEvent apply_r2_create(std::shared_ptr<const Diagram> pre, const Event& ev) {
    int a = ev.a, b = ev.b;
    if (a == b) throw invalid_move("r2 creation needs two distinct arcs");
    auto arcs = pre->arcs();
    if (!std::binary_search(arcs.begin(), arcs.end(), a) || !std::binary_search(arcs.begin(), arcs.end(), b))
        throw invalid_move("r2 creation arc missing");
    bool fa = std::binary_search(pre->free_loops.begin(), pre->free_loops.end(), a);
    bool fb = std::binary_search(pre->free_loops.begin(), pre->free_loops.end(), b);
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = 0;
    auto post = std::make_shared<Diagram>(*pre);
    int base = pre->max_arc();
    int mA = base + 1, mB = base + 2;
    int a2 = fa ? a : base + 3;
    int b2 = fb ? b : base + (fa ? 3 : 4);
    Crossing cc, dd;
    if (ev.sign > 0) {
        cc.sign = +1;
        cc.slot = {b, mA, mB, a};
        dd.sign = -1;
        dd.slot = {mB, mA, b2, a2};
    } else {
        cc.sign = -1;
        cc.slot = {a, b, mA, mB};
        dd.sign = +1;
        dd.slot = {mA, b2, a2, mB};
    }
    if (fa)
        post->free_loops.erase(std::find(post->free_loops.begin(), post->free_loops.end(), a));
    else {
        SlotRef ia = incoming_end(*pre, a);
        post->crossings[size_t(ia.ci)].slot[size_t(ia.slot)] = a2;
    }
    if (fb)
        post->free_loops.erase(std::find(post->free_loops.begin(), post->free_loops.end(), b));
    else {
        SlotRef ib = incoming_end(*pre, b);
        post->crossings[size_t(ib.ci)].slot[size_t(ib.slot)] = b2;
    }
    post->crossings.push_back(cc);
    post->crossings.push_back(dd);
    post->validate();
    ae.post = post;
    ae.bigon_m = mA;
    ae.bigon_n = mB;
    for (int x : arcs) ae.arc_map[x] = x;
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < ae.cross_map.size(); ++i) ae.cross_map[i] = int(i);
    return ae;
}

AppliedEvent apply_isotopy(std::shared_ptr<const Diagram> pre, const Event& ev) {
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = 0;
    auto arcs = pre->arcs();
    std::map<int, int> am;
    for (int x : arcs) {
        auto it = ev.arc_corr.find(x);
        am[x] = (it == ev.arc_corr.end()) ? x : it->second;
    }
    std::set<int> targets;
    for (auto& [x, y] : am)
        if (!targets.insert(y).second) throw invalid_move("isotopy arc correspondence is not a bijection");
    std::vector<int> cm(pre->crossings.size());
    for (size_t i = 0; i < cm.size(); ++i) cm[i] = int(i);
    if (!ev.cross_corr.empty()) {
        if (ev.cross_corr.size() != pre->crossings.size()) throw invalid_move("isotopy crossing map size mismatch");
        cm = ev.cross_corr;
        std::set<int> seen;
        for (int v : cm)
            if (v < 0 || v >= int(cm.size()) || !seen.insert(v).second)
                throw invalid_move("isotopy crossing map is not a permutation");
    }
    auto post = std::make_shared<Diagram>();
    post->crossings.resize(pre->crossings.size());
    for (size_t i = 0; i < pre->crossings.size(); ++i) {
        Crossing c = pre->crossings[i];
        for (int s = 0; s < 4; ++s) c.slot[size_t(s)] = am[c.slot[size_t(s)]];
        post->crossings[size_t(cm[i])] = c;
    }
    for (int fl : pre->free_loops) post->free_loops.push_back(am[fl]);
    std::sort(post->free_loops.begin(), post->free_loops.end());
    post->validate();
    ae.post = post;
    ae.arc_map = am;
    ae.cross_map = cm;
    return ae;
}

// Braid-like triangle move on three consecutively enumerated crossings of
// equal sign. The induced map was derived by delooping the circle smoothing
// of the cube and Gaussian-eliminating the two contractible pairs; the
// surviving retract/section composites give the row programs interpreted in
// map_gen_r3.
AppliedEvent apply_r3(std::shared_ptr<const Diagram> pre, const Event& ev) {
    int c1 = ev.c1, c2 = ev.c2, c3 = ev.c3;
    int nc = int(pre->crossings.size());
    if (c1 < 0 || c3 >= nc || c2 != c1 + 1 || c3 != c2 + 1)
        throw invalid_move("r3 needs three consecutively enumerated crossings");
    int s1 = pre->crossings[size_t(c1)].sign;
    if (pre->crossings[size_t(c2)].sign != s1 || pre->crossings[size_t(c3)].sign != s1)
        throw invalid_move("mixed-sign triangles must be rewritten through R2 detours");
    auto slot = [&](int ci, int s) { return pre->crossings[size_t(ci)].slot[size_t(s)]; };
    int TR1 = slot(c1, slot_TR(s1)), TL1 = slot(c1, slot_TL(s1));
    int BL2 = slot(c2, slot_BL(s1)), BR2 = slot(c2, slot_BR(s1));

    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = 0;
    ae.r3_case = s1;

    int B1, B2, B3, T1, T2, T3, s12, s13, s23;
    if (TR1 == BL2) {
        // middle crossing up-right
        ae.r3_swap = false;
        s12 = TR1;
        s13 = TL1;
        B1 = slot(c1, slot_BL(s1));
        B2 = slot(c1, slot_BR(s1));
        B3 = BR2;
        s23 = slot(c2, slot_TL(s1));
        T3 = slot(c2, slot_TR(s1));
        if (slot(c3, slot_BL(s1)) != s13 || slot(c3, slot_BR(s1)) != s23)
            throw invalid_move("r3 site is not a braid-like triangle");
        T1 = slot(c3, slot_TL(s1));
        T2 = slot(c3, slot_TR(s1));
    } else if (TL1 == BR2) {
        // middle crossing up-left
        ae.r3_swap = true;
        s12 = TL1;
        s13 = TR1;
        B2 = slot(c1, slot_BL(s1));
        B3 = slot(c1, slot_BR(s1));
        B1 = BL2;
        T1 = slot(c2, slot_TL(s1));
        s23 = slot(c2, slot_TR(s1));
        if (slot(c3, slot_BL(s1)) != s23 || slot(c3, slot_BR(s1)) != s13)
            throw invalid_move("r3 site is not a braid-like triangle");
        T2 = slot(c3, slot_TL(s1));
        T3 = slot(c3, slot_TR(s1));
    } else
        throw invalid_move("r3 crossings c1,c2 share no arc");

    auto post = std::make_shared<Diagram>(*pre);
    auto set = [&](int ci, int corner, int arc) { post->crossings[size_t(ci)].slot[size_t(corner)] = arc; };
    auto build = [&](int ci, int bl, int br, int tl, int tr) {
        set(ci, slot_BL(s1), bl);
        set(ci, slot_BR(s1), br);
        set(ci, slot_TL(s1), tl);
        set(ci, slot_TR(s1), tr);
    };
    if (!ae.r3_swap) {
        build(c1, B2, B3, s12, s13);
        build(c2, B1, s12, T1, s23);
        build(c3, s23, s13, T2, T3);
    } else {
        build(c1, B1, B2, s13, s12);
        build(c2, s12, B3, s23, T3);
        build(c3, s13, s23, T1, T2);
    }
    post->validate();
    ae.post = post;
    ae.r3_internal = {s12, s13, s23};
    for (int x : pre->arcs())
        if (x != s12 && x != s13 && x != s23) ae.arc_map[x] = x;
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < ae.cross_map.size(); ++i) ae.cross_map[i] = int(i);
    return ae;
}

AppliedEvent apply_resolve(std::shared_ptr<const Diagram> pre, const Event& ev) {
    auto evs = resolve_crossing_events(*pre, ev.c1);
    AppliedEvent ae;
    ae.ev = ev;
    ae.pre = pre;
    ae.chi = -1;
    std::shared_ptr<const Diagram> cur = pre;
    for (auto& e : evs) {
        ae.expansion.push_back(apply_event(cur, e));
        cur = ae.expansion.back().post;
    }
    ae.post = cur;
    // composed correspondences
    for (int x : pre->arcs()) {
        int y = x;
        bool alive = true;
        for (auto& step : ae.expansion) {
            auto it = step.arc_map.find(y);
            if (it == step.arc_map.end()) {
                alive = false;
                break;
            }
            y = it->second;
        }
        if (alive) ae.arc_map[x] = y;
    }
    ae.cross_map.resize(pre->crossings.size());
    for (size_t i = 0; i < pre->crossings.size(); ++i) {
        int y = int(i);
        for (auto& step : ae.expansion) {
            if (y < 0) break;
            y = step.cross_map[size_t(y)];
        }
        ae.cross_map[i] = y;
    }
    return ae;
}

}  // namespace

Event make_alignment_isotopy(const Diagram& from, const Diagram& to) {
    if (from.crossings.size() != to.crossings.size() || from.free_loops.size() != to.free_loops.size())
        throw invalid_move("alignment: diagrams differ structurally");
    Event e{EventKind::Isotopy};
    for (size_t ci = 0; ci < from.crossings.size(); ++ci) {
        if (from.crossings[ci].sign != to.crossings[ci].sign) throw invalid_move("alignment: sign mismatch");
        for (int s = 0; s < 4; ++s) {
            int a = from.crossings[ci].slot[size_t(s)];
            int b = to.crossings[ci].slot[size_t(s)];
            auto it = e.arc_corr.find(a);
            if (it != e.arc_corr.end() && it->second != b) throw invalid_move("alignment: inconsistent arc match");
            e.arc_corr[a] = b;
        }
    }
    for (size_t i = 0; i < from.free_loops.size(); ++i) e.arc_corr[from.free_loops[i]] = to.free_loops[i];
    return e;
}

std::vector<Event> resolve_crossing_events(const Diagram& d, int crossing) {
    if (crossing < 0 || crossing >= int(d.crossings.size())) throw invalid_move("no such crossing");
    int uo = d.under_out(crossing);
    int oi = d.over_in(crossing);
    Event s{EventKind::Saddle};
    s.a = std::min(uo, oi);
    s.b = std::max(uo, oi);
    Event r{EventKind::R1Remove};
    r.c1 = crossing;  // saddles do not renumber crossings
    return {s, r};
}

AppliedEvent apply_event(std::shared_ptr<const Diagram> pre, const Event& ev) {
    switch (ev.kind) {
        case EventKind::Birth: return apply_birth(pre, ev);
        case EventKind::Death: return apply_death(pre, ev);
        case EventKind::Saddle: return apply_saddle(pre, ev);
        case EventKind::Dot: return apply_dot(pre, ev);
        case EventKind::R1Remove: return apply_r1_remove(pre, ev);
        case EventKind::R1Create: return apply_r1_create(pre, ev);
        case EventKind::R2Remove: return apply_r2_remove(pre, ev);
        case EventKind::R2Create: return apply_r2_create(pre, ev);
        case EventKind::Isotopy: return apply_isotopy(pre, ev);
        case EventKind::R3: return apply_r3(pre, ev);
        case EventKind::Resolve: return apply_resolve(pre, ev);
    }
    throw std::logic_error("unknown event kind");
}

// ---------------------------------------------------------------------------
// chain maps

namespace {

Chain map_gen(const AppliedEvent& ae, const Gen& g, i64 coef);

Chain map_gen_birth(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int newarc = 0;
    for (int fl : ae.post->free_loops)
        if (!std::binary_search(ae.pre->free_loops.begin(), ae.pre->free_loops.end(), fl)) newarc = fl;
    LoopSet post = resolve(*ae.post, Smoothing{g.bits, int(ae.post->crossings.size())});
    int j = post.index_of(newarc);
    u64 labels = insert_bit(g.labels, j, 0);  // new loop labeled 1
    out.add(Gen{g.bits, labels}, coef);
    return out;
}

Chain map_gen_death(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, int(ae.pre->crossings.size())});
    int i = pre.index_of(ae.ev.a);
    if (!((g.labels >> i) & 1)) return out;  // eps(1) = 0
    u64 labels = splice_bit(g.labels, i);
    out.add(Gen{g.bits, labels}, coef);
    return out;
}

Chain map_gen_dot(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, int(ae.pre->crossings.size())});
    int i = pre.index_of(ae.ev.a);
    if ((g.labels >> i) & 1) return out;  // dot kills x
    out.add(Gen{g.bits, g.labels | (u64(1) << i)}, checked_mul(coef, 2));
    return out;
}

Chain map_gen_saddle(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int n = int(ae.pre->crossings.size());
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, n});
    LoopSet post = resolve(*ae.post, Smoothing{g.bits, n});
    int a = ae.ev.a, b = ae.ev.b;
    int ia = pre.index_of(a), ib = pre.index_of(b);
    auto am = map_fn(ae.arc_map);
    // base mask over unaffected loops
    u64 base = 0;
    for (size_t i = 0; i < pre.loops.size(); ++i) {
        if (int(i) == ia || int(i) == ib) continue;
        int rep = 0;
        for (int arc : pre.loops[i].arcs)
            if (arc != a && arc != b) {
                rep = arc;
                break;
            }
        if (!rep) throw std::logic_error("saddle: unaffected loop without representative");
        int j = post.index_of(am(rep));
        if ((g.labels >> i) & 1) base |= u64(1) << j;
    }
    if (ia != ib) {
        bool xa = (g.labels >> ia) & 1, xb = (g.labels >> ib) & 1;
        if (xa && xb) return out;  // m(x,x)=0
        int j = post.index_of(am(a));
        u64 lab = base;
        if (xa || xb) lab |= u64(1) << j;
        out.add(Gen{g.bits, lab}, coef);
        return out;
    }
    // split
    int pa = am(a);
    int pb;
    if (a == b) {
        // the fresh crossingless loop
        pb = 0;
        for (int fl : ae.post->free_loops)
            if (fl > ae.pre->max_arc()) pb = fl;
        if (!pb) throw std::logic_error("saddle split: missing fresh loop");
    } else {
        pb = ae.arc_map.at(b);
    }
    int j1 = post.index_of(pa), j2 = post.index_of(pb);
    if (j1 == j2) throw std::logic_error("saddle split landed in one loop");
    bool x = (g.labels >> ia) & 1;
    if (x) {
        out.add(Gen{g.bits, base | (u64(1) << j1) | (u64(1) << j2)}, coef);
    } else {
        out.add(Gen{g.bits, base | (u64(1) << j2)}, coef);
        out.add(Gen{g.bits, base | (u64(1) << j1)}, coef);
    }
    return out;
}

Chain map_gen_r1_remove(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int ci = ae.ev.c1;
    int n = int(ae.pre->crossings.size());
    int sign = ae.pre->crossings[size_t(ci)].sign;
    bool bit = (g.bits >> ci) & 1;
    bool circle_bit = sign < 0;  // circle sits in the 1-smoothing for negative kinks
    if (bit != circle_bit) return out;
    auto [p, q] = find_curl(*ae.pre, ci);
    (void)q;
    int k = ae.pre->crossings[size_t(ci)].slot[size_t(p)];
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, n});
    int ik = pre.index_of(k);
    if (pre.loops[size_t(ik)].arcs.size() != 1) throw std::logic_error("r1 circle is not the bare curl");
    bool circle_x = (g.labels >> ik) & 1;
    u64 rest = g.labels;
    LoopSet pre2 = drop_loop(pre, ik, rest);
    u64 bits_post = splice_bit(g.bits, ci);
    LoopSet post = resolve(*ae.post, Smoothing{bits_post, n - 1});
    auto am_map = ae.arc_map;
    auto res = transport_labels(pre2, rest, post, map_fn(am_map));
    if (res.size() != 1 || res[0].second != 1) throw std::logic_error("r1 transport is not a relabel");
    u64 lab = res[0].first;
    if (sign > 0) {
        if (!circle_x) return out;  // eps(1) = 0
        out.add(Gen{bits_post, lab}, coef);
        return out;
    }
    // negative kink: (pass,1) -> pass ; (pass,x) -> -x*pass
    if (!circle_x) {
        out.add(Gen{bits_post, lab}, coef);
        return out;
    }
    // the pass loop runs through the crossing's non-curl slots
    int e = 0;
    auto& sl = ae.pre->crossings[size_t(ci)].slot;
    for (int s = 0; s < 4; ++s)
        if (sl[size_t(s)] != k) {
            e = sl[size_t(s)];
            break;
        }
    int jp = post.index_of(ae.arc_map.at(e));
    if ((lab >> jp) & 1) return out;  // x -> x^2 = 0
    out.add(Gen{bits_post, lab | (u64(1) << jp)}, -coef);
    return out;
}

Chain map_gen_r1_create(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int n = int(ae.pre->crossings.size());
    int sign = ae.ev.sign;
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, n});
    int ipass = pre.index_of(ae.ev.a);
    bool circle_bit = sign < 0;
    u64 bits_post = g.bits | (u64(circle_bit) << n);
    LoopSet post = resolve(*ae.post, Smoothing{bits_post, n + 1});
    int k = ae.post->crossings[size_t(n)].slot[ae.ev.sign > 0 ? 2 : 1];  // curl arc
    int jk = post.index_of(k);
    // transport the old labels (pure relabel)
    u64 base = 0;
    int jpass = -1;
    for (size_t i = 0; i < pre.loops.size(); ++i) {
        int rep = pre.loops[i].arcs.front();
        int j = post.index_of(rep);
        if (j == jk) throw std::logic_error("r1 creation: label landed on the curl");
        if ((g.labels >> i) & 1) base |= u64(1) << j;
        if (int(i) == ipass) jpass = j;
    }
    if (sign < 0) {
        out.add(Gen{bits_post, base}, coef);  // circle labeled 1
        return out;
    }
    // positive creation: 1/2( birth+dot on circle  -  dot on pass, circle 1 )
    bool pass_x = (base >> jpass) & 1;
    std::map<Gen, i64> twice;
    twice[Gen{bits_post, base | (u64(1) << jk)}] += 2;
    if (!pass_x) twice[Gen{bits_post, base | (u64(1) << jpass)}] -= 2;
    for (auto& [gg, cc] : twice) {
        if (cc % 2 != 0) throw std::logic_error("r1 creation parity violation");
        out.add(gg, checked_mul(coef, cc / 2));
    }
    return out;
}

Chain map_gen_r2_remove(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int c = ae.ev.c1, d = ae.ev.c2;
    int n = int(ae.pre->crossings.size());
    bool or_c = ((g.bits >> c) & 1) == (ae.pre->crossings[size_t(c)].sign < 0);
    bool or_d = ((g.bits >> d) & 1) == (ae.pre->crossings[size_t(d)].sign < 0);
    if (or_c != or_d) return out;
    int lo = std::min(c, d), hi = std::max(c, d);
    u64 bits_post = splice_bit(splice_bit(g.bits, hi), lo);
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, n});
    LoopSet post = resolve(*ae.post, Smoothing{bits_post, n - 2});
    if (or_c) {
        // jointly oriented: pure relabel
        auto res = transport_labels(pre, g.labels, post, map_fn(ae.arc_map));
        if (res.size() != 1 || res[0].second != 1) throw std::logic_error("r2 oriented row is not a relabel");
        out.add(Gen{bits_post, res[0].first}, coef);
        return out;
    }
    // jointly disoriented: -(eps on the bigon circle, then one saddle)
    int icir = pre.index_of(ae.bigon_m);
    auto& circ = pre.loops[size_t(icir)].arcs;
    if (circ.size() != 2 || pre.index_of(ae.bigon_n) != icir)
        throw invalid_move("r2 site is not a planar bigon");
    bool cx = (g.labels >> icir) & 1;
    if (!cx) return out;  // eps(1) = 0
    u64 rest = g.labels;
    LoopSet pre2 = drop_loop(pre, icir, rest);
    for (auto& [lab, cc] : transport_labels(pre2, rest, post, map_fn(ae.arc_map)))
        out.add(Gen{bits_post, lab}, checked_mul(-coef, cc));
    return out;
}

Chain map_gen_r2_create(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int n = int(ae.pre->crossings.size());
    bool oc = ae.post->crossings[size_t(n)].sign < 0;      // oriented bit of the first new crossing
    bool od = ae.post->crossings[size_t(n) + 1].sign < 0;  // and of the second
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, n});
    // jointly oriented term
    {
        u64 bp = g.bits | (u64(oc) << n) | (u64(od) << (n + 1));
        LoopSet post = resolve(*ae.post, Smoothing{bp, n + 2});
        auto res = transport_labels(pre, g.labels, post, map_fn(ae.arc_map));
        if (res.size() != 1 || res[0].second != 1) throw std::logic_error("r2 creation oriented term");
        out.add(Gen{bp, res[0].first}, coef);
    }
    // jointly disoriented term: saddle the two strands, new circle labeled 1
    {
        u64 bp = g.bits | (u64(!oc) << n) | (u64(!od) << (n + 1));
        LoopSet post = resolve(*ae.post, Smoothing{bp, n + 2});
        int jc = post.index_of(ae.bigon_m);  // circle {mA, mB}
        if (post.loops[size_t(jc)].arcs.size() != 2) throw std::logic_error("r2 creation: bad circle");
        u64 dummy = 0;
        LoopSet post2 = drop_loop(post, jc, dummy);
        for (auto& [lab0, cc] : transport_labels(pre, g.labels, post2, map_fn(ae.arc_map))) {
            u64 lab = insert_bit(lab0, jc, 0);
            out.add(Gen{bp, lab}, checked_mul(coef, cc));
        }
    }
    return out;
}

Chain map_gen_isotopy(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int n = int(ae.pre->crossings.size());
    u64 bits_post = 0;
    for (int i = 0; i < n; ++i)
        if ((g.bits >> i) & 1) bits_post |= u64(1) << ae.cross_map[size_t(i)];
    // permutation sign on 1-bits
    int inv = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (((g.bits >> i) & 1) && ((g.bits >> j) & 1) && ae.cross_map[size_t(i)] > ae.cross_map[size_t(j)])
                ++inv;
    i64 sign = (inv % 2 == 0) ? 1 : -1;
    LoopSet pre = resolve(*ae.pre, Smoothing{g.bits, n});
    LoopSet post = resolve(*ae.post, Smoothing{bits_post, n});
    auto res = transport_labels(pre, g.labels, post, map_fn(ae.arc_map));
    if (res.size() != 1 || res[0].second != 1) throw std::logic_error("isotopy must relabel");
    out.add(Gen{bits_post, res[0].first}, checked_mul(coef, sign));
    return out;
}

Chain map_gen_composite(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain cur(ae.pre);
    cur.add(g, coef);
    for (auto& step : ae.expansion) cur = map_chain(step, cur);
    Chain out(ae.post);
    for (auto& [gg, cc] : cur.terms()) out.add(gg, cc);
    return out;
}

// R3 row programs: each term is a chain of partitions stepped through
// transport_labels, with optional circle removal at the start and circle
// insertion at the end.
struct R3Step {
    bool on_post;
    int b1, b2, b3;
};
struct R3Term {
    std::vector<R3Step> steps;
    bool add_circle;
    int coeff;
};
struct R3Row {
    bool needs_circle_x;  // row only acts on the x-labeled circle copy
    std::vector<R3Term> terms;
};

const R3Row* r3_row(int core, int b1, int b2, int b3) {
    // rows keyed by local bits (b1,b2,b3); identical programs for both
    // triangle orientations
    static const std::map<std::tuple<int, int, int, int>, R3Row> table = [] {
        std::map<std::tuple<int, int, int, int>, R3Row> t;
        auto P = [](int a, int b, int c) { return R3Step{false, a, b, c}; };
        auto Q = [](int a, int b, int c) { return R3Step{true, a, b, c}; };
        // positive core
        t[{+1, 0, 0, 0}] = {false, {{{Q(0, 0, 0)}, false, 1}}};
        t[{+1, 1, 0, 0}] = {false, {{{Q(0, 1, 0)}, false, 1}}};
        t[{+1, 0, 1, 0}] = {false, {{{Q(1, 0, 0)}, false, 1}, {{Q(0, 0, 1)}, false, 1}}};
        t[{+1, 1, 1, 0}] = {false,
                            {{{Q(0, 1, 1)}, false, 1},
                             {{Q(0, 1, 1), Q(1, 1, 1), Q(1, 0, 1)}, true, 1}}};
        t[{+1, 0, 1, 1}] = {false,
                            {{{Q(1, 1, 0)}, false, 1},
                             {{Q(1, 1, 0), Q(1, 1, 1), Q(1, 0, 1)}, true, 1}}};
        t[{+1, 0, 0, 1}] = {false, {}};
        t[{+1, 1, 1, 1}] = {false, {}};
        t[{+1, 1, 0, 1}] = {true,
                            {{{P(0, 0, 1), P(0, 1, 1), Q(1, 1, 0)}, false, -1},
                             {{P(0, 0, 1), P(0, 1, 1), Q(1, 1, 0), Q(1, 1, 1), Q(1, 0, 1)}, true, -1}}};
        // negative core
        t[{-1, 1, 1, 1}] = {false, {{{Q(1, 1, 1)}, false, 1}}};
        t[{-1, 1, 0, 1}] = {false, {{{Q(0, 1, 1)}, false, 1}}};
        t[{-1, 1, 1, 0}] = {false, {{{Q(1, 0, 1)}, false, 1}}};
        t[{-1, 0, 1, 1}] = {false, {{{Q(1, 0, 1)}, false, 1}}};
        t[{-1, 1, 0, 0}] = {false, {{{Q(0, 0, 1)}, false, 1}}};
        t[{-1, 0, 0, 1}] = {false,
                            {{{Q(1, 0, 0)}, false, 1},
                             {{Q(1, 0, 0), Q(1, 1, 0), Q(0, 1, 0)}, true, 1}}};
        t[{-1, 0, 0, 0}] = {false, {}};
        t[{-1, 0, 1, 0}] = {true,
                            {{{P(0, 0, 0), P(1, 0, 0), Q(0, 0, 1)}, false, -1},
                             {{P(0, 0, 0), P(0, 0, 1), Q(1, 0, 0)}, false, -1},
                             {{P(0, 0, 0), P(0, 0, 1), Q(1, 0, 0), Q(1, 1, 0), Q(0, 1, 0)}, true, -1}}};
        return t;
    }();
    auto it = table.find({core, b1, b2, b3});
    return it == table.end() ? nullptr : &it->second;
}

Chain map_gen_r3(const AppliedEvent& ae, const Gen& g, i64 coef) {
    Chain out(ae.post);
    int c1 = ae.ev.c1;
    int b1 = (g.bits >> c1) & 1, b2 = (g.bits >> (c1 + 1)) & 1, b3 = (g.bits >> (c1 + 2)) & 1;
    const R3Row* row = r3_row(ae.r3_case, b1, b2, b3);
    if (!row) throw std::logic_error("r3: missing row");
    if (row->terms.empty()) return out;
    u64 ext = g.bits & ~(u64(7) << c1);
    int n = int(ae.pre->crossings.size());
    auto& internal = ae.r3_internal;
    auto is_internal = [&](int a) { return a == internal[0] || a == internal[1] || a == internal[2]; };
    auto find_circle = [&](const LoopSet& ls) {
        for (size_t i = 0; i < ls.loops.size(); ++i) {
            bool all = true;
            for (int a : ls.loops[i].arcs) all &= is_internal(a);
            if (all) return int(i);
        }
        return -1;
    };
    auto with_bits = [&](int a, int b, int c) { return ext | (u64(a) << c1) | (u64(b) << (c1 + 1)) | (u64(c) << (c1 + 2)); };

    LoopSet start = resolve(*ae.pre, Smoothing{g.bits, n});
    u64 start_mask = g.labels;
    if (row->needs_circle_x) {
        int ic = find_circle(start);
        if (ic < 0) throw std::logic_error("r3: expected a circle smoothing");
        if (!((start_mask >> ic) & 1)) return out;  // the 1-labeled copy dies
        start = drop_loop(start, ic, start_mask);
    }

    for (auto& term : row->terms) {
        struct State {
            u64 mask;
            i64 c;
        };
        LoopSet held = start;
        std::vector<State> states{{start_mask, checked_mul(coef, term.coeff)}};
        bool crossed = false;  // whether we have moved from pre to post partitions
        for (size_t si = 0; si < term.steps.size(); ++si) {
            auto& st = term.steps[si];
            const Diagram& dg = st.on_post ? *ae.post : *ae.pre;
            u64 nb = with_bits(st.b1, st.b2, st.b3);
            LoopSet next = resolve(dg, Smoothing{nb, n});
            bool last = si + 1 == term.steps.size();
            int circ = -1;
            if (last && term.add_circle) {
                circ = find_circle(next);
                if (circ < 0) throw std::logic_error("r3: expected final circle");
            }
            LoopSet next_used = next;
            if (circ >= 0) {
                u64 dummy = 0;
                next_used = drop_loop(next, circ, dummy);
            }
            bool crossing_now = st.on_post && !crossed;
            std::function<int(int)> amap;
            if (crossing_now)
                amap = [&](int a) { return is_internal(a) ? 0 : a; };
            else
                amap = [](int a) { return a; };
            std::vector<State> nstates;
            for (auto& s : states)
                for (auto& [lab, cc] : transport_labels(held, s.mask, next_used, amap))
                    nstates.push_back({lab, checked_mul(s.c, cc)});
            states = std::move(nstates);
            if (circ >= 0)
                for (auto& s : states) s.mask = insert_bit(s.mask, circ, 0);
            held = (circ >= 0) ? next : next_used;
            if (st.on_post) crossed = true;
        }
        u64 fb = with_bits(term.steps.back().b1, term.steps.back().b2, term.steps.back().b3);
        for (auto& s : states) out.add(Gen{fb, s.mask}, s.c);
    }
    return out;
}

Chain map_gen(const AppliedEvent& ae, const Gen& g, i64 coef) {
    switch (ae.ev.kind) {
        case EventKind::Birth: return map_gen_birth(ae, g, coef);
        case EventKind::Death: return map_gen_death(ae, g, coef);
        case EventKind::Saddle: return map_gen_saddle(ae, g, coef);
        case EventKind::Dot: return map_gen_dot(ae, g, coef);
        case EventKind::R1Remove: return map_gen_r1_remove(ae, g, coef);
        case EventKind::R1Create: return map_gen_r1_create(ae, g, coef);
        case EventKind::R2Remove: return map_gen_r2_remove(ae, g, coef);
        case EventKind::R2Create: return map_gen_r2_create(ae, g, coef);
        case EventKind::Isotopy: return map_gen_isotopy(ae, g, coef);
        case EventKind::R3: return map_gen_r3(ae, g, coef);
        case EventKind::Resolve: return map_gen_composite(ae, g, coef);
    }
    throw std::logic_error("unknown event kind");
}

}  // namespace

Chain map_chain(const AppliedEvent& ae, const Chain& c) {
    Chain out(ae.post);
    for (auto& [g, coef] : c.terms()) out = out + map_gen(ae, g, coef);
    return out;
}

int Movie::chi() const {
    int x = 0;
    for (auto& e : events) x += e.chi;
    return x;
}

u64 Movie::content_hash() const {
    std::string s = emit_diagram(first());
    for (auto& e : events) s += event_str(e.ev) + "\n";
    return fnv1a(s);
}

Movie make_movie(std::shared_ptr<const Diagram> start, const std::vector<Event>& events) {
    Movie m;
    m.diagrams.push_back(start);
    for (size_t i = 0; i < events.size(); ++i) {
        AppliedEvent ae;
        try {
            ae = apply_event(m.diagrams.back(), events[i]);
        } catch (const invalid_move& e) {
            throw invalid_move("movie step " + std::to_string(i + 1) + " (" + event_str(events[i]) +
                               "): " + e.what());
        }
        m.diagrams.push_back(ae.post);
        m.events.push_back(std::move(ae));
    }
    return m;
}

Movie concatenate(const Movie& a, const Movie& b) {
    if (!(a.last() == b.first())) throw invalid_move("concatenate: endpoint diagrams differ");
    Movie m = a;
    for (auto& e : b.events) {
        m.events.push_back(e);
        m.diagrams.push_back(e.post);
    }
    return m;
}

namespace {

int want_arc(const std::string& tok, int lineno) {
    size_t i = (!tok.empty() && (tok[0] == 'a' || tok[0] == 'L')) ? 1 : 0;
    try {
        return std::stoi(tok.substr(i));
    } catch (...) {
        throw parse_error("bad arc id '" + tok + "'", lineno);
    }
}

int want_crossing(const std::string& tok, int lineno) {
    size_t i = (!tok.empty() && tok[0] == 'c') ? 1 : 0;
    try {
        int v = std::stoi(tok.substr(i));
        if (v < 1) throw std::invalid_argument("");
        return v - 1;
    } catch (...) {
        throw parse_error("bad crossing id '" + tok + "'", lineno);
    }
}

}  // namespace

Movie parse_movie(const std::string& text, const std::function<std::string(const std::string&)>& loader) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::shared_ptr<const Diagram> start;
    std::vector<Event> events;
    while (std::getline(in, line)) {
        ++lineno;
        auto hsh = line.find('#');
        if (hsh != std::string::npos) line.erase(hsh);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        if (kw == "diagram") {
            std::string name;
            if (!(ls >> name)) throw parse_error("diagram line needs a name", lineno);
            if (start) throw parse_error("duplicate diagram line", lineno);
            start = std::make_shared<Diagram>(parse_diagram(loader(name)));
            continue;
        }
        if (!start) throw parse_error("movie must declare its diagram first", lineno);
        Event e;
        std::string t, t2, t3;
        if (kw == "birth") {
            e.kind = EventKind::Birth;
        } else if (kw == "death") {
            e.kind = EventKind::Death;
            if (!(ls >> t)) throw parse_error("death needs a loop arc", lineno);
            e.a = want_arc(t, lineno);
        } else if (kw == "saddle") {
            e.kind = EventKind::Saddle;
            if (!(ls >> t >> t2)) throw parse_error("saddle needs two arcs", lineno);
            e.a = want_arc(t, lineno);
            e.b = want_arc(t2, lineno);
        } else if (kw == "dot") {
            e.kind = EventKind::Dot;
            if (!(ls >> t)) throw parse_error("dot needs an arc", lineno);
            e.a = want_arc(t, lineno);
        } else if (kw == "r1" || kw == "r1+" || kw == "r1-") {
            e.kind = EventKind::R1Remove;
            if (!(ls >> t)) throw parse_error("r1 needs a crossing", lineno);
            e.c1 = want_crossing(t, lineno);
            e.sign = (kw == "r1-") ? -1 : +1;
        } else if (kw == "r1+inv" || kw == "r1-inv") {
            e.kind = EventKind::R1Create;
            e.sign = (kw == "r1+inv") ? 1 : -1;
            if (!(ls >> t)) throw parse_error("r1 creation needs an arc", lineno);
            e.a = want_arc(t, lineno);
        } else if (kw == "r2" || kw == "r2-") {
            e.kind = EventKind::R2Remove;
            if (!(ls >> t >> t2)) throw parse_error("r2 needs two crossings", lineno);
            e.c1 = want_crossing(t, lineno);
            e.c2 = want_crossing(t2, lineno);
        } else if (kw == "r2inv") {
            e.kind = EventKind::R2Create;
            if (!(ls >> t >> t2)) throw parse_error("r2inv needs two arcs", lineno);
            e.a = want_arc(t, lineno);
            e.b = want_arc(t2, lineno);
            e.sign = +1;
            if (ls >> t3) {
                if (t3 == "over")
                    e.sign = +1;
                else if (t3 == "under")
                    e.sign = -1;
                else
                    throw parse_error("r2inv direction must be 'over' or 'under'", lineno);
            }
        } else if (kw == "r3") {
            e.kind = EventKind::R3;
            if (!(ls >> t >> t2 >> t3)) throw parse_error("r3 needs three crossings", lineno);
            e.c1 = want_crossing(t, lineno);
            e.c2 = want_crossing(t2, lineno);
            e.c3 = want_crossing(t3, lineno);
        } else if (kw == "resolve") {
            e.kind = EventKind::Resolve;
            if (!(ls >> t)) throw parse_error("resolve needs a crossing", lineno);
            e.c1 = want_crossing(t, lineno);
        } else if (kw == "isotopy") {
            e.kind = EventKind::Isotopy;
            while (ls >> t) {
                auto gt = t.find('>');
                if (gt == std::string::npos) throw parse_error("isotopy entries look like a1>a2 or c1>c2", lineno);
                std::string from = t.substr(0, gt), to = t.substr(gt + 1);
                if (!from.empty() && from[0] == 'c') {
                    int fi = want_crossing(from, lineno), ti = want_crossing(to, lineno);
                    if (e.cross_corr.empty()) {
                        // lazily sized when applied; store pairs in arc_corr-like map
                    }
                    if (int(e.cross_corr.size()) <= fi) e.cross_corr.resize(size_t(fi) + 1, -1);
                    e.cross_corr[size_t(fi)] = ti;
                } else {
                    e.arc_corr[want_arc(from, lineno)] = want_arc(to, lineno);
                }
            }
        } else {
            throw parse_error("unknown event '" + kw + "'", lineno);
        }
        events.push_back(e);
    }
    if (!start) throw parse_error("movie has no diagram");
    // complete partial crossing permutations with identity
    Movie m;
    m.diagrams.push_back(start);
    std::shared_ptr<const Diagram> cur = start;
    for (size_t i = 0; i < events.size(); ++i) {
        Event e = events[i];
        if (e.kind == EventKind::Isotopy) {
            size_t n = cur->crossings.size();
            if (e.cross_corr.size() > n) throw invalid_move("isotopy crossing map too long");
            std::vector<int> full(n, -1);
            for (size_t j = 0; j < e.cross_corr.size(); ++j) full[j] = e.cross_corr[j];
            std::set<int> used;
            for (int v : full)
                if (v >= 0) used.insert(v);
            for (size_t j = 0; j < n; ++j)
                if (full[j] < 0) {
                    if (!used.count(int(j)))
                        full[j] = int(j);
                    else {
                        int k = 0;
                        while (used.count(k)) ++k;
                        full[j] = k;
                        used.insert(k);
                    }
                }
            e.cross_corr = full;
        }
        AppliedEvent ae;
        try {
            ae = apply_event(cur, e);
        } catch (const std::exception& ex) {
            throw invalid_move("movie step " + std::to_string(i + 1) + " (" + event_str(e) + "): " + ex.what());
        }
        cur = ae.post;
        m.diagrams.push_back(cur);
        m.events.push_back(std::move(ae));
    }
    return m;
}

std::string emit_movie_events(const Movie& m) {
    std::ostringstream os;
    for (auto& e : m.events) os << event_str(e.ev) << "\n";
    return os.str();
}

Chain evaluate_movie(const Movie& m, const Chain& start, const TraceFn& trace) {
    if (!(start.diagram() == m.first())) throw invalid_move("chain lives on a different diagram");
    Chain cur = start;
    int step = 0;
    for (auto& e : m.events) {
        Bigrading before{}, after{};
        bool hom_before = homogeneous_grading(*e.pre, cur, before);
        Chain relocated(e.pre);
        for (auto& [g, c] : cur.terms()) relocated.add(g, c);
        cur = map_chain(e, relocated);
        if (hom_before && !cur.is_zero()) {
            if (!homogeneous_grading(*e.post, cur, after))
                throw std::logic_error("event broke homogeneity: " + event_str(e.ev));
            if (after.h != before.h || after.q != before.q + e.chi)
                throw std::logic_error("event bidegree mismatch: " + event_str(e.ev));
        }
        ++step;
        if (trace) trace(step, e, cur);
    }
    return cur;
}

}  // namespace kh
