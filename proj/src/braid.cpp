#include "kh/braid.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace kh {

BraidWord parse_braid(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    BraidWord w;
    bool have_header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            if (tok == "strands") {
                if (!(ls >> w.strands)) throw parse_error("strands needs a count", lineno);
                have_header = true;
            } else {
                try {
                    w.letters.push_back(std::stoi(tok));
                } catch (...) {
                    throw parse_error("bad letter '" + tok + "'", lineno);
                }
            }
        }
    }
    if (!have_header) throw parse_error("braid needs a 'strands n' header");
    w.validate();
    return w;
}

std::string emit_braid(const BraidWord& w) {
    std::ostringstream os;
    os << "strands " << w.strands << "\n";
    for (size_t i = 0; i < w.letters.size(); ++i) os << (i ? " " : "") << w.letters[i];
    if (!w.letters.empty()) os << "\n";
    return os.str();
}

namespace {

struct ClosureLayout {
    std::vector<std::vector<int>> touches;  // per column (1-based index shifted): letter positions
    std::vector<std::vector<int>> arcs;     // arc between touch k and k+1 (cyclic)
    std::vector<int> free_arc;              // per column, 0 if the column is crossed
};

Diagram closure_with_layout(const BraidWord& w, ClosureLayout& lay) {
    w.validate();
    int n = w.strands;
    int L = int(w.letters.size());
    lay.touches.assign(size_t(n) + 1, {});
    lay.arcs.assign(size_t(n) + 1, {});
    lay.free_arc.assign(size_t(n) + 1, 0);
    for (int t = 0; t < L; ++t) {
        int i = std::abs(w.letters[size_t(t)]);
        lay.touches[size_t(i)].push_back(t);
        lay.touches[size_t(i) + 1].push_back(t);
    }
    Diagram d;
    d.crossings.resize(size_t(L));
    int next_arc = 1;
    for (int c = 1; c <= n; ++c) {
        auto& ts = lay.touches[size_t(c)];
        if (ts.empty()) {
            lay.free_arc[size_t(c)] = next_arc;
            d.free_loops.push_back(next_arc++);
            continue;
        }
        for (size_t k = 0; k < ts.size(); ++k) lay.arcs[size_t(c)].push_back(next_arc++);
    }
    for (int t = 0; t < L; ++t) {
        int letter = w.letters[size_t(t)];
        int i = std::abs(letter);
        int sign = letter > 0 ? +1 : -1;
        Crossing& cr = d.crossings[size_t(t)];
        cr.sign = sign;
        for (int side = 0; side < 2; ++side) {
            int col = i + side;
            auto& ts = lay.touches[size_t(col)];
            int k = int(std::find(ts.begin(), ts.end(), t) - ts.begin());
            int top = lay.arcs[size_t(col)][size_t(k)];
            int bottom = lay.arcs[size_t(col)][size_t((k + ts.size() - 1) % ts.size())];
            if (side == 0) {
                cr.slot[size_t(slot_for(sign, 'B', 'L'))] = bottom;
                cr.slot[size_t(slot_for(sign, 'T', 'L'))] = top;
            } else {
                cr.slot[size_t(slot_for(sign, 'B', 'R'))] = bottom;
                cr.slot[size_t(slot_for(sign, 'T', 'R'))] = top;
            }
        }
    }
    std::sort(d.free_loops.begin(), d.free_loops.end());
    d.validate();
    return d;
}

}  // namespace

Diagram closure(const BraidWord& w) {
    ClosureLayout lay;
    return closure_with_layout(w, lay);
}

Chain psi(const BraidWord& w, std::shared_ptr<const Diagram> dptr) {
    if (!dptr) dptr = std::make_shared<Diagram>(closure(w));
    Smoothing s = oriented_smoothing(*dptr);
    LoopSet ls = resolve(*dptr, s);
    if (int(ls.loops.size()) != w.strands) throw std::logic_error("oriented resolution of a braid closure");
    Chain c(dptr);
    c.add(Gen{s.bits, (u64(1) << ls.loops.size()) - 1}, 1);
    return c;
}

BraidWord positive_stabilize(const BraidWord& w) {
    BraidWord out{w.strands + 1, w.letters};
    out.letters.push_back(w.strands);
    return out;
}

std::vector<int> Band::expansion() const {
    std::vector<int> out = conjugator.letters;
    out.push_back(core_sign > 0 ? core_index : -core_index);
    for (auto it = conjugator.letters.rbegin(); it != conjugator.letters.rend(); ++it) out.push_back(-*it);
    return out;
}

BraidWord BandFactorization::expansion() const {
    BraidWord w{strands, {}};
    for (auto& b : bands) {
        auto e = b.expansion();
        w.letters.insert(w.letters.end(), e.begin(), e.end());
    }
    w.validate();
    return w;
}

std::vector<int> BandFactorization::core_positions() const {
    std::vector<int> out;
    int at = 0;
    for (auto& b : bands) {
        int m = int(b.conjugator.letters.size());
        out.push_back(at + m);
        at += 2 * m + 1;
    }
    return out;
}

std::vector<std::pair<int, int>> BandFactorization::conjugate_pairs() const {
    // innermost pairs first within each band, bands in order
    std::vector<std::pair<int, int>> out;
    int at = 0;
    for (auto& b : bands) {
        int m = int(b.conjugator.letters.size());
        for (int j = m - 1; j >= 0; --j) out.push_back({at + j, at + 2 * m - j});
        at += 2 * m + 1;
    }
    return out;
}

BandFactorization parse_bands(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    BandFactorization f;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok == "strands") {
            if (!(ls >> f.strands)) throw parse_error("strands needs a count", lineno);
            have_header = true;
            continue;
        }
        // [ conjugator letters ; core-index ; + ]
        if (tok != "[") throw parse_error("band lines look like: [ w ; i ; +|- ]", lineno);
        Band b;
        std::vector<std::string> fields(1);
        while (ls >> tok && tok != "]") {
            if (tok == ";")
                fields.push_back("");
            else
                fields.back() += tok + " ";
        }
        if (fields.size() != 3) throw parse_error("band needs three ';' separated fields", lineno);
        std::istringstream ws(fields[0]);
        int v;
        while (ws >> v) b.conjugator.letters.push_back(v);
        std::istringstream cs(fields[1]);
        if (!(cs >> b.core_index)) throw parse_error("band needs a core index", lineno);
        std::string sg;
        std::istringstream ss(fields[2]);
        if (!(ss >> sg) || (sg != "+" && sg != "-")) throw parse_error("band sign must be + or -", lineno);
        b.core_sign = sg == "+" ? +1 : -1;
        f.bands.push_back(std::move(b));
    }
    if (!have_header) throw parse_error("band factorization needs a 'strands n' header");
    for (auto& b : f.bands) {
        b.conjugator.strands = f.strands;
        b.conjugator.validate();
        if (b.core_index < 1 || b.core_index >= f.strands) throw parse_error("core index out of range");
    }
    f.expansion();
    return f;
}

std::string emit_bands(const BandFactorization& f) {
    std::ostringstream os;
    os << "strands " << f.strands << "\n";
    for (auto& b : f.bands) {
        os << "[";
        for (int l : b.conjugator.letters) os << " " << l;
        os << " ; " << b.core_index << " ; " << (b.core_sign > 0 ? "+" : "-") << " ]\n";
    }
    return os.str();
}

Movie compile_braided_surface(const BandFactorization& f) {
    BraidWord word = f.expansion();
    Movie m;
    m.diagrams.push_back(std::make_shared<Diagram>(closure(word)));
    std::vector<int> pos(word.letters.size());
    for (size_t i = 0; i < pos.size(); ++i) pos[i] = int(i);
    auto apply = [&](Event e) {
        AppliedEvent ae = apply_event(m.diagrams.back(), e);
        for (auto& p : pos)
            if (p >= 0) p = ae.cross_map[size_t(p)];
        m.diagrams.push_back(ae.post);
        m.events.push_back(std::move(ae));
    };
    for (int cp : f.core_positions())
        for (auto& e : resolve_crossing_events(*m.diagrams.back(), pos[size_t(cp)])) apply(e);
    for (auto [p, q] : f.conjugate_pairs()) {
        int cp = pos[size_t(p)], cq = pos[size_t(q)];
        const Diagram& cur = *m.diagrams.back();
        // bigon arcs: the top arcs of the lower crossing
        int lo = std::min(cp, cq);
        int sgn = cur.crossings[size_t(lo)].sign;
        Event e{EventKind::R2Remove};
        e.c1 = cp;
        e.c2 = cq;
        e.a = cur.crossings[size_t(lo)].slot[size_t(slot_for(sgn, 'T', 'L'))];
        e.b = cur.crossings[size_t(lo)].slot[size_t(slot_for(sgn, 'T', 'R'))];
        apply(e);
    }
    while (!m.diagrams.back()->free_loops.empty()) {
        Event e{EventKind::Death};
        e.a = m.diagrams.back()->free_loops.front();
        apply(e);
    }
    if (!m.last().crossings.empty()) throw std::logic_error("compiled surface did not end at the empty diagram");
    return m;
}

bool is_compatible(const Gen& g, const BandFactorization& f) {
    BraidWord w = f.expansion();
    auto oriented_at = [&](int p) {
        bool bit = (g.bits >> p) & 1;
        return bit == (w.letters[size_t(p)] < 0);
    };
    for (int cp : f.core_positions())
        if (!oriented_at(cp)) return false;
    for (auto [p, q] : f.conjugate_pairs())
        if (oriented_at(p) != oriented_at(q)) return false;
    return true;
}

namespace {

void check_adjacent(int x, int y) {
    if (std::abs(std::abs(x) - std::abs(y)) != 1) throw invalid_move("letters act on non-adjacent columns");
}

}  // namespace

RewriteResult rewrite_tracked(const BraidWord& w, const std::vector<RewriteStep>& steps,
                              const std::vector<int>& marks) {
    BraidWord cur = w;
    std::map<int, int> track;
    for (int mk : marks) {
        if (mk < 0 || mk >= int(w.letters.size())) throw invalid_move("mark out of range");
        track[mk] = mk;
    }
    auto shift = [&](int from, int delta) {
        for (auto& [o, p] : track)
            if (p >= from) p += delta;
    };
    for (auto& st : steps) {
        auto& ls = cur.letters;
        int p = st.pos;
        int L = int(ls.size());
        switch (st.kind) {
            case RewriteStep::Comm: {
                if (p < 0 || p + 1 >= L) throw invalid_move("comm out of range");
                if (std::abs(std::abs(ls[size_t(p)]) - std::abs(ls[size_t(p) + 1])) < 2)
                    throw invalid_move("comm letters do not commute");
                std::swap(ls[size_t(p)], ls[size_t(p) + 1]);
                for (auto& [o, q] : track) {
                    if (q == p) q = p + 1;
                    else if (q == p + 1) q = p;
                }
                break;
            }
            case RewriteStep::Cancel: {
                if (p < 0 || p + 1 >= L) throw invalid_move("cancel out of range");
                if (ls[size_t(p)] != -ls[size_t(p) + 1]) throw invalid_move("letters are not inverse");
                for (auto& [o, q] : track)
                    if (q == p || q == p + 1) throw invalid_move("a tracked letter was cancelled");
                ls.erase(ls.begin() + p, ls.begin() + p + 2);
                shift(p, -2);
                break;
            }
            case RewriteStep::InsertPair: {
                if (p < 0 || p > L) throw invalid_move("insert out of range");
                int i = std::abs(st.letter);
                if (i < 1 || i >= cur.strands) throw invalid_move("insert letter out of range");
                shift(p, +2);
                ls.insert(ls.begin() + p, {st.letter, -st.letter});
                break;
            }
            case RewriteStep::YB: {
                if (p < 0 || p + 2 >= L) throw invalid_move("yb out of range");
                int x = ls[size_t(p)], y = ls[size_t(p) + 1], z = ls[size_t(p) + 2];
                if (x != z || (x > 0) != (y > 0)) throw invalid_move("yb needs (a b a) of one sign");
                check_adjacent(x, y);
                ls[size_t(p)] = y;
                ls[size_t(p) + 1] = x;
                ls[size_t(p) + 2] = y;
                break;
            }
            case RewriteStep::Conj: {
                if (p < 0 || p + 2 >= L) throw invalid_move("conj out of range");
                int x = ls[size_t(p)], y = ls[size_t(p) + 1], z = ls[size_t(p) + 2];
                if (z != -x) throw invalid_move("conj needs (x y -x)");
                check_adjacent(x, y);
                int i = std::abs(x), j = std::abs(y);
                int eps = x > 0 ? 1 : -1, del = y > 0 ? 1 : -1;
                ls[size_t(p)] = -eps * j;
                ls[size_t(p) + 1] = del * i;
                ls[size_t(p) + 2] = eps * j;
                break;
            }
        }
    }
    cur.validate();
    return {cur, track};
}

namespace {

// arc on the closure diagram at the given column, just below word position p
int col_arc_below(const Diagram& d, const BraidWord& word, const std::map<int, int>& col_free, int col, int p) {
    int L = int(word.letters.size());
    int first_ge = -1, last = -1;
    for (int t = 0; t < L; ++t) {
        int i = std::abs(word.letters[size_t(t)]);
        if (i != col && i + 1 != col) continue;
        if (t >= p && first_ge < 0) first_ge = t;
        last = t;
    }
    if (last < 0) {
        auto it = col_free.find(col);
        if (it == col_free.end()) throw std::logic_error("no free-loop record for an untouched column");
        return it->second;
    }
    if (first_ge >= 0) {
        int i = std::abs(word.letters[size_t(first_ge)]);
        int sgn = d.crossings[size_t(first_ge)].sign;
        return d.crossings[size_t(first_ge)].slot[size_t(slot_for(sgn, 'B', col == i ? 'L' : 'R'))];
    }
    int i = std::abs(word.letters[size_t(last)]);
    int sgn = d.crossings[size_t(last)].sign;
    return d.crossings[size_t(last)].slot[size_t(slot_for(sgn, 'T', col == i ? 'L' : 'R'))];
}

}  // namespace

Movie rewrite_movie(const BraidWord& w, const std::vector<RewriteStep>& steps) {
    ClosureLayout lay;
    Movie m;
    m.diagrams.push_back(std::make_shared<Diagram>(closure_with_layout(w, lay)));
    BraidWord word = w;
    std::map<int, int> col_free;
    for (int c = 1; c <= w.strands; ++c)
        if (lay.free_arc[size_t(c)]) col_free[c] = lay.free_arc[size_t(c)];

    auto apply = [&](Event e) {
        AppliedEvent ae = apply_event(m.diagrams.back(), e);
        for (auto& [c, a] : col_free) {
            auto it = ae.arc_map.find(a);
            if (it != ae.arc_map.end()) a = it->second;
        }
        m.diagrams.push_back(ae.post);
        m.events.push_back(std::move(ae));
    };
    auto renumber_last_two_to = [&](int p, bool swap_pair) {
        // the two crossings appended by an R2 creation move to positions p, p+1
        int n = int(m.diagrams.back()->crossings.size());
        Event e{EventKind::Isotopy};
        e.cross_corr.resize(size_t(n));
        for (int i = 0; i < n - 2; ++i) e.cross_corr[size_t(i)] = i < p ? i : i + 2;
        e.cross_corr[size_t(n) - 2] = swap_pair ? p + 1 : p;
        e.cross_corr[size_t(n) - 1] = swap_pair ? p : p + 1;
        apply(e);
    };
    auto do_insert = [&](int p, int letter) {
        int j = std::abs(letter);
        Event e{EventKind::R2Create};
        e.a = col_arc_below(*m.diagrams.back(), word, col_free, j, p);
        e.b = col_arc_below(*m.diagrams.back(), word, col_free, j + 1, p);
        e.sign = letter > 0 ? +1 : -1;
        col_free.erase(j);
        col_free.erase(j + 1);
        apply(e);
        renumber_last_two_to(p, false);
        word.letters.insert(word.letters.begin() + p, {letter, -letter});
    };
    auto do_cancel = [&](int p) {
        const Diagram& cur = *m.diagrams.back();
        int sgn = cur.crossings[size_t(p)].sign;
        Event e{EventKind::R2Remove};
        e.c1 = p;
        e.c2 = p + 1;
        e.a = cur.crossings[size_t(p)].slot[size_t(slot_for(sgn, 'T', 'L'))];
        e.b = cur.crossings[size_t(p)].slot[size_t(slot_for(sgn, 'T', 'R'))];
        int j = std::abs(word.letters[size_t(p)]);
        apply(e);
        word.letters.erase(word.letters.begin() + p, word.letters.begin() + p + 2);
        // a column with no remaining touchings became a crossingless loop
        for (int col : {j, j + 1}) {
            bool touched = false;
            for (int l : word.letters) touched |= (std::abs(l) == col || std::abs(l) + 1 == col);
            if (!touched) {
                int arc = m.events.back().arc_map.at(e.a);
                // e.a sits on column j; for column j+1 use the other bigon arc
                if (col == j + 1) arc = m.events.back().arc_map.at(e.b);
                col_free[col] = arc;
            }
        }
    };
    for (auto& st : steps) {
        int p = st.pos;
        switch (st.kind) {
            case RewriteStep::Comm: {
                BraidWord upd = rewrite_tracked(word, {st}).word;
                int n = int(word.letters.size());
                Event e{EventKind::Isotopy};
                e.cross_corr.resize(size_t(n));
                for (int i = 0; i < n; ++i) e.cross_corr[size_t(i)] = i;
                e.cross_corr[size_t(p)] = p + 1;
                e.cross_corr[size_t(p) + 1] = p;
                apply(e);
                word = upd;
                break;
            }
            case RewriteStep::Cancel: {
                rewrite_tracked(word, {st});  // validation
                do_cancel(p);
                break;
            }
            case RewriteStep::InsertPair: {
                rewrite_tracked(word, {st});
                do_insert(p, st.letter);
                break;
            }
            case RewriteStep::YB: {
                BraidWord upd = rewrite_tracked(word, {st}).word;
                Event e{EventKind::R3};
                e.c1 = p;
                e.c2 = p + 1;
                e.c3 = p + 2;
                apply(e);
                word = upd;
                break;
            }
            case RewriteStep::Conj: {
                BraidWord upd = rewrite_tracked(word, {st}).word;
                int x = word.letters[size_t(p)], y = word.letters[size_t(p) + 1];
                auto yb_at = [&](int q) {
                    Event e{EventKind::R3};
                    e.c1 = q;
                    e.c2 = q + 1;
                    e.c3 = q + 2;
                    apply(e);
                    auto& lw = word.letters;
                    int a = lw[size_t(q)], b = lw[size_t(q) + 1];
                    lw[size_t(q)] = b;
                    lw[size_t(q) + 1] = a;
                    lw[size_t(q) + 2] = b;
                };
                if ((x > 0) == (y > 0)) {
                    // (x y -x): insert (-y y) before; triangle on the same-sign
                    // block (y x y); cancel the freed (x -x)
                    do_insert(p, -y);
                    yb_at(p + 1);
                    do_cancel(p + 3);
                } else {
                    // opposite signs: insert (y -y) after, triangle on (y -x y),
                    // cancel the freed (x -x) at the front
                    do_insert(p + 3, y);
                    yb_at(p + 1);
                    do_cancel(p);
                }
                if (word.letters != upd.letters) throw std::logic_error("conj detour drifted from the word rewrite");
                break;
            }
        }
    }
    return m;
}

std::vector<RewriteStep> parse_rewrite_script(const std::string& text, std::vector<int>& marks) {
    std::istringstream in(text);
    std::string line;
    std::vector<RewriteStep> steps;
    int lineno = 0;
    marks.clear();
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto need_pos = [&]() {
            int p;
            if (!(ls >> p) || p < 1) throw parse_error("step needs a 1-based position", lineno);
            return p - 1;
        };
        if (kw == "mark") {
            marks.push_back(need_pos());
        } else if (kw == "comm") {
            steps.push_back({RewriteStep::Comm, need_pos(), 0});
        } else if (kw == "cancel") {
            steps.push_back({RewriteStep::Cancel, need_pos(), 0});
        } else if (kw == "insertpair") {
            int p = need_pos();
            int l;
            if (!(ls >> l)) throw parse_error("insertpair needs a letter", lineno);
            steps.push_back({RewriteStep::InsertPair, p, l});
        } else if (kw == "yb") {
            steps.push_back({RewriteStep::YB, need_pos(), 0});
        } else if (kw == "conj") {
            steps.push_back({RewriteStep::Conj, need_pos(), 0});
        } else {
            throw parse_error("unknown rewrite step '" + kw + "'", lineno);
        }
    }
    return steps;
}

}  // namespace kh
