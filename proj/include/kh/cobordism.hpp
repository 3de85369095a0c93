#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "kh/chain.hpp"

namespace kh {

enum class EventKind {
    Birth,
    Death,
    Saddle,
    Dot,
    R1Remove,
    R1Create,
    R2Remove,
    R2Create,
    R3,
    Isotopy,
    Resolve,  // macro: saddle + R1Remove realizing a crossing resolution
};

struct Event {
    EventKind kind{};
    int a = 0, b = 0;               // arc sites (death, saddle, dot, r1/r2 create)
    int c1 = -1, c2 = -1, c3 = -1;  // crossing indices (0-based)
    int sign = +1;                  // r1 create: kink sign; r2 create: +1 = first arc over
    std::map<int, int> arc_corr;    // isotopy: arc -> arc
    std::vector<int> cross_corr;    // isotopy: old index -> new index
};

std::string event_str(const Event& e);

struct AppliedEvent {
    Event ev;
    std::shared_ptr<const Diagram> pre, post;
    std::map<int, int> arc_map;   // pre arc -> post arc; absent = deleted
    std::vector<int> cross_map;   // pre index -> post index; -1 = deleted
    int chi = 0;
    // R2Remove caches
    int bigon_m = 0, bigon_n = 0;
    // R3 caches
    int r3_case = 0;       // +1 positive core, -1 negative core
    bool r3_swap = false;  // true when the pre-pattern leans the other way
    std::array<int, 3> r3_internal{};  // the triangle's internal arcs
    // expansion for composite events (Resolve, mixed-sign R3)
    std::vector<AppliedEvent> expansion;
};

/// Applies the event to the diagram, producing the successor diagram, the
/// correspondence and everything the chain map needs. Throws invalid_move.
AppliedEvent apply_event(std::shared_ptr<const Diagram> pre, const Event& ev);

/// The event's induced chain map, extended linearly.
Chain map_chain(const AppliedEvent& ae, const Chain& c);

/// Two-event movie (saddle, then complexity-reducing R1) realizing the
/// oriented resolution of the crossing.
std::vector<Event> resolve_crossing_events(const Diagram& d, int crossing);

/// Pure renaming isotopy identifying two diagrams with identical crossing
/// structure (same signs, slot-by-slot arc correspondence). Throws when the
/// diagrams are not related by an arc renaming.
Event make_alignment_isotopy(const Diagram& from, const Diagram& to);

struct Movie {
    std::vector<std::shared_ptr<const Diagram>> diagrams;
    std::vector<AppliedEvent> events;

    const Diagram& first() const { return *diagrams.front(); }
    const Diagram& last() const { return *diagrams.back(); }
    int chi() const;
    u64 content_hash() const;
};

Movie make_movie(std::shared_ptr<const Diagram> start, const std::vector<Event>& events);
Movie concatenate(const Movie& a, const Movie& b);

/// Movie text format: `diagram <name>` header line, then one event per line.
/// The loader resolves diagram names to diagram source text.
Movie parse_movie(const std::string& text, const std::function<std::string(const std::string&)>& loader);
std::string emit_movie_events(const Movie& m);

using TraceFn = std::function<void(int step, const AppliedEvent&, const Chain&)>;

/// Composes the per-event maps; asserts each step is homogeneous of
/// bidegree (0, chi(event)) on homogeneous input.
Chain evaluate_movie(const Movie& m, const Chain& start, const TraceFn& trace = nullptr);

}  // namespace kh
