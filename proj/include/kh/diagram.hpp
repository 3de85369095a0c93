#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kh/basics.hpp"

namespace kh {

// Slot convention at a crossing: the four incident arc ends are listed
// counterclockwise starting from the incoming under-strand:
//   slot 0 = under-in, slot 2 = under-out,
//   positive crossing: slot 3 = over-in, slot 1 = over-out,
//   negative crossing: slot 1 = over-in, slot 3 = over-out.
// Resolutions pair slots: 0-smoothing joins (0,1) and (2,3);
// 1-smoothing joins (0,3) and (1,2). With these conventions the
// 0-smoothing is the oriented resolution of a positive crossing and the
// 1-smoothing is the oriented resolution of a negative one.
struct Crossing {
    int sign = +1;  // +1 or -1
    std::array<int, 4> slot{};

    bool operator==(const Crossing& o) const { return sign == o.sign && slot == o.slot; }
};

struct Smoothing {
    u64 bits = 0;
    int size = 0;

    bool bit(int i) const { return (bits >> i) & 1; }
    int weight() const { return __builtin_popcountll(bits); }
    bool operator==(const Smoothing& o) const { return bits == o.bits && size == o.size; }
};

/// Loop partition of a resolved diagram. Loops are keyed by their minimal
/// arc id and listed in increasing key order.
struct LoopSet {
    struct Loop {
        int id = 0;                 // minimal arc id in the loop
        std::vector<int> arcs;      // sorted
        bool tracing0 = false;      // meets a 0-resolved crossing site
        bool tracing1 = false;
    };
    std::vector<Loop> loops;

    int index_of(int arc) const;    // loop index containing the arc, -1 if absent
    int index_of_id(int id) const;  // loop index with the given canonical id, -1 if absent
};

struct Diagram {
    std::vector<Crossing> crossings;
    std::vector<int> free_loops;  // arc ids of crossingless components, sorted

    int n_arcs() const;
    std::vector<int> arcs() const;  // all arc ids, sorted
    int max_arc() const;

    // slot helpers
    int under_in(int ci) const { return crossings[ci].slot[0]; }
    int under_out(int ci) const { return crossings[ci].slot[2]; }
    int over_in(int ci) const { return crossings[ci].slot[crossings[ci].sign > 0 ? 3 : 1]; }
    int over_out(int ci) const { return crossings[ci].slot[crossings[ci].sign > 0 ? 1 : 3]; }

    bool operator==(const Diagram& o) const {
        return crossings == o.crossings && free_loops == o.free_loops;
    }

    /// Validates arc incidences and orientation consistency; throws parse_error.
    void validate() const;

    /// Strand components (each component a sorted arc-id list), sorted by min arc.
    std::vector<std::vector<int>> components() const;

    u64 content_hash() const;
};

/// Slot index of a crossing corner ('B'/'T' x 'L'/'R') given the sign, in
/// the braid-diagram reading where both strands point upward.
int slot_for(int sign, char vert, char horiz);

std::pair<int, int> crossing_counts(const Diagram& d);  // (n+, n-)
int writhe(const Diagram& d);

/// Oriented resolution: 0 at positive crossings, 1 at negative ones.
Smoothing oriented_smoothing(const Diagram& d);

/// Resolve all crossings of d according to s. Throws on length mismatch.
LoopSet resolve(const Diagram& d, const Smoothing& s);

Diagram parse_diagram(const std::string& text);
std::string emit_diagram(const Diagram& d);

}  // namespace kh
