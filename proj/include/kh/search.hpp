#pragma once

#include "kh/braid.hpp"
#include "kh/homology.hpp"

namespace kh {

/// Oriented smoothing with 0-tracing loops labeled x and every other loop
/// labeled 1; always a cycle in homological degree 0.
Gen orientation_induced_generator(const Diagram& d);

struct SearchOptions {
    u64 node_budget = 200000;  // generators examined
    // optional support restriction for the two-term correction solve
    std::function<bool(const Gen&)> correction_support;
};

/// Candidate cycles at the target bigrading: single-generator cycles first
/// (ordered by label distance from the orientation-induced generator), then
/// two-term corrections phi - alpha with d(alpha) = d(phi) solved over the
/// restricted subcomplex. Returns whether the budget sufficed.
bool enumerate_candidate_cycles(const Diagram& d, Bigrading target, const SearchOptions& opt,
                                const std::function<bool(const Chain&)>& emit);

struct Certificate {
    Chain representative;
    i64 value_a = 0, value_b = 0;
    u64 diagram_hash = 0, movie_a_hash = 0, movie_b_hash = 0;
    std::string transcript;

    std::string str(const Diagram& d) const;
};

/// Searches the candidate stream for a cycle whose images under the two
/// movies differ in absolute value. Both movies must run from d to the empty
/// diagram. Returns nothing when the budget is exhausted without a witness.
std::optional<Certificate> distinguish(std::shared_ptr<const Diagram> d, const Movie& a, const Movie& b,
                                       const SearchOptions& opt = {});

}  // namespace kh
