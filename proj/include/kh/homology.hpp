#pragma once

#include <optional>

#include "kh/chain.hpp"
#include "kh/snf.hpp"

namespace kh {

struct GradedGroups {
    struct Group {
        i64 rank = 0;
        std::vector<i64> torsion;  // orders >= 2, each dividing the next
    };
    std::map<Bigrading, Group> groups;

    std::string str() const;  // "(h,q) rank torsion..." table, sorted
};

struct HomologyOptions {
    int crossing_budget = 16;
    u64 generator_budget = u64(1) << 23;
    std::optional<Bigrading> window_min, window_max;  // inclusive bigrading window
};

/// All generators of CKh(d) at the given bigrading.
std::vector<Gen> generators_at(const Diagram& d, Bigrading gr, u64 generator_budget = u64(1) << 23);

/// The differential matrix from (h,q) to (h+1,q); basis = the given vectors.
SparseMat differential_matrix(const Diagram& d, const std::vector<Gen>& from, const std::vector<Gen>& to);

GradedGroups homology(const Diagram& d, const HomologyOptions& opt = {});

/// True iff a-b or a+b is a boundary. Both chains must be homogeneous of the
/// same bigrading on d.
bool classes_agree_up_to_sign(const Diagram& d, const Chain& a, const Chain& b,
                              const HomologyOptions& opt = {});

/// True iff the chain is a boundary.
bool is_boundary(const Diagram& d, const Chain& a, const HomologyOptions& opt = {});

}  // namespace kh
