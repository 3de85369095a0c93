#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "kh/diagram.hpp"

namespace kh {

/// A generator of CKh(D): a smoothing plus one label bit per loop.
/// Label bits follow the canonical loop order of resolve(d, bits);
/// a set bit means the loop is labeled x, a clear bit means 1.
struct Gen {
    u64 bits = 0;
    u64 labels = 0;
    auto operator<=>(const Gen&) const = default;
};

struct Bigrading {
    int h = 0, q = 0;
    auto operator<=>(const Bigrading&) const = default;
};

class Chain {
  public:
    Chain() = default;
    explicit Chain(std::shared_ptr<const Diagram> d) : d_(std::move(d)) {}

    const Diagram& diagram() const { return *d_; }
    std::shared_ptr<const Diagram> diagram_ptr() const { return d_; }

    void add(const Gen& g, i64 c) {
        if (!c) return;
        i64 r = checked_add(terms_[g], c);
        if (r)
            terms_[g] = r;
        else
            terms_.erase(g);
    }

    bool is_zero() const { return terms_.empty(); }
    const std::map<Gen, i64>& terms() const { return terms_; }

    Chain operator+(const Chain& o) const {
        Chain r = *this;
        for (auto& [g, c] : o.terms_) r.add(g, c);
        return r;
    }
    Chain operator-(const Chain& o) const {
        Chain r = *this;
        for (auto& [g, c] : o.terms_) r.add(g, -c);
        return r;
    }
    Chain operator*(i64 k) const {
        Chain r(d_);
        if (k)
            for (auto& [g, c] : terms_) r.add(g, checked_mul(c, k));
        return r;
    }
    bool operator==(const Chain& o) const { return terms_ == o.terms_; }

    /// The unique coefficient if the chain lives on the empty diagram, else throws.
    i64 scalar() const;

  private:
    std::shared_ptr<const Diagram> d_;
    std::map<Gen, i64> terms_;
};

int v_minus(const LoopSet& ls, u64 labels);
Bigrading grading(const Diagram& d, const Gen& g);

/// True iff the chain is homogeneous; fills gr with the common bigrading.
bool homogeneous_grading(const Diagram& d, const Chain& c, Bigrading& gr);

/// Transports loop labels across two loop partitions that differ by at most
/// one abstract saddle. Loops are matched through arc_map (pre arc -> post
/// arc; absent entries mean the arc disappears). Pre loops with no surviving
/// arcs and post loops with no preimage must be handled by the caller.
/// Returns (post label mask, coefficient) pairs: identity relabel, a merge
/// (Frobenius m) or a split (Frobenius Delta).
std::vector<std::pair<u64, i64>> transport_labels(const LoopSet& pre, u64 labels, const LoopSet& post,
                                                  const std::function<int(int)>& arc_map);

Chain differential(const Diagram& d, const Chain& c);
Chain differential_gen(const Diagram& d, const Gen& g);

/// Prop-2.1 style test: every 0-smoothed crossing, when flipped, merges two
/// distinct x-labeled loops.
bool is_cycle(const Diagram& d, const Gen& g);
bool is_cycle(const Diagram& d, const Chain& c);  // differential(c) == 0

/// Graded Euler characteristic: sum over generators of (-1)^h q^q.
Laurent graded_euler_characteristic(const Diagram& d);

std::string emit_chain(const Diagram& d, const Chain& c);
Chain parse_chain(std::shared_ptr<const Diagram> d, const std::string& text);

}  // namespace kh
