#pragma once

#include <random>

#include "kh/braid.hpp"

namespace kh_test {

inline kh::BraidWord random_braid(std::mt19937& rng, int max_strands = 4, int max_len = 8, int min_len = 1) {
    std::uniform_int_distribution<int> ns(2, max_strands);
    int n = ns(rng);
    std::uniform_int_distribution<int> ls(min_len, max_len);
    int len = ls(rng);
    kh::BraidWord w{n, {}};
    std::uniform_int_distribution<int> gen(1, n - 1);
    std::uniform_int_distribution<int> sgn(0, 1);
    for (int i = 0; i < len; ++i) w.letters.push_back(gen(rng) * (sgn(rng) ? 1 : -1));
    return w;
}

/// All label masks over the loop count of each smoothing of d, as generators.
template <class F>
void for_all_generators(const kh::Diagram& d, F&& f) {
    int n = int(d.crossings.size());
    for (kh::u64 bits = 0;; ++bits) {
        kh::LoopSet ls = kh::resolve(d, kh::Smoothing{bits, n});
        int nl = int(ls.loops.size());
        for (kh::u64 lab = 0; lab < (kh::u64(1) << nl); ++lab) f(kh::Gen{bits, lab});
        if (n == 0 || bits + 1 == (kh::u64(1) << n)) break;
    }
}

}  // namespace kh_test
