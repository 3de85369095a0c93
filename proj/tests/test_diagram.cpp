#include <random>

#include "doctest.h"
#include "kh/braid.hpp"
#include "kh/diagram.hpp"
#include "util.hpp"

using namespace kh;

TEST_CASE("empty source parses to the empty diagram") {
    Diagram d = parse_diagram("");
    CHECK(d.crossings.empty());
    CHECK(d.free_loops.empty());
    CHECK(resolve(d, Smoothing{0, 0}).loops.empty());
}

TEST_CASE("one positive kink on an unknot") {
    // closure of sigma_1 in B_2 is the 1-kink unknot diagram
    Diagram d = closure(BraidWord{2, {1}});
    auto [np, nn] = crossing_counts(d);
    CHECK(np == 1);
    CHECK(nn == 0);
    CHECK(resolve(d, Smoothing{0, 1}).loops.size() == 2);  // oriented resolution
    CHECK(resolve(d, Smoothing{1, 1}).loops.size() == 1);
}

TEST_CASE("emit/parse round-trip is the identity") {
    std::mt19937 rng(7);
    for (int i = 0; i < 30; ++i) {
        Diagram d = closure(kh_test::random_braid(rng));
        Diagram d2 = parse_diagram(emit_diagram(d));
        CHECK(d2 == d);
    }
    // crossingless loops survive too
    Diagram d = closure(BraidWord{3, {1}});  // column 3 is a free loop
    CHECK(d.free_loops.size() == 1);
    CHECK(parse_diagram(emit_diagram(d)) == d);
}

TEST_CASE("parser reports malformed input") {
    CHECK_THROWS_AS(parse_diagram("crossings x"), parse_error);
    CHECK_THROWS_AS(parse_diagram("crossings 1\n+ a1 a2 a3"), parse_error);
    // dangling arc: a3 appears once
    CHECK_THROWS_AS(parse_diagram("crossings 1\n+ a1 a2 a3 a1\nloop a2"), parse_error);
    // inconsistent orientation: both under-in slots of the two crossings share arcs
    CHECK_THROWS_AS(parse_diagram("crossings 2\n+ a1 a2 a3 a4\n+ a1 a2 a3 a4"), parse_error);
}

TEST_CASE("crossing counts on braid closures") {
    CHECK(crossing_counts(parse_diagram("")) == std::pair<int, int>{0, 0});
    CHECK(crossing_counts(closure(BraidWord{3, {1, 2}})) == std::pair<int, int>{2, 0});
    // (s1^-2 s2 s1^2)(s1 s2 s1^-1) s2^2
    BraidWord w{3, {-1, -1, 2, 1, 1, 1, 2, -1, 2, 2}};
    CHECK(crossing_counts(closure(w)) == std::pair<int, int>{7, 3});
    CHECK(closure(w).crossings.size() == 10);
}

TEST_CASE("oriented smoothing bit pattern") {
    CHECK(oriented_smoothing(closure(BraidWord{3, {1, 2, 1}})).bits == 0);
    CHECK(oriented_smoothing(closure(BraidWord{2, {-1}})).bits == 1);
    BraidWord w{3, {-1, -1, 2, 1, 1, 1, 2, -1, 2, 2}};
    CHECK(oriented_smoothing(closure(w)).bits == ((u64(1) << 0) | (u64(1) << 1) | (u64(1) << 7)));
}

TEST_CASE("braid closure of sigma_1^2 in B_2: oriented smoothing traces 0") {
    Diagram d = closure(BraidWord{2, {1, 1}});
    LoopSet ls = resolve(d, Smoothing{0, 2});
    REQUIRE(ls.loops.size() == 2);
    CHECK(ls.loops[0].tracing0);
    CHECK(ls.loops[1].tracing0);
    CHECK_FALSE(ls.loops[0].tracing1);
}

TEST_CASE("flipping one bit changes the loop count by exactly one") {
    std::mt19937 rng(11);
    for (int i = 0; i < 40; ++i) {
        Diagram d = closure(kh_test::random_braid(rng, 4, 9));
        int n = int(d.crossings.size());
        for (u64 bits = 0; bits < (u64(1) << n); ++bits) {
            size_t l0 = resolve(d, Smoothing{bits, n}).loops.size();
            for (int k = 0; k < n; ++k) {
                size_t l1 = resolve(d, Smoothing{bits ^ (u64(1) << k), n}).loops.size();
                CHECK(((l1 == l0 + 1) || (l1 + 1 == l0)));
            }
        }
    }
}

TEST_CASE("canonical loop ids are stable across repeated resolution") {
    std::mt19937 rng(3);
    Diagram d = closure(kh_test::random_braid(rng));
    int n = int(d.crossings.size());
    for (u64 bits = 0; bits < (u64(1) << n); ++bits) {
        LoopSet a = resolve(d, Smoothing{bits, n});
        LoopSet b = resolve(d, Smoothing{bits, n});
        REQUIRE(a.loops.size() == b.loops.size());
        for (size_t k = 0; k < a.loops.size(); ++k) {
            CHECK(a.loops[k].id == b.loops[k].id);
            CHECK(a.loops[k].arcs == b.loops[k].arcs);
        }
    }
}

TEST_CASE("resolve rejects length mismatch") {
    Diagram d = closure(BraidWord{2, {1}});
    CHECK_THROWS(resolve(d, Smoothing{0, 2}));
}
