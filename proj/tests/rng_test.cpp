#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "cafl/rng.hpp"

using cafl::RngStream;
using cafl::StreamKind;

TEST_SUITE("rng") {

TEST_CASE("identical coordinates give identical sequences") {
    RngStream a(42, StreamKind::sgd_noise, 3, 7, 1);
    RngStream b(42, StreamKind::sgd_noise, 3, 7, 1);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("any coordinate change moves the stream") {
    RngStream base(42, StreamKind::sgd_noise, 3, 7, 1);
    const std::uint64_t first = RngStream(42, StreamKind::sgd_noise, 3, 7, 1).next_u64();
    CHECK(base.next_u64() == first);
    CHECK(RngStream(43, StreamKind::sgd_noise, 3, 7, 1).next_u64() != first);
    CHECK(RngStream(42, StreamKind::sampling, 3, 7, 1).next_u64() != first);
    CHECK(RngStream(42, StreamKind::sgd_noise, 4, 7, 1).next_u64() != first);
    CHECK(RngStream(42, StreamKind::sgd_noise, 3, 8, 1).next_u64() != first);
    CHECK(RngStream(42, StreamKind::sgd_noise, 3, 7, 2).next_u64() != first);
}

TEST_CASE("draws are independent of construction or interleaving order") {
    RngStream a1(7, StreamKind::mc_draw, 1);
    RngStream b1(7, StreamKind::mc_draw, 2);
    std::vector<std::uint64_t> seq_a, seq_b;
    for (int i = 0; i < 50; ++i) {
        seq_a.push_back(a1.next_u64());
        seq_b.push_back(b1.next_u64());
    }
    RngStream b2(7, StreamKind::mc_draw, 2);
    RngStream a2(7, StreamKind::mc_draw, 1);
    for (int i = 0; i < 50; ++i) {
        CHECK(b2.next_u64() == seq_b[i]);
        CHECK(a2.next_u64() == seq_a[i]);
    }
}

TEST_CASE("next_unit stays in [0,1) with plausible mean") {
    RngStream s(1, StreamKind::mc_draw);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_unit();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("next_gaussian has unit variance and zero mean") {
    RngStream s(2, StreamKind::mc_draw);
    double sum = 0.0, sumsq = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const double g = s.next_gaussian();
        REQUIRE(std::isfinite(g));
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("next_below respects the bound and is roughly uniform") {
    RngStream s(3, StreamKind::mc_draw);
    const std::uint64_t bound = 7;
    std::vector<int> counts(bound, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t v = s.next_below(bound);
        REQUIRE(v < bound);
        ++counts[v];
    }
    for (std::uint64_t v = 0; v < bound; ++v) {
        CHECK(counts[v] > n / 7 * 0.9);
        CHECK(counts[v] < n / 7 * 1.1);
    }
    CHECK(s.next_below(1) == 0);
}

TEST_CASE("sample_without_replacement returns a sorted subset") {
    RngStream s(4, StreamKind::sampling, 9, 9);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pick = s.sample_without_replacement(20, 8);
        REQUIRE(pick.size() == 8);
        CHECK(std::is_sorted(pick.begin(), pick.end()));
        std::set<int> uniq(pick.begin(), pick.end());
        CHECK(uniq.size() == 8);
        CHECK(*pick.begin() >= 0);
        CHECK(pick.back() < 20);
    }
}

TEST_CASE("sample_without_replacement with m == n is the full range") {
    RngStream s(5, StreamKind::sampling);
    const auto pick = s.sample_without_replacement(9, 9);
    REQUIRE(pick.size() == 9);
    for (int i = 0; i < 9; ++i) CHECK(pick[i] == i);
}

TEST_CASE("sample_without_replacement includes each element at rate m/n") {
    std::vector<int> hits(10, 0);
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        RngStream s(6, StreamKind::sampling, static_cast<std::uint64_t>(t));
        for (int v : s.sample_without_replacement(10, 3)) ++hits[v];
    }
    for (int v = 0; v < 10; ++v) {
        const double rate = static_cast<double>(hits[v]) / trials;
        CHECK(rate > 0.27);
        CHECK(rate < 0.33);
    }
}

}  // TEST_SUITE
