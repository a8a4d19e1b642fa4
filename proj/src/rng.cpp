#include "cafl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cafl/errors.hpp"

namespace cafl {
namespace {

// splitmix64 finalizer: bijective mix of a 64-bit word.
std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamKind kind, std::uint64_t a,
                     std::uint64_t b, std::uint64_t c) {
    // Chain each coordinate through the finalizer with a distinct round
    // offset so (kind, a, b, c) permutations land on unrelated keys.
    std::uint64_t h = seed;
    const std::uint64_t words[4] = {static_cast<std::uint64_t>(kind), a, b, c};
    for (int i = 0; i < 4; ++i) {
        h = mix64(h ^ mix64(words[i] + kGolden * static_cast<std::uint64_t>(i + 1)));
    }
    state_ = h;
}

std::uint64_t RngStream::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double RngStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
    // u1 in (0, 1] keeps the log finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
    if (bound == 0) throw InvariantViolation("next_below: bound must be >= 1");
    // Lemire's multiply-shift rejection: unbiased for every bound.
    while (true) {
        const std::uint64_t x = next_u64();
        const unsigned __int128 m =
            static_cast<unsigned __int128>(x) * static_cast<unsigned __int128>(bound);
        const std::uint64_t lo = static_cast<std::uint64_t>(m);
        if (lo >= bound || lo >= static_cast<std::uint64_t>(-bound) % bound) {
            return static_cast<std::uint64_t>(m >> 64);
        }
    }
}

std::vector<int> RngStream::sample_without_replacement(int n, int m) {
    if (n < 0 || m < 0 || m > n) {
        throw InvariantViolation("sample_without_replacement: need 0 <= m <= n");
    }
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    // Partial Fisher-Yates: after m swaps the prefix is the sample.
    for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace cafl
