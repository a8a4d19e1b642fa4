#pragma once

#include <cstdint>
#include <vector>

namespace cafl {

/// Stream family tags. A stream's key is derived from (seed, kind, a, b, c),
/// so draws depend only on those coordinates, never on scheduling order or
/// thread count. Values are mixed into the key: keep them stable so seeded
/// runs stay reproducible across releases.
enum class StreamKind : std::uint64_t {
    topology_shape = 1,   // per (round, cluster): connectivity parameter draw
    topology_relabel = 2, // per (round, cluster): vertex relabeling
    topology_delete = 3,  // per (round, cluster): edge failures
    suite_build = 4,      // per client: objective construction
    sgd_noise = 5,        // per (round, client): gradient noise
    sampling = 6,         // per (round, cluster): client selection
    ensemble = 7,         // per instance: bound-study graph generation
    mc_draw = 8,          // per draw: Monte Carlo resampling
};

/// Counter-based deterministic stream: splitmix64 over a key hashed from
/// (seed, kind, a, b, c). Cheap to construct at the point of use; value
/// semantics, no global state.
class RngStream {
public:
    RngStream(std::uint64_t seed, StreamKind kind, std::uint64_t a = 0,
              std::uint64_t b = 0, std::uint64_t c = 0);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53 random bits.
    double next_unit();

    /// Standard normal via Box-Muller; two uniforms per call, no caching.
    double next_gaussian();

    /// Uniform integer in [0, bound); bound >= 1. Unbiased (Lemire).
    std::uint64_t next_below(std::uint64_t bound);

    /// m distinct values from {0, ..., n-1}, returned sorted ascending.
    std::vector<int> sample_without_replacement(int n, int m);

private:
    std::uint64_t state_;
};

}  // namespace cafl
