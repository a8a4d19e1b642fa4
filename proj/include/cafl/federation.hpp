#pragma once

#include <cstdint>
#include <vector>

#include "cafl/linalg.hpp"
#include "cafl/objectives.hpp"
#include "cafl/spectral.hpp"
#include "cafl/topology.hpp"

namespace cafl {

enum class Algorithm {
    connectivity_aware,  // adaptive m from per-round degree summaries
    fedavg,              // no consensus phase, uniform sampling, fixed m
    d2d_fixed_m,         // consensus phase like connectivity_aware, m frozen
};

enum class ScheduleKind {
    inverse_time,  // eta_t = 4 / (T mu (t + t1)), burn-in shift t1 below
    geometric,     // eta_t = a * r^t
    constant,      // eta_t = a
};

enum class SamplingMode {
    ceiling,      // m_l = ceil(m n_l / n); effective size may exceed m
    apportioned,  // largest-remainder rounding; effective size == m
};

/// Burn-in shift and coefficient of the inverse-time step size:
/// t1 = floor(4(1 - 1/T) + (16T + 8 phi_max)(beta/mu)^2 + 1),
/// eta(t) = 4 / (T mu (t + t1)).
struct InverseTimeSchedule {
    long t1 = 0;
    double coeff = 0.0;
    double eta(long t) const { return coeff / static_cast<double>(t + t1); }
};

InverseTimeSchedule inverse_time_schedule(double mu, double beta, int t_local,
                                          double phi_max);

struct FederationConfig {
    Algorithm algorithm = Algorithm::connectivity_aware;
    int t_local = 5;          // local SGD steps per round
    long t_max = 200;         // global rounds
    double phi_max = 0.06;    // connectivity-factor threshold
    int m0 = 0;               // round-0 sample size; 0 = from round-0 summaries
    int fixed_m = 57;         // baselines only
    ScheduleKind schedule = ScheduleKind::inverse_time;
    double lr_a = 0.02;       // geometric / constant base step
    double lr_r = 0.1;        // geometric decay
    BoundPolicy bound_policy;
    SamplingMode sampling = SamplingMode::ceiling;
    double energy_ratio = 0.1;         // D2D cost per transmission, uplink = 1
    double target_gap_fraction = 0.0;  // early stop at gap <= frac * initial; 0 = off
    Vec x0;                            // initial model; empty = origin

    void validate(int n, int dim) const;  // throws ConfigError
};

/// Everything observable about one global round.
struct RoundRecord {
    long t = 0;
    int m_requested = 0;
    int m_effective = 0;
    std::vector<int> sampled;            // ascending client ids
    std::vector<std::uint8_t> participation;  // indicator over all clients
    Vec global_model;                    // x after the round
    Vec bar_model;                       // full-average counterpart
    double gap = 0.0;                    // ||global_model - x*||^2
    long d2d_tx = 0;
    long d2s_tx = 0;
    double phi_exact = 0.0;
    double psi_bound = 0.0;  // NaN when no consensus bound exists (fedavg)
    int weak_clusters = 0;   // clusters not strongly connected this round
};

struct RunResult {
    std::vector<RoundRecord> rounds;
    double initial_gap = 0.0;
    long t1 = 0;  // 0 unless the inverse-time schedule is active
    Vec final_model;
    double total_cost = 0.0;
    bool hit_target = false;
    long rounds_to_target = -1;   // rounds executed when the target was hit
    double cost_at_target = 0.0;
};

/// Cumulative update of `steps` local SGD iterations from x0 at step size
/// eta: returns x_final - x0. Throws NumericalError naming client and step
/// when an iterate goes non-finite.
Vec local_sgd_update(const ObjectiveSuite& task, int client, const Vec& x0,
                     int steps, double eta, RngStream& noise);

/// One consensus exchange: delta_local[i] = sum over in-neighbors j of
/// update[j] / out_degree(j), computed edge-wise. `updates` is indexed by
/// global client id; the result is indexed like g.vertices.
std::vector<Vec> intra_cluster_aggregate(const ClusterDigraph& g,
                                         const std::vector<Vec>& updates);

struct SampleResult {
    std::vector<int> chosen;        // ascending global ids
    std::vector<int> per_cluster;   // m_l per cluster
};

/// Per-cluster uniform sampling without replacement with m_l from the mode's
/// rounding rule. Clusters own contiguous id ranges in cluster_sizes order.
SampleResult stratified_sample(int m, const std::vector<int>& cluster_sizes,
                               SamplingMode mode, std::uint64_t seed, long round);

/// x + (1/|sampled|) * sum of deltas over the sampled ids.
Vec global_aggregate(const Vec& x, const std::vector<Vec>& deltas,
                     const std::vector<int>& sampled);

/// Full simulation loop for any of the three algorithms. Deterministic for
/// fixed seeds: all randomness is keyed by (seed, kind, round, entity), so
/// the result is byte-identical for every `threads` value.
RunResult run_federation(const ObjectiveSuite& task, const TopologyConfig& topo,
                         const FederationConfig& fed, std::uint64_t seed,
                         int threads);

}  // namespace cafl
