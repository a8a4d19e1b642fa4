#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cafl/federation.hpp"

namespace cafl {

struct CostModel {
    double energy_ratio = 0.1;  // D2D transmission cost; uplink cost = 1
};

/// Running sum of d2s_tx + energy_ratio * d2d_tx, one entry per round.
std::vector<double> cumulative_cost(const std::vector<RoundRecord>& rounds,
                                    const CostModel& model);

/// Constants of the three-term worst-case decay bound on E||x^t - x*||^2.
struct ConvergenceBoundInputs {
    double mu = 1.0;
    double beta = 1.0;
    double rho = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    int t_local = 1;
    double phi_max = 0.0;
    long t1 = 1;
    double initial_gap = 0.0;
    int n = 1;
};

/// (t1/(t+t1))^2 g0 + 16((1/(nT))(rho/mu)^2 + 6 beta gamma/(T mu^2))/(t+t1)
/// + (32T + 16 phi_max)((2/T)(rho/mu)^2 + (4e/T)((rho/mu)^2 + 2(delta/mu)^2)
///   + 6(delta/mu)^2)/(t+t1). Non-increasing in t.
double convergence_bound(const ConvergenceBoundInputs& in, long t);

/// O(1/t) trend diagnostics over the tail half of a gap series.
struct RateFit {
    double c_hat = 0.0;        // least-squares C in gap ~ C/(t+1+t1)
    double sup_stat = 0.0;     // sup of (t+1+t1)*gap over the tail
    double median_stat = 0.0;  // median of the same statistic
    bool non_increasing_tail = false;  // raw tail gaps never rise (rel 1e-12)
};

RateFit rate_fit(const std::vector<double>& gaps, long t1);

/// One generated cluster's bound-tightness facts.
struct TightnessRow {
    int graph = 0;
    double alpha = 0.0;
    double eps = 0.0;
    double varphi = 0.0;
    double sigma1_sq = 0.0;
    double sigma2_sq = 0.0;
    BoundValue bound_balanced;
    BoundValue bound_general;
};

/// Generates n_graphs clusters from cfg (round index = graph index) and
/// reports both bounds against the exact singular values.
std::vector<TightnessRow> bound_tightness_study(const TopologyConfig& cfg,
                                                int n_graphs, int threads);

/// Mean/max slack of each bound stratified by alpha buckets of width 0.05.
struct TightnessBucket {
    double alpha_lo = 0.0;
    int count_balanced = 0;
    int count_general = 0;
    double mean_slack_balanced = 0.0;
    double max_slack_balanced = 0.0;
    double mean_slack_general = 0.0;
    double max_slack_general = 0.0;
};

std::vector<TightnessBucket> tightness_buckets(const std::vector<TightnessRow>& rows);

void write_tightness_csv(std::ostream& out, const std::vector<TightnessRow>& rows);

/// Frozen one-round state for resampling studies.
struct FrozenRoundState {
    Vec x;                        // model before the global step
    std::vector<Vec> deltas;      // per-client consensus outputs, global ids
    Vec bar_model;                // full-average next model
    Vec x_star;
    std::vector<int> cluster_sizes;
    int m = 1;
    SamplingMode mode = SamplingMode::ceiling;
};

/// Monte-Carlo check of the sampling decomposition
/// E||xhat - x*||^2 = E||xhat - xbar||^2 + ||xbar - x*||^2 (+ cross term):
/// the cross term's mean must sit within 3 standard errors of 0.
struct DecompositionCheck {
    int draws = 0;
    double mean_lhs = 0.0;
    double mean_mid = 0.0;
    double bar_gap = 0.0;
    double mean_cross = 0.0;
    double se_cross = 0.0;
    bool cross_within_3se = false;
};

DecompositionCheck decomposition_check(const FrozenRoundState& state, int draws,
                                       std::uint64_t seed);

}  // namespace cafl
