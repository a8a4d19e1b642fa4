#include "cafl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "cafl/errors.hpp"
#include "cafl/parallel.hpp"

namespace cafl {

std::vector<double> cumulative_cost(const std::vector<RoundRecord>& rounds,
                                    const CostModel& model) {
    if (!(model.energy_ratio >= 0.0)) {
        throw InvariantViolation("cumulative_cost: energy_ratio must be >= 0");
    }
    std::vector<double> cost;
    cost.reserve(rounds.size());
    double acc = 0.0;
    for (const auto& r : rounds) {
        acc += static_cast<double>(r.d2s_tx) +
               model.energy_ratio * static_cast<double>(r.d2d_tx);
        cost.push_back(acc);
    }
    return cost;
}

double convergence_bound(const ConvergenceBoundInputs& in, long t) {
    if (t < 0) throw InvariantViolation("convergence_bound: t must be >= 0");
    if (!(in.mu > 0.0) || !(in.beta >= in.mu) || in.t_local < 1 || in.t1 < 1 ||
        in.n < 1 || !(in.rho >= 0.0) || !(in.delta >= 0.0) || !(in.gamma >= 0.0) ||
        !(in.phi_max >= 0.0) || !(in.initial_gap >= 0.0)) {
        throw InvariantViolation("convergence_bound: invalid inputs");
    }
    const double T = static_cast<double>(in.t_local);
    const double shifted = static_cast<double>(t + in.t1);
    const double ratio_rho = in.rho / in.mu;
    const double ratio_delta = in.delta / in.mu;
    const double term1 = (static_cast<double>(in.t1) / shifted) *
                         (static_cast<double>(in.t1) / shifted) * in.initial_gap;
    const double term2 =
        16.0 *
        (ratio_rho * ratio_rho / (static_cast<double>(in.n) * T) +
         6.0 * in.beta * in.gamma / (T * in.mu * in.mu)) /
        shifted;
    const double term3 =
        (32.0 * T + 16.0 * in.phi_max) *
        ((2.0 / T) * ratio_rho * ratio_rho +
         (4.0 * std::numbers::e / T) *
             (ratio_rho * ratio_rho + 2.0 * ratio_delta * ratio_delta) +
         6.0 * ratio_delta * ratio_delta) /
        shifted;
    return term1 + term2 + term3;
}

RateFit rate_fit(const std::vector<double>& gaps, long t1) {
    const int total = static_cast<int>(gaps.size());
    if (total < 10) throw InvariantViolation("rate_fit: need at least 10 rounds");
    if (t1 < 1) throw InvariantViolation("rate_fit: t1 must be >= 1");
    const int start = total / 2;
    RateFit fit;
    double num = 0.0, den = 0.0;
    std::vector<double> stats;
    stats.reserve(total - start);
    fit.non_increasing_tail = true;
    // gaps[t] is the gap after round t completes, i.e. after t + 1 global
    // steps, so the matching decay abscissa is t + 1 + t1.
    for (int t = start; t < total; ++t) {
        const double z = 1.0 / static_cast<double>(t + 1 + t1);
        num += gaps[t] * z;
        den += z * z;
        stats.push_back(gaps[t] / z);
        if (t > start && gaps[t] > gaps[t - 1] * (1.0 + 1e-12)) {
            fit.non_increasing_tail = false;
        }
    }
    fit.c_hat = den > 0.0 ? num / den : 0.0;
    fit.sup_stat = *std::max_element(stats.begin(), stats.end());
    std::vector<double> sorted = stats;
    const std::size_t mid = sorted.size() / 2;
    std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
    fit.median_stat = sorted[mid];
    return fit;
}

std::vector<TightnessRow> bound_tightness_study(const TopologyConfig& cfg,
                                                int n_graphs, int threads) {
    cfg.validate();
    if (n_graphs < 1) throw InvariantViolation("bound_tightness_study: n_graphs >= 1");
    std::vector<TightnessRow> rows(n_graphs);
    parallel_for(0, n_graphs, threads, [&](int g) {
        // Round index doubles as the graph index; cluster 0's size is used.
        ClusterDigraph graph = generate_regular_cluster(cfg, 0, g);
        auto [pruned, outcome] = delete_edges(graph, cfg.p_fail, cfg.balanced_mode, cfg.seed);
        (void)outcome;
        const SpectralReport rep = analyze_cluster(pruned);
        TightnessRow row;
        row.graph = g;
        row.alpha = rep.degrees.alpha;
        row.eps = rep.degrees.eps;
        row.varphi = rep.degrees.varphi;
        row.sigma1_sq = rep.sigma1 * rep.sigma1;
        row.sigma2_sq = rep.sigma2 * rep.sigma2;
        row.bound_balanced = rep.bound_balanced;
        row.bound_general = rep.bound_general;
        rows[g] = row;
    });
    return rows;
}

namespace {

bool bound_usable(const BoundValue& b) {
    return b.status == BoundStatus::applicable ||
           b.status == BoundStatus::degenerate_fallback;
}

}  // namespace

std::vector<TightnessBucket> tightness_buckets(const std::vector<TightnessRow>& rows) {
    std::vector<TightnessBucket> buckets(20);
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        buckets[i].alpha_lo = 0.05 * static_cast<double>(i);
    }
    for (const auto& row : rows) {
        const int idx = std::clamp(static_cast<int>(row.alpha / 0.05), 0, 19);
        auto& b = buckets[idx];
        const double exact = row.sigma1_sq + row.sigma2_sq;
        if (bound_usable(row.bound_balanced)) {
            const double slack = row.bound_balanced.value - exact;
            b.mean_slack_balanced += slack;
            b.max_slack_balanced = b.count_balanced == 0
                                       ? slack
                                       : std::max(b.max_slack_balanced, slack);
            ++b.count_balanced;
        }
        if (bound_usable(row.bound_general)) {
            const double slack = row.bound_general.value - exact;
            b.mean_slack_general += slack;
            b.max_slack_general =
                b.count_general == 0 ? slack : std::max(b.max_slack_general, slack);
            ++b.count_general;
        }
    }
    std::vector<TightnessBucket> filled;
    for (auto& b : buckets) {
        if (b.count_balanced == 0 && b.count_general == 0) continue;
        if (b.count_balanced > 0) b.mean_slack_balanced /= b.count_balanced;
        if (b.count_general > 0) b.mean_slack_general /= b.count_general;
        filled.push_back(b);
    }
    return filled;
}

void write_tightness_csv(std::ostream& out, const std::vector<TightnessRow>& rows) {
    const auto put = [&out](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    out << "graph,alpha,eps,varphi,sigma1_sq,sigma2_sq,bound_balanced,"
           "balanced_status,bound_general,general_status,slack_balanced,"
           "slack_general\n";
    for (const auto& r : rows) {
        const double exact = r.sigma1_sq + r.sigma2_sq;
        out << r.graph << ",";
        put(r.alpha);
        out << ",";
        put(r.eps);
        out << ",";
        put(r.varphi);
        out << ",";
        put(r.sigma1_sq);
        out << ",";
        put(r.sigma2_sq);
        out << ",";
        if (bound_usable(r.bound_balanced)) put(r.bound_balanced.value);
        else out << "nan";
        out << "," << to_string(r.bound_balanced.status) << ",";
        if (bound_usable(r.bound_general)) put(r.bound_general.value);
        else out << "nan";
        out << "," << to_string(r.bound_general.status) << ",";
        if (bound_usable(r.bound_balanced)) put(r.bound_balanced.value - exact);
        else out << "nan";
        out << ",";
        if (bound_usable(r.bound_general)) put(r.bound_general.value - exact);
        else out << "nan";
        out << "\n";
    }
}

DecompositionCheck decomposition_check(const FrozenRoundState& state, int draws,
                                       std::uint64_t seed) {
    if (draws < 2) throw InvariantViolation("decomposition_check: draws must be >= 2");
    const int n = static_cast<int>(state.deltas.size());
    int total = 0;
    for (int s : state.cluster_sizes) total += s;
    if (total != n) {
        throw InvariantViolation("decomposition_check: cluster sizes and deltas disagree");
    }
    DecompositionCheck check;
    check.draws = draws;
    check.bar_gap = squared_distance(state.bar_model, state.x_star);
    double sum_lhs = 0.0, sum_mid = 0.0, sum_cross = 0.0, sum_cross_sq = 0.0;
    for (int d = 0; d < draws; ++d) {
        const auto sample =
            stratified_sample(state.m, state.cluster_sizes, state.mode, seed, d);
        const Vec xhat = global_aggregate(state.x, state.deltas, sample.chosen);
        const double lhs = squared_distance(xhat, state.x_star);
        const double mid = squared_distance(xhat, state.bar_model);
        Vec a = xhat;
        axpy(-1.0, state.bar_model, a);
        Vec b = state.bar_model;
        axpy(-1.0, state.x_star, b);
        const double cross = 2.0 * dot(a, b);
        sum_lhs += lhs;
        sum_mid += mid;
        sum_cross += cross;
        sum_cross_sq += cross * cross;
    }
    check.mean_lhs = sum_lhs / draws;
    check.mean_mid = sum_mid / draws;
    check.mean_cross = sum_cross / draws;
    const double var =
        std::max(0.0, sum_cross_sq / draws - check.mean_cross * check.mean_cross);
    check.se_cross = std::sqrt(var / draws);
    // Absolute guard covers the zero-variance full-participation case.
    const double tol = 3.0 * check.se_cross +
                       1e-12 * (std::abs(check.bar_gap) + check.mean_mid + 1.0);
    check.cross_within_3se = std::abs(check.mean_cross) <= tol;
    return check;
}

}  // namespace cafl
