#include "cafl/federation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cafl/errors.hpp"
#include "cafl/parallel.hpp"

namespace cafl {

InverseTimeSchedule inverse_time_schedule(double mu, double beta, int t_local,
                                          double phi_max) {
    if (!(mu > 0.0) || !(beta >= mu) || t_local < 1 || !(phi_max >= 0.0)) {
        throw InvariantViolation("inverse_time_schedule: bad inputs");
    }
    const double ratio = beta / mu;
    const double raw = 4.0 * (1.0 - 1.0 / t_local) +
                       (16.0 * t_local + 8.0 * phi_max) * ratio * ratio + 1.0;
    InverseTimeSchedule s;
    s.t1 = static_cast<long>(std::floor(raw));
    s.coeff = 4.0 / (t_local * mu);
    return s;
}

void FederationConfig::validate(int n, int dim) const {
    if (t_local < 1) throw ConfigError("federation", 0, "t_local must be >= 1");
    if (t_max < 0) throw ConfigError("federation", 0, "t_max must be >= 0");
    if (!(phi_max >= 0.0)) throw ConfigError("federation", 0, "phi_max must be >= 0");
    if (m0 < 0 || m0 > n) throw ConfigError("federation", 0, "m0 must lie in [0, n]");
    if (algorithm != Algorithm::connectivity_aware && (fixed_m < 1 || fixed_m > n)) {
        throw ConfigError("federation", 0, "fixed_m must lie in [1, n]");
    }
    if (schedule != ScheduleKind::inverse_time && !(lr_a > 0.0)) {
        throw ConfigError("federation", 0, "lr_a must be > 0");
    }
    if (schedule == ScheduleKind::geometric && !(lr_r > 0.0 && lr_r <= 1.0)) {
        throw ConfigError("federation", 0, "lr_r must lie in (0, 1]");
    }
    if (!(energy_ratio >= 0.0)) throw ConfigError("federation", 0, "energy_ratio must be >= 0");
    if (!(target_gap_fraction >= 0.0)) {
        throw ConfigError("federation", 0, "target_gap_fraction must be >= 0");
    }
    if (!x0.empty() && static_cast<int>(x0.size()) != dim) {
        throw ConfigError("federation", 0, "x0 dimension must match the objective");
    }
}

Vec local_sgd_update(const ObjectiveSuite& task, int client, const Vec& x0,
                     int steps, double eta, RngStream& noise) {
    if (steps < 1 || !(eta > 0.0)) {
        throw InvariantViolation("local_sgd_update: need steps >= 1, eta > 0");
    }
    Vec x = x0;
    for (int k = 0; k < steps; ++k) {
        const Vec g = task.stochastic_gradient(client, x, noise);
        axpy(-eta, g, x);
        for (double v : x) {
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "local SGD diverged: client " << client << ", step " << k + 1
                    << ", eta " << eta;
                throw NumericalError(msg.str());
            }
        }
    }
    axpy(-1.0, x0, x);
    return x;
}

std::vector<Vec> intra_cluster_aggregate(const ClusterDigraph& g,
                                         const std::vector<Vec>& updates) {
    g.validate();
    const int s = g.size();
    const auto douts = g.out_degrees();
    std::size_t dim = 0;
    for (int local = 0; local < s; ++local) {
        const int id = g.vertices[local];
        if (id < 0 || id >= static_cast<int>(updates.size()) || updates[id].empty()) {
            throw InvariantViolation("intra_cluster_aggregate: missing update for client " +
                                     std::to_string(id));
        }
        if (local == 0) dim = updates[id].size();
        if (updates[id].size() != dim) {
            throw InvariantViolation("intra_cluster_aggregate: inconsistent dimensions");
        }
    }
    std::vector<Vec> deltas(s, Vec(dim, 0.0));
    // Edge order is canonical (sorted), so accumulation order is fixed.
    for (const auto& [u, v] : g.edges) {
        const Vec& src = updates[g.vertices[u]];
        const double w = 1.0 / static_cast<double>(douts[u]);
        axpy(w, src, deltas[v]);
    }
    return deltas;
}

SampleResult stratified_sample(int m, const std::vector<int>& cluster_sizes,
                               SamplingMode mode, std::uint64_t seed, long round) {
    const int c = static_cast<int>(cluster_sizes.size());
    if (c < 1) throw InvariantViolation("stratified_sample: no clusters");
    int n = 0;
    for (int s : cluster_sizes) {
        if (s < 1) throw InvariantViolation("stratified_sample: empty cluster");
        n += s;
    }
    if (m < 1 || m > n) throw InvariantViolation("stratified_sample: need 1 <= m <= n");

    SampleResult res;
    res.per_cluster.assign(c, 0);
    if (mode == SamplingMode::ceiling) {
        for (int l = 0; l < c; ++l) {
            // ceil(m * n_l / n) in exact integer arithmetic
            const long num = static_cast<long>(m) * cluster_sizes[l];
            res.per_cluster[l] = static_cast<int>((num + n - 1) / n);
        }
    } else {
        // Largest-remainder apportionment; ties resolved by cluster index.
        std::vector<long> rem(c, 0);
        int base_total = 0;
        for (int l = 0; l < c; ++l) {
            const long num = static_cast<long>(m) * cluster_sizes[l];
            res.per_cluster[l] = static_cast<int>(num / n);
            rem[l] = num % n;
            base_total += res.per_cluster[l];
        }
        int leftover = m - base_total;
        std::vector<int> order(c);
        for (int l = 0; l < c; ++l) order[l] = l;
        std::stable_sort(order.begin(), order.end(),
                         [&rem](int a, int b) { return rem[a] > rem[b]; });
        for (int idx = 0; leftover > 0; idx = (idx + 1) % c) {
            const int l = order[idx];
            if (res.per_cluster[l] < cluster_sizes[l]) {
                ++res.per_cluster[l];
                --leftover;
            }
        }
    }
    int first = 0;
    for (int l = 0; l < c; ++l) {
        const int m_l = res.per_cluster[l];
        if (m_l > cluster_sizes[l]) {
            throw InvariantViolation("stratified_sample: cluster quota exceeds size");
        }
        if (m_l > 0) {
            RngStream rs(seed, StreamKind::sampling, static_cast<std::uint64_t>(round),
                         static_cast<std::uint64_t>(l));
            for (int local : rs.sample_without_replacement(cluster_sizes[l], m_l)) {
                res.chosen.push_back(first + local);
            }
        }
        first += cluster_sizes[l];
    }
    return res;
}

Vec global_aggregate(const Vec& x, const std::vector<Vec>& deltas,
                     const std::vector<int>& sampled) {
    if (sampled.empty()) throw InvariantViolation("global_aggregate: empty sample");
    Vec sum(x.size(), 0.0);
    for (int id : sampled) {
        if (id < 0 || id >= static_cast<int>(deltas.size())) {
            throw InvariantViolation("global_aggregate: sampled id out of range");
        }
        axpy(1.0, deltas[id], sum);
    }
    Vec out = x;
    axpy(1.0 / static_cast<double>(sampled.size()), sum, out);
    return out;
}

namespace {

constexpr std::uint64_t kWholePopulation = ~0ULL;  // sampling stream tag for fedavg

std::vector<int> uniform_sample(int n, int m, std::uint64_t seed, long round) {
    RngStream rs(seed, StreamKind::sampling, static_cast<std::uint64_t>(round),
                 kWholePopulation);
    return rs.sample_without_replacement(n, m);
}

}  // namespace

RunResult run_federation(const ObjectiveSuite& task, const TopologyConfig& topo,
                         const FederationConfig& fed, std::uint64_t seed,
                         int threads) {
    const int n = task.n_clients();
    const int p = task.dim();
    topo.validate();
    if (topo.n != n) {
        throw ConfigError("federation", 0, "topology n and objective client count differ");
    }
    fed.validate(n, p);
    const bool uses_consensus = fed.algorithm != Algorithm::fedavg;

    InverseTimeSchedule inv{};
    if (fed.schedule == ScheduleKind::inverse_time) {
        inv = inverse_time_schedule(task.mu(), task.beta(), fed.t_local, fed.phi_max);
    }
    const auto step_size = [&](long t) {
        switch (fed.schedule) {
            case ScheduleKind::inverse_time: return inv.eta(t);
            case ScheduleKind::geometric: return fed.lr_a * std::pow(fed.lr_r, t);
            case ScheduleKind::constant: return fed.lr_a;
        }
        return 0.0;
    };

    RunResult result;
    result.t1 = inv.t1;
    Vec x = fed.x0.empty() ? Vec(p, 0.0) : fed.x0;
    result.initial_gap = squared_distance(x, task.optimum());
    const double target = fed.target_gap_fraction > 0.0
                              ? fed.target_gap_fraction * result.initial_gap
                              : -1.0;

    std::vector<Vec> updates(n);
    std::vector<Vec> deltas(n);
    for (long t = 0; t < fed.t_max; ++t) {
        // Topology and spectral summaries for this round.
        std::vector<ClusterDigraph> clusters;
        std::vector<SpectralReport> reports;
        long d2d_tx = 0;
        int weak = 0;
        if (uses_consensus) {
            clusters = assemble_network(topo, t);
            reports.resize(clusters.size());
            parallel_for(0, static_cast<int>(clusters.size()), threads,
                         [&](int l) { reports[l] = analyze_cluster(clusters[l]); });
            for (const auto& g : clusters) d2d_tx += static_cast<long>(g.edges.size());
            for (const auto& r : reports) {
                if (!r.is_strongly_connected) ++weak;
            }
        }

        // Sample size for this round, from this round's summaries.
        int m_requested = 0;
        switch (fed.algorithm) {
            case Algorithm::connectivity_aware:
                m_requested = (t == 0 && fed.m0 > 0)
                                  ? fed.m0
                                  : select_sample_size(reports, fed.phi_max,
                                                       fed.bound_policy);
                break;
            case Algorithm::fedavg:
            case Algorithm::d2d_fixed_m:
                m_requested = fed.fixed_m;
                break;
        }

        // Local SGD for every client, slot-parallel.
        const double eta = step_size(t);
        parallel_for(0, n, threads, [&](int i) {
            RngStream noise(seed, StreamKind::sgd_noise, static_cast<std::uint64_t>(t),
                            static_cast<std::uint64_t>(i));
            updates[i] = local_sgd_update(task, i, x, fed.t_local, eta, noise);
        });

        // Consensus exchange (or passthrough for fedavg).
        if (uses_consensus) {
            for (const auto& g : clusters) {
                auto local = intra_cluster_aggregate(g, updates);
                for (int v = 0; v < g.size(); ++v) {
                    deltas[g.vertices[v]] = std::move(local[v]);
                }
            }
        } else {
            for (int i = 0; i < n; ++i) deltas[i] = updates[i];
        }

        // Client selection and the global step.
        RoundRecord rec;
        rec.t = t;
        rec.m_requested = m_requested;
        if (uses_consensus) {
            auto sample = stratified_sample(m_requested, topo.cluster_sizes, fed.sampling,
                                            seed, t);
            rec.sampled = std::move(sample.chosen);
        } else {
            rec.sampled = uniform_sample(n, m_requested, seed, t);
        }
        rec.m_effective = static_cast<int>(rec.sampled.size());
        rec.participation.assign(n, 0);
        for (int id : rec.sampled) rec.participation[id] = 1;

        Vec x_next = global_aggregate(x, deltas, rec.sampled);

        // Full-average counterpart from the raw updates.
        Vec u_sum(p, 0.0);
        for (int i = 0; i < n; ++i) axpy(1.0, updates[i], u_sum);
        rec.bar_model = x;
        axpy(1.0 / static_cast<double>(n), u_sum, rec.bar_model);

        rec.global_model = x_next;
        rec.gap = squared_distance(x_next, task.optimum());
        rec.d2d_tx = d2d_tx;
        rec.d2s_tx = rec.m_effective;
        rec.weak_clusters = weak;
        if (uses_consensus) {
            rec.phi_exact = connectivity_factor(rec.m_effective, reports, true,
                                                fed.bound_policy);
            rec.psi_bound = connectivity_factor(rec.m_effective, reports, false,
                                                fed.bound_policy);
        } else {
            // Identity mixing: every cluster term is exactly 1.
            rec.phi_exact = static_cast<double>(n) / rec.m_effective - 1.0;
            rec.psi_bound = std::numeric_limits<double>::quiet_NaN();
        }

        result.total_cost += rec.d2s_tx + fed.energy_ratio * static_cast<double>(rec.d2d_tx);
        x = std::move(x_next);
        const double gap = rec.gap;
        result.rounds.push_back(std::move(rec));

        if (target >= 0.0 && gap <= target) {
            result.hit_target = true;
            result.rounds_to_target = t + 1;
            result.cost_at_target = result.total_cost;
            break;
        }
    }
    result.final_model = x;
    return result;
}

}  // namespace cafl
