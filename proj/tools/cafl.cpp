// Command-line front end: generate topologies, analyze their mixing spectra,
// run federated simulations, compare algorithms, and sweep the connectivity
// threshold. Exit codes: 0 success, 2 bad configuration or usage, 3 numerical
// failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cafl/analysis.hpp"
#include "cafl/config.hpp"
#include "cafl/errors.hpp"
#include "cafl/federation.hpp"
#include "cafl/ioutil.hpp"
#include "cafl/objectives.hpp"
#include "cafl/spectral.hpp"
#include "cafl/topology.hpp"

namespace {

using nlohmann::json;

struct Common {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_path, "INI config file (omit for defaults)");
    cmd->add_option("-o,--out", c.out, "output directory");
    cmd->add_option("-s,--seed", c.seed, "run seed (overrides [output] seed)");
    cmd->add_option("-j,--threads", c.threads, "worker threads (results identical for any value)")
        ->check(CLI::PositiveNumber);
}

cafl::ExperimentConfig load_config(const Common& c) {
    cafl::ExperimentConfig cfg = c.config_path.empty()
                                     ? cafl::parse_config_text("", "defaults")
                                     : cafl::parse_config_file(c.config_path);
    if (c.seed_given) cfg.seed = c.seed;
    cfg.topology.seed = cfg.seed;
    return cfg;
}

std::filesystem::path resolve_out(const Common& c, const cafl::ExperimentConfig& cfg) {
    if (!c.out.empty()) return c.out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("CAFL_OUTPUT_ROOT")) {
        if (*env != '\0') return env;
    }
    return "out";
}

std::unique_ptr<cafl::ObjectiveSuite> build_task(const cafl::ExperimentConfig& cfg) {
    const auto& o = cfg.objective;
    if (o.kind == cafl::ObjectiveParams::Kind::quadratic) {
        return std::make_unique<cafl::QuadraticTask>(cafl::build_quadratic_suite(
            cfg.topology.n, o.dim, o.mu, o.beta, o.spread, o.rho, o.seed));
    }
    return std::make_unique<cafl::LogisticTask>(cafl::build_logistic_suite(
        cfg.topology.n, o.dim, o.samples_per_client, o.classes, o.l2, o.rho, o.seed));
}

cafl::Vec resolve_x0(const cafl::ExperimentConfig& cfg, const cafl::ObjectiveSuite& task) {
    const int p = task.dim();
    const double step = cfg.start_value / std::sqrt(static_cast<double>(p));
    switch (cfg.start_mode) {
        case cafl::ExperimentConfig::StartMode::origin: return {};
        case cafl::ExperimentConfig::StartMode::offset: return cafl::Vec(p, step);
        case cafl::ExperimentConfig::StartMode::warm: {
            cafl::Vec x = task.optimum();
            for (double& v : x) v += step;
            return x;
        }
    }
    return {};
}

json degrees_json(const cafl::DegreeSummary& d) {
    return json{{"n_l", d.n_l},
                {"d_out_min", d.d_out_min},
                {"d_out_max", d.d_out_max},
                {"d_in_max", d.d_in_max},
                {"alpha", d.alpha},
                {"eps", d.eps},
                {"varphi", d.varphi},
                {"eps_net", d.eps_net},
                {"degree_balanced", d.degree_balanced}};
}

json bound_json(const cafl::BoundValue& b) {
    json j{{"status", cafl::to_string(b.status)}};
    if (b.status != cafl::BoundStatus::inapplicable) j["value"] = b.value;
    return j;
}

json report_json(const cafl::SpectralReport& r) {
    return json{{"cluster", r.cluster_id},
                {"round", r.round},
                {"degrees", degrees_json(r.degrees)},
                {"sigma1", r.sigma1},
                {"sigma2", r.sigma2},
                {"phi_term", r.phi_term},
                {"bound_balanced", bound_json(r.bound_balanced)},
                {"bound_general", bound_json(r.bound_general)},
                {"strongly_connected", r.is_strongly_connected}};
}

json run_summary_json(const cafl::ExperimentConfig& cfg, const cafl::FederationConfig& fed,
                      const cafl::ObjectiveSuite& task, const cafl::RunResult& res,
                      std::uint64_t seed) {
    const auto& rounds = res.rounds;
    json j;
    j["algorithm"] = cafl::to_string(fed.algorithm);
    j["seed"] = seed;
    j["n"] = task.n_clients();
    j["dim"] = task.dim();
    j["t_local"] = fed.t_local;
    j["t_max"] = fed.t_max;
    j["phi_max"] = fed.phi_max;
    j["schedule"] = cafl::to_string(fed.schedule);
    j["bound"] = cafl::to_string(fed.bound_policy.form);
    j["sampling"] = cafl::to_string(fed.sampling);
    j["start"] = cafl::to_string(cfg.start_mode);
    j["rounds_run"] = rounds.size();
    j["t1"] = res.t1;
    j["initial_gap"] = res.initial_gap;
    j["final_gap"] = rounds.empty() ? res.initial_gap : rounds.back().gap;
    j["total_cost"] = res.total_cost;
    j["hit_target"] = res.hit_target;
    if (res.hit_target) {
        j["rounds_to_target"] = res.rounds_to_target;
        j["cost_at_target"] = res.cost_at_target;
    }
    if (!rounds.empty()) {
        j["m_first"] = rounds.front().m_requested;
        j["m_last"] = rounds.back().m_requested;
        long d2d = 0, d2s = 0;
        for (const auto& r : rounds) { d2d += r.d2d_tx; d2s += r.d2s_tx; }
        j["d2d_tx_total"] = d2d;
        j["d2s_tx_total"] = d2s;
    }
    if (rounds.size() >= 10 && res.t1 > 0) {
        std::vector<double> gaps;
        gaps.reserve(rounds.size());
        for (const auto& r : rounds) gaps.push_back(r.gap);
        const cafl::RateFit fit = cafl::rate_fit(gaps, res.t1);
        j["rate_fit"] = json{{"c_hat", fit.c_hat},
                             {"sup_stat", fit.sup_stat},
                             {"median_stat", fit.median_stat},
                             {"non_increasing_tail", fit.non_increasing_tail}};
    }
    if (fed.schedule == cafl::ScheduleKind::inverse_time && !rounds.empty()) {
        const auto& h = task.heterogeneity();
        cafl::ConvergenceBoundInputs in;
        in.mu = task.mu();
        in.beta = task.beta();
        in.rho = task.rho();
        in.delta = h.delta;
        in.gamma = h.gamma;
        in.t_local = fed.t_local;
        in.phi_max = fed.phi_max;
        in.t1 = res.t1;
        in.initial_gap = res.initial_gap;
        in.n = task.n_clients();
        j["bound_final"] = cafl::convergence_bound(in, static_cast<long>(rounds.size()));
    }
    return j;
}

void emit(const std::filesystem::path& path, const std::string& content) {
    cafl::write_text_file_atomic(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_gen(const Common& c, long rounds) {
    const auto cfg = load_config(c);
    const auto out = resolve_out(c, cfg) / "topology";
    json manifest;
    manifest["n"] = cfg.topology.n;
    manifest["clusters"] = cfg.topology.c;
    manifest["cluster_sizes"] = cfg.topology.cluster_sizes;
    manifest["k_min"] = cfg.topology.k_min;
    manifest["k_max"] = cfg.topology.k_max;
    manifest["p_fail"] = cfg.topology.p_fail;
    manifest["balanced_mode"] = cfg.topology.balanced_mode;
    manifest["seed"] = cfg.seed;
    manifest["rounds"] = rounds;
    json files = json::array();
    for (long t = 0; t < rounds; ++t) {
        const auto clusters = cafl::assemble_network(cfg.topology, t);
        for (const auto& g : clusters) {
            std::ostringstream body;
            cafl::write_edge_list(body, g);
            const std::string name = "round_" + std::to_string(t) + "_cluster_" +
                                     std::to_string(g.cluster_id) + ".edges";
            cafl::write_text_file_atomic(out / name, body.str());
            files.push_back(name);
        }
    }
    manifest["files"] = files;
    emit(out / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "generated " << rounds << " round(s) x " << cfg.topology.c
              << " cluster(s)\n";
    return 0;
}

int cmd_analyze(const Common& c, const std::vector<std::string>& edge_files,
                long round, int tightness_graphs) {
    const auto cfg = load_config(c);
    const auto out = resolve_out(c, cfg);

    if (tightness_graphs > 0) {
        const auto rows = cafl::bound_tightness_study(cfg.topology, tightness_graphs,
                                                      c.threads);
        std::ostringstream csv;
        cafl::write_tightness_csv(csv, rows);
        emit(out / "tightness.csv", csv.str());
        json buckets = json::array();
        for (const auto& b : cafl::tightness_buckets(rows)) {
            buckets.push_back(json{{"alpha_lo", b.alpha_lo},
                                   {"count_balanced", b.count_balanced},
                                   {"count_general", b.count_general},
                                   {"mean_slack_balanced", b.mean_slack_balanced},
                                   {"max_slack_balanced", b.max_slack_balanced},
                                   {"mean_slack_general", b.mean_slack_general},
                                   {"max_slack_general", b.max_slack_general}});
        }
        std::cout << json{{"graphs", rows.size()}, {"buckets", buckets}}.dump(2) << "\n";
        return 0;
    }

    std::vector<cafl::SpectralReport> reports;
    if (!edge_files.empty()) {
        for (const auto& path : edge_files) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw cafl::ConfigError(path, 0, "cannot open edge-list file");
            reports.push_back(cafl::analyze_cluster(cafl::read_edge_list(in, path)));
        }
    } else {
        for (const auto& g : cafl::assemble_network(cfg.topology, round)) {
            reports.push_back(cafl::analyze_cluster(g));
        }
    }

    json j;
    j["clusters"] = json::array();
    for (const auto& r : reports) j["clusters"].push_back(report_json(r));
    j["selected_m"] = cafl::select_sample_size(reports, cfg.federation.phi_max,
                                               cfg.federation.bound_policy);
    j["phi_max"] = cfg.federation.phi_max;
    const std::string text = j.dump(2) + "\n";
    emit(out / "analysis.json", text);
    std::cout << text;
    return 0;
}

int cmd_run(const Common& c, const std::string& algorithm, long t_max_override,
            double target_override) {
    auto cfg = load_config(c);
    auto fed = cfg.federation;
    if (!algorithm.empty()) {
        if (algorithm == "conn_aware") fed.algorithm = cafl::Algorithm::connectivity_aware;
        else if (algorithm == "fedavg") fed.algorithm = cafl::Algorithm::fedavg;
        else if (algorithm == "d2d_fixed_m") fed.algorithm = cafl::Algorithm::d2d_fixed_m;
        else throw cafl::ConfigError("--algorithm", 0,
                                     "must be conn_aware, fedavg, or d2d_fixed_m");
    }
    if (t_max_override > 0) fed.t_max = t_max_override;
    if (target_override >= 0.0) fed.target_gap_fraction = target_override;

    const auto task = build_task(cfg);
    fed.x0 = resolve_x0(cfg, *task);
    const auto res = cafl::run_federation(*task, cfg.topology, fed, cfg.seed, c.threads);

    const auto out = resolve_out(c, cfg);
    emit(out / "rounds.csv", cafl::rounds_csv(res, cafl::CostModel{fed.energy_ratio}));
    const json summary = run_summary_json(cfg, fed, *task, res, cfg.seed);
    emit(out / "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_compare(const Common& c, int seeds_override, long t_max, double target) {
    auto cfg = load_config(c);
    const int n_seeds = seeds_override > 0 ? seeds_override : cfg.compare_seeds;
    if (target <= 0.0) {
        target = cfg.federation.target_gap_fraction > 0.0
                     ? cfg.federation.target_gap_fraction
                     : 1e-3;
    }

    const auto task = build_task(cfg);
    const cafl::Vec x0 = resolve_x0(cfg, *task);

    const cafl::Algorithm algos[] = {cafl::Algorithm::connectivity_aware,
                                     cafl::Algorithm::fedavg,
                                     cafl::Algorithm::d2d_fixed_m};
    std::ostringstream csv;
    csv << "algorithm,seed,hit,rounds,cost\n";
    json means = json::array();
    for (const auto algo : algos) {
        double sum_rounds = 0.0, sum_cost = 0.0;
        bool all_hit = true;
        for (int i = 0; i < n_seeds; ++i) {
            const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
            auto topo = cfg.topology;
            topo.seed = seed;
            auto fed = cfg.federation;
            fed.algorithm = algo;
            fed.t_max = t_max;
            fed.target_gap_fraction = target;
            fed.x0 = x0;
            const auto res = cafl::run_federation(*task, topo, fed, seed, c.threads);
            const long rounds = res.hit_target ? res.rounds_to_target
                                               : static_cast<long>(res.rounds.size());
            const double cost = res.hit_target ? res.cost_at_target : res.total_cost;
            all_hit = all_hit && res.hit_target;
            sum_rounds += static_cast<double>(rounds);
            sum_cost += cost;
            csv << cafl::to_string(algo) << ',' << seed << ',' << (res.hit_target ? 1 : 0)
                << ',' << rounds << ',' << cafl::format_double(cost) << '\n';
        }
        means.push_back(json{{"algorithm", cafl::to_string(algo)},
                             {"all_hit", all_hit},
                             {"mean_rounds", sum_rounds / n_seeds},
                             {"mean_cost", sum_cost / n_seeds}});
    }

    json j;
    j["target_gap_fraction"] = target;
    j["t_max"] = t_max;
    j["seeds"] = n_seeds;
    j["fixed_m"] = cfg.federation.fixed_m;
    j["algorithms"] = means;
    const double conn_cost = means[0]["mean_cost"].get<double>();
    for (std::size_t i = 1; i < means.size(); ++i) {
        const double base = means[i]["mean_cost"].get<double>();
        j["cost_saving_vs_" + means[i]["algorithm"].get<std::string>()] =
            base > 0.0 ? (base - conn_cost) / base : 0.0;
    }

    const auto out = resolve_out(c, cfg);
    emit(out / "compare.csv", csv.str());
    emit(out / "compare.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const Common& c) {
    auto cfg = load_config(c);
    const auto task = build_task(cfg);
    const cafl::Vec x0 = resolve_x0(cfg, *task);

    std::ostringstream csv;
    csv << "phi_max,t1,m_first,mean_m,final_gap,total_cost\n";
    json rows = json::array();
    for (const double phi : cfg.sweep_grid) {
        auto fed = cfg.federation;
        fed.algorithm = cafl::Algorithm::connectivity_aware;
        fed.phi_max = phi;
        fed.x0 = x0;
        const auto res = cafl::run_federation(*task, cfg.topology, fed, cfg.seed,
                                              c.threads);
        double mean_m = 0.0;
        for (const auto& r : res.rounds) mean_m += r.m_requested;
        if (!res.rounds.empty()) mean_m /= static_cast<double>(res.rounds.size());
        const double final_gap = res.rounds.empty() ? res.initial_gap
                                                    : res.rounds.back().gap;
        csv << cafl::format_double(phi) << ',' << res.t1 << ','
            << (res.rounds.empty() ? 0 : res.rounds.front().m_requested) << ','
            << cafl::format_double(mean_m) << ',' << cafl::format_double(final_gap)
            << ',' << cafl::format_double(res.total_cost) << '\n';
        rows.push_back(json{{"phi_max", phi},
                            {"t1", res.t1},
                            {"mean_m", mean_m},
                            {"final_gap", final_gap},
                            {"total_cost", res.total_cost}});
    }

    const auto out = resolve_out(c, cfg);
    emit(out / "sweep.csv", csv.str());
    std::cout << json{{"rows", rows}}.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Connectivity-aware federated learning over clustered D2D networks"};
    app.require_subcommand(1);

    Common c_gen, c_analyze, c_run, c_compare, c_sweep;
    long gen_rounds = 1;
    std::vector<std::string> edge_files;
    long analyze_round = 0;
    int tightness_graphs = 0;
    std::string run_algorithm;
    long run_t_max = 0;
    double run_target = -1.0;
    int compare_seeds = 0;
    long compare_t_max = 120000;
    double compare_target = 0.0;

    auto* gen = app.add_subcommand("gen", "write per-round cluster edge lists");
    add_common(gen, c_gen);
    gen->add_option("--rounds", gen_rounds, "rounds to generate")->check(CLI::PositiveNumber);

    auto* analyze = app.add_subcommand(
        "analyze", "spectral report for generated or supplied cluster graphs");
    add_common(analyze, c_analyze);
    analyze->add_option("--edges", edge_files, "edge-list files to analyze instead");
    analyze->add_option("--round", analyze_round, "round index to generate and analyze");
    analyze->add_option("--tightness", tightness_graphs,
                        "sample this many graphs and report bound tightness");

    auto* run = app.add_subcommand("run", "simulate one algorithm and write the round trace");
    add_common(run, c_run);
    run->add_option("--algorithm", run_algorithm,
                    "override [federation] algorithm: conn_aware|fedavg|d2d_fixed_m");
    run->add_option("--t-max", run_t_max, "override round budget");
    run->add_option("--target", run_target,
                    "stop at gap <= target * initial gap (overrides config)");

    auto* compare = app.add_subcommand(
        "compare", "cost-to-target across all three algorithms over shared seeds");
    add_common(compare, c_compare);
    compare->add_option("--seeds", compare_seeds, "number of seeds (default from config)");
    compare->add_option("--t-max", compare_t_max, "round cap per run");
    compare->add_option("--target", compare_target,
                        "gap fraction defining the target (default 1e-3)");

    auto* sweep = app.add_subcommand("sweep",
                                     "run the adaptive algorithm across sweep_phi_max");
    add_common(sweep, c_sweep);

    try {
        app.parse(argc, argv);
        for (auto [cmd, common] : {std::pair{gen, &c_gen}, {analyze, &c_analyze},
                                   {run, &c_run}, {compare, &c_compare},
                                   {sweep, &c_sweep}}) {
            common->seed_given = cmd->count("--seed") > 0;
        }
        if (gen->parsed()) return cmd_gen(c_gen, gen_rounds);
        if (analyze->parsed())
            return cmd_analyze(c_analyze, edge_files, analyze_round, tightness_graphs);
        if (run->parsed()) return cmd_run(c_run, run_algorithm, run_t_max, run_target);
        if (compare->parsed())
            return cmd_compare(c_compare, compare_seeds, compare_t_max, compare_target);
        if (sweep->parsed()) return cmd_sweep(c_sweep);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const cafl::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cafl::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const cafl::InvariantViolation& e) {
        std::cerr << "internal invariant violated: " << e.what() << "\n";
        return 3;
    }
}
