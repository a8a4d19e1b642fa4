#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "cafl/config.hpp"
#include "cafl/errors.hpp"
#include "cafl/ioutil.hpp"

using namespace cafl;

namespace {

ExperimentConfig parse(const std::string& text) {
    return parse_config_text(text, "test.ini");
}

int error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        CHECK(e.source() == "test.ini");
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("empty document yields the reference scenario") {
    const auto cfg = parse("");
    CHECK(cfg.topology.n == 70);
    CHECK(cfg.topology.c == 7);
    CHECK(cfg.topology.cluster_sizes == std::vector<int>(7, 10));
    CHECK(cfg.topology.k_min == 6);
    CHECK(cfg.topology.k_max == 9);
    CHECK(cfg.topology.p_fail == 0.1);
    CHECK_FALSE(cfg.topology.balanced_mode);
    CHECK(cfg.federation.algorithm == Algorithm::connectivity_aware);
    CHECK(cfg.federation.t_local == 5);
    CHECK(cfg.federation.t_max == 200);
    CHECK(cfg.federation.phi_max == 0.06);
    CHECK(cfg.federation.m0 == 0);
    CHECK(cfg.federation.fixed_m == 57);
    CHECK(cfg.federation.schedule == ScheduleKind::inverse_time);
    CHECK(cfg.federation.bound_policy.form == BoundForm::best);
    CHECK_FALSE(cfg.federation.bound_policy.tighten_by_one);
    CHECK(cfg.federation.sampling == SamplingMode::ceiling);
    CHECK(cfg.federation.energy_ratio == 0.1);
    CHECK(cfg.objective.kind == ObjectiveParams::Kind::quadratic);
    CHECK(cfg.objective.dim == 10);
    CHECK(cfg.objective.mu == 1.0);
    CHECK(cfg.objective.beta == 4.0);
    CHECK(cfg.objective.rho == 0.5);
    CHECK(cfg.objective.spread == 6.0);
    CHECK(cfg.objective.seed == 101);
    CHECK(cfg.start_mode == ExperimentConfig::StartMode::warm);
    CHECK(cfg.start_value == 0.05);
    CHECK(cfg.compare_seeds == 3);
    CHECK(cfg.seed == 12345);
    CHECK(cfg.output_dir.empty());
}

TEST_CASE("every key is settable and typed") {
    const auto cfg = parse(
        "[topology]\n"
        "n = 24\n"
        "clusters = 3\n"
        "cluster_sizes = 10, 8, 6\n"
        "k_min = 3\n"
        "k_max = 5\n"
        "p_fail = 0.25   # trailing comment\n"
        "balanced_mode = true\n"
        "[federation]\n"
        "algorithm = d2d_fixed_m\n"
        "t_local = 2\n"
        "t_max = 50\n"
        "phi_max = 0.5\n"
        "m0 = 10\n"
        "fixed_m = 12\n"
        "lr_schedule = geometric\n"
        "lr_a = 0.01\n"
        "lr_r = 0.9\n"
        "bound = general\n"
        "tighten_bounds = yes\n"
        "sampling = apportioned\n"
        "energy_ratio = 0.2\n"
        "target_gap = 0.001\n"
        "start = offset\n"
        "start_value = 1.5\n"
        "compare_seeds = 5\n"
        "sweep_phi_max = 0.0 0.1 0.2\n"
        "[objective]\n"
        "kind = quadratic\n"
        "dim = 6\n"
        "mu = 0.5\n"
        "beta = 2.0\n"
        "rho = 0.0\n"
        "spread = 4.0\n"
        "seed = 777\n"
        "[output]\n"
        "dir = results/run1\n"
        "seed = 42\n");
    CHECK(cfg.topology.n == 24);
    CHECK(cfg.topology.cluster_sizes == std::vector<int>{10, 8, 6});
    CHECK(cfg.topology.balanced_mode);
    CHECK(cfg.topology.p_fail == 0.25);
    CHECK(cfg.federation.algorithm == Algorithm::d2d_fixed_m);
    CHECK(cfg.federation.m0 == 10);
    CHECK(cfg.federation.fixed_m == 12);
    CHECK(cfg.federation.schedule == ScheduleKind::geometric);
    CHECK(cfg.federation.lr_a == 0.01);
    CHECK(cfg.federation.lr_r == 0.9);
    CHECK(cfg.federation.bound_policy.form == BoundForm::general);
    CHECK(cfg.federation.bound_policy.tighten_by_one);
    CHECK(cfg.federation.sampling == SamplingMode::apportioned);
    CHECK(cfg.federation.target_gap_fraction == 0.001);
    CHECK(cfg.start_mode == ExperimentConfig::StartMode::offset);
    CHECK(cfg.start_value == 1.5);
    CHECK(cfg.compare_seeds == 5);
    CHECK(cfg.sweep_grid == std::vector<double>{0.0, 0.1, 0.2});
    CHECK(cfg.objective.mu == 0.5);
    CHECK(cfg.objective.seed == 777);
    CHECK(cfg.output_dir == "results/run1");
    CHECK(cfg.seed == 42);
}

TEST_CASE("errors carry the offending line number") {
    CHECK(error_line("[topology]\nbogus = 1\n") == 2);
    CHECK(error_line("[nope]\n") == 1);
    CHECK(error_line("n = 70\n") == 1);  // key before any section
    CHECK(error_line("[topology]\nn seventy\n") == 2);
    CHECK(error_line("[topology]\nn = seventy\n") == 2);
    CHECK(error_line("[topology]\nn =\n") == 2);
    CHECK(error_line("[topology\n") == 1);
    CHECK(error_line("[federation]\nalgorithm = gossip\n") == 2);
    CHECK(error_line("[output]\nseed = -4\n") == 2);
    // Whole-document validation anchors to the file with no line.
    CHECK(error_line("[federation]\nsweep_phi_max = 0.1, -0.2\n") == 0);
}

TEST_CASE("cross-field validation happens at parse time") {
    // Sizes must sum to n.
    CHECK_THROWS_AS(parse("[topology]\nn = 20\nclusters = 2\ncluster_sizes = 10, 11\n"),
                    ConfigError);
    // Equal split must divide evenly when sizes are omitted.
    CHECK_THROWS_AS(parse("[topology]\nn = 20\nclusters = 3\n"), ConfigError);
    // Mixing-degree range must fit the smallest cluster.
    CHECK_THROWS_AS(parse("[topology]\nn = 12\nclusters = 2\nk_max = 6\n"), ConfigError);
    // Objective shape constraints.
    CHECK_THROWS_AS(parse("[objective]\nmu = 2\nbeta = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[objective]\ndim = 0\n"), ConfigError);
    // Federation knobs checked against n.
    CHECK_THROWS_AS(parse("[federation]\nm0 = 71\n"), ConfigError);
    CHECK_THROWS_AS(parse("[federation]\nalgorithm = fedavg\nfixed_m = 80\n"),
                    ConfigError);
}

TEST_CASE("missing files are a configuration error") {
    CHECK_THROWS_AS(parse_config_file("/nonexistent/path.ini"), ConfigError);
}

TEST_CASE("doubles print with full round-trip precision") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(82.0 / 81.0) == "1.0123456790123457");
    const double v = 0.2745229635909805;
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("atomic writes land complete and readable") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cafl_config_test";
    fs::remove_all(dir);
    const fs::path file = dir / "nested" / "payload.txt";
    write_text_file_atomic(file, "alpha\nbeta\n");
    CHECK(read_text_file(file) == "alpha\nbeta\n");
    // Overwrite goes through the same temp-and-rename path.
    write_text_file_atomic(file, "gamma\n");
    CHECK(read_text_file(file) == "gamma\n");
    CHECK_FALSE(fs::exists(file.string() + ".tmp"));
    fs::remove_all(dir);
    CHECK_THROWS_AS(read_text_file(file), ConfigError);
}

}  // TEST_SUITE
