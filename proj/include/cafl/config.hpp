#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cafl/federation.hpp"
#include "cafl/topology.hpp"

namespace cafl {

struct ObjectiveParams {
    enum class Kind { quadratic, logistic };
    Kind kind = Kind::quadratic;
    int dim = 10;
    double mu = 1.0;
    double beta = 4.0;
    double rho = 0.5;
    double spread = 6.0;
    std::uint64_t seed = 101;  // problem instance; run seed varies separately
    // logistic only
    int samples_per_client = 40;
    int classes = 10;
    double l2 = 0.1;
};

/// Full experiment description parsed from one INI-style document with
/// sections [topology], [federation], [objective], [output].
struct ExperimentConfig {
    enum class StartMode {
        origin,  // x0 = 0
        warm,    // x0 = x* + value * 1/sqrt(p) in every coordinate
        offset,  // x0 = value * 1/sqrt(p) in every coordinate
    };

    TopologyConfig topology;
    FederationConfig federation;  // x0 stays empty until resolve time
    ObjectiveParams objective;
    StartMode start_mode = StartMode::warm;
    double start_value = 0.05;
    int compare_seeds = 3;
    std::vector<double> sweep_grid = {0.0, 0.06, 0.2, 1e9};
    std::string output_dir;  // empty = unset; resolution order is CLI flag,
                             // this field, $CAFL_OUTPUT_ROOT, then "out"
    std::uint64_t seed = 12345;

    void validate() const;  // throws ConfigError
};

/// Parses and validates; unknown sections or keys are errors with 1-based
/// line numbers. `source_name` labels messages.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name);

ExperimentConfig parse_config_file(const std::string& path);

/// Token maps used by the parser and the summary echo.
std::string to_string(Algorithm a);
std::string to_string(ScheduleKind k);
std::string to_string(SamplingMode m);
std::string to_string(BoundForm f);
std::string to_string(ExperimentConfig::StartMode m);

}  // namespace cafl
