#include "cafl/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cafl/errors.hpp"

namespace cafl {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& src, int line, const std::string& msg) {
    throw ConfigError(src, line, msg);
}

double parse_double(const std::string& src, int line, const std::string& key,
                    const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        fail(src, line, "key '" + key + "' expects a number, got '" + v + "'");
    return x;
}

long long parse_ll(const std::string& src, int line, const std::string& key,
                   const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE)
        fail(src, line, "key '" + key + "' expects an integer, got '" + v + "'");
    return x;
}

int parse_int(const std::string& src, int line, const std::string& key,
              const std::string& v) {
    const long long x = parse_ll(src, line, key, v);
    if (x < -2147483647LL || x > 2147483647LL)
        fail(src, line, "key '" + key + "' is out of int range: " + v);
    return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& src, int line, const std::string& key,
                        const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE || v.find('-') != std::string::npos)
        fail(src, line, "key '" + key + "' expects a nonnegative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

bool parse_bool(const std::string& src, int line, const std::string& key,
                const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(src, line, "key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : v) {
        if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::connectivity_aware: return "conn_aware";
        case Algorithm::fedavg: return "fedavg";
        case Algorithm::d2d_fixed_m: return "d2d_fixed_m";
    }
    return "?";
}

std::string to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::inverse_time: return "inverse_time";
        case ScheduleKind::geometric: return "geometric";
        case ScheduleKind::constant: return "constant";
    }
    return "?";
}

std::string to_string(SamplingMode m) {
    return m == SamplingMode::ceiling ? "ceiling" : "apportioned";
}

std::string to_string(BoundForm f) {
    switch (f) {
        case BoundForm::balanced: return "balanced";
        case BoundForm::general: return "general";
        case BoundForm::best: return "best";
    }
    return "?";
}

std::string to_string(ExperimentConfig::StartMode m) {
    switch (m) {
        case ExperimentConfig::StartMode::origin: return "origin";
        case ExperimentConfig::StartMode::warm: return "warm";
        case ExperimentConfig::StartMode::offset: return "offset";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    topology.validate();
    // Federation x0 is resolved against the objective later; validate with the
    // configured dimension so shape errors surface at parse time.
    federation.validate(topology.n, objective.dim);
    if (objective.dim <= 0)
        throw ConfigError("config", 0, "objective dim must be positive");
    if (!(objective.mu > 0.0) || !(objective.beta >= objective.mu))
        throw ConfigError("config", 0, "objective needs 0 < mu <= beta");
    if (objective.rho < 0.0)
        throw ConfigError("config", 0, "objective rho must be nonnegative");
    if (objective.spread < 0.0)
        throw ConfigError("config", 0, "objective spread must be nonnegative");
    if (objective.kind == ObjectiveParams::Kind::logistic) {
        if (objective.samples_per_client <= 0)
            throw ConfigError("config", 0, "samples_per_client must be positive");
        if (objective.classes < 2)
            throw ConfigError("config", 0, "classes must be at least 2");
        if (!(objective.l2 > 0.0))
            throw ConfigError("config", 0, "l2 must be positive");
    }
    if (compare_seeds <= 0)
        throw ConfigError("config", 0, "compare_seeds must be positive");
    if (sweep_grid.empty())
        throw ConfigError("config", 0, "sweep_phi_max must list at least one value");
    for (double v : sweep_grid)
        if (v < 0.0)
            throw ConfigError("config", 0, "sweep_phi_max values must be nonnegative");
    if (start_value < 0.0)
        throw ConfigError("config", 0, "start_value must be nonnegative");
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& source_name) {
    ExperimentConfig cfg;
    bool cluster_sizes_given = false;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                fail(source_name, line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "topology" && section != "federation" &&
                section != "objective" && section != "output")
                fail(source_name, line_no, "unknown section [" + section + "]");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(source_name, line_no, "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail(source_name, line_no, "empty key");
        if (val.empty()) fail(source_name, line_no, "key '" + key + "' has no value");
        if (section.empty())
            fail(source_name, line_no, "key '" + key + "' appears before any section");

        if (section == "topology") {
            if (key == "n") cfg.topology.n = parse_int(source_name, line_no, key, val);
            else if (key == "clusters") cfg.topology.c = parse_int(source_name, line_no, key, val);
            else if (key == "cluster_sizes") {
                cfg.topology.cluster_sizes.clear();
                for (const auto& tok : split_list(val))
                    cfg.topology.cluster_sizes.push_back(
                        parse_int(source_name, line_no, key, tok));
                cluster_sizes_given = true;
            } else if (key == "k_min") cfg.topology.k_min = parse_int(source_name, line_no, key, val);
            else if (key == "k_max") cfg.topology.k_max = parse_int(source_name, line_no, key, val);
            else if (key == "p_fail") cfg.topology.p_fail = parse_double(source_name, line_no, key, val);
            else if (key == "balanced_mode") cfg.topology.balanced_mode = parse_bool(source_name, line_no, key, val);
            else fail(source_name, line_no, "unknown key '" + key + "' in [topology]");
        } else if (section == "federation") {
            auto& fed = cfg.federation;
            if (key == "algorithm") {
                if (val == "conn_aware") fed.algorithm = Algorithm::connectivity_aware;
                else if (val == "fedavg") fed.algorithm = Algorithm::fedavg;
                else if (val == "d2d_fixed_m") fed.algorithm = Algorithm::d2d_fixed_m;
                else fail(source_name, line_no,
                          "algorithm must be conn_aware, fedavg, or d2d_fixed_m");
            } else if (key == "t_local") fed.t_local = parse_int(source_name, line_no, key, val);
            else if (key == "t_max") fed.t_max = parse_int(source_name, line_no, key, val);
            else if (key == "phi_max") fed.phi_max = parse_double(source_name, line_no, key, val);
            else if (key == "m0") fed.m0 = parse_int(source_name, line_no, key, val);
            else if (key == "fixed_m") fed.fixed_m = parse_int(source_name, line_no, key, val);
            else if (key == "lr_schedule") {
                if (val == "inverse_time") fed.schedule = ScheduleKind::inverse_time;
                else if (val == "geometric") fed.schedule = ScheduleKind::geometric;
                else if (val == "constant") fed.schedule = ScheduleKind::constant;
                else fail(source_name, line_no,
                          "lr_schedule must be inverse_time, geometric, or constant");
            } else if (key == "lr_a") fed.lr_a = parse_double(source_name, line_no, key, val);
            else if (key == "lr_r") fed.lr_r = parse_double(source_name, line_no, key, val);
            else if (key == "bound") {
                if (val == "balanced") fed.bound_policy.form = BoundForm::balanced;
                else if (val == "general") fed.bound_policy.form = BoundForm::general;
                else if (val == "best") fed.bound_policy.form = BoundForm::best;
                else fail(source_name, line_no, "bound must be balanced, general, or best");
            } else if (key == "tighten_bounds") {
                fed.bound_policy.tighten_by_one = parse_bool(source_name, line_no, key, val);
            } else if (key == "sampling") {
                if (val == "ceiling") fed.sampling = SamplingMode::ceiling;
                else if (val == "apportioned") fed.sampling = SamplingMode::apportioned;
                else fail(source_name, line_no, "sampling must be ceiling or apportioned");
            } else if (key == "energy_ratio") fed.energy_ratio = parse_double(source_name, line_no, key, val);
            else if (key == "target_gap") fed.target_gap_fraction = parse_double(source_name, line_no, key, val);
            else if (key == "start") {
                if (val == "origin") cfg.start_mode = ExperimentConfig::StartMode::origin;
                else if (val == "warm") cfg.start_mode = ExperimentConfig::StartMode::warm;
                else if (val == "offset") cfg.start_mode = ExperimentConfig::StartMode::offset;
                else fail(source_name, line_no, "start must be origin, warm, or offset");
            } else if (key == "start_value") cfg.start_value = parse_double(source_name, line_no, key, val);
            else if (key == "compare_seeds") cfg.compare_seeds = parse_int(source_name, line_no, key, val);
            else if (key == "sweep_phi_max") {
                cfg.sweep_grid.clear();
                for (const auto& tok : split_list(val))
                    cfg.sweep_grid.push_back(parse_double(source_name, line_no, key, tok));
            } else fail(source_name, line_no, "unknown key '" + key + "' in [federation]");
        } else if (section == "objective") {
            auto& obj = cfg.objective;
            if (key == "kind") {
                if (val == "quadratic") obj.kind = ObjectiveParams::Kind::quadratic;
                else if (val == "logistic") obj.kind = ObjectiveParams::Kind::logistic;
                else fail(source_name, line_no, "kind must be quadratic or logistic");
            } else if (key == "dim") obj.dim = parse_int(source_name, line_no, key, val);
            else if (key == "mu") obj.mu = parse_double(source_name, line_no, key, val);
            else if (key == "beta") obj.beta = parse_double(source_name, line_no, key, val);
            else if (key == "rho") obj.rho = parse_double(source_name, line_no, key, val);
            else if (key == "spread") obj.spread = parse_double(source_name, line_no, key, val);
            else if (key == "seed") obj.seed = parse_u64(source_name, line_no, key, val);
            else if (key == "samples_per_client") obj.samples_per_client = parse_int(source_name, line_no, key, val);
            else if (key == "classes") obj.classes = parse_int(source_name, line_no, key, val);
            else if (key == "l2") obj.l2 = parse_double(source_name, line_no, key, val);
            else fail(source_name, line_no, "unknown key '" + key + "' in [objective]");
        } else {  // output
            if (key == "dir") cfg.output_dir = val;
            else if (key == "seed") cfg.seed = parse_u64(source_name, line_no, key, val);
            else fail(source_name, line_no, "unknown key '" + key + "' in [output]");
        }
    }

    if (!cluster_sizes_given) {
        if (cfg.topology.c < 1 || cfg.topology.n % cfg.topology.c != 0)
            throw ConfigError(source_name, 0,
                              "n must be divisible by clusters when cluster_sizes is omitted");
        cfg.topology.cluster_sizes.assign(cfg.topology.c, cfg.topology.n / cfg.topology.c);
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        // Re-anchor whole-document errors to the source file.
        throw ConfigError(source_name, e.line(), e.detail());
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace cafl
