#include "cafl/ioutil.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cafl/errors.hpp"

namespace cafl {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file_atomic(const std::filesystem::path& path,
                            const std::string& content) {
    const auto dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError(tmp, 0, "cannot open file for writing");
        out << content;
        out.flush();
        if (!out) throw ConfigError(tmp, 0, "write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ConfigError(path.string(), 0, "rename failed: " + ec.message());
}

std::string rounds_csv(const RunResult& result, const CostModel& cost) {
    std::ostringstream out;
    out << "t,m_requested,m_effective,gap,phi_exact,psi_bound,d2d_tx,d2s_tx,cum_cost\n";
    double cum = 0.0;
    for (const RoundRecord& r : result.rounds) {
        cum += cost.energy_ratio * static_cast<double>(r.d2d_tx) +
               static_cast<double>(r.d2s_tx);
        out << r.t << ',' << r.m_requested << ',' << r.m_effective << ','
            << format_double(r.gap) << ',' << format_double(r.phi_exact) << ','
            << format_double(r.psi_bound) << ',' << r.d2d_tx << ',' << r.d2s_tx
            << ',' << format_double(cum) << '\n';
    }
    return out.str();
}

}  // namespace cafl
