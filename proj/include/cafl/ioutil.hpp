#pragma once

#include <filesystem>
#include <string>

#include "cafl/analysis.hpp"
#include "cafl/federation.hpp"

namespace cafl {

/// Shortest round-trip decimal form (printf %.17g, C locale), so equal doubles
/// always print as identical bytes.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never see a partial
/// file and a crashed run never leaves a truncated one.
void write_text_file_atomic(const std::filesystem::path& path,
                            const std::string& content);

/// Per-round trace with cumulative communication cost. Header:
/// t,m_requested,m_effective,gap,phi_exact,psi_bound,d2d_tx,d2s_tx,cum_cost
std::string rounds_csv(const RunResult& result, const CostModel& cost);

}  // namespace cafl
