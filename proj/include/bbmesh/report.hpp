#pragma once

#include "bbmesh/benchmarks.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace bbmesh {

/// Plain-text table with rows M, N_f and T (seconds) and one column per run.
/// Throws std::invalid_argument on an empty list.
std::string report_table(const std::vector<RunReport>& reports);

/// Column names of the trajectory file: t, states, controls, costates
/// (lambda1..), switching functions (sigma1.., one per control) and any named
/// path-constraint outputs.
std::vector<std::string> trajectory_columns(const BolzaProblem& problem);

/// One row per discretization point of the final solution. A report without a
/// solution produces the header only. Costate and sigma columns are NaN when
/// the solve returned no multipliers.
void export_trajectory(const RunReport& report, const std::filesystem::path& path);

/// key=value run summary (status, M, N_f, objective, times, switches).
void export_metadata(const RunReport& report, const std::filesystem::path& path);

/// Per-mesh-iteration history as CSV.
void export_history(const RunReport& report, const std::filesystem::path& path);

}  // namespace bbmesh
