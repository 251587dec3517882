#pragma once

#include "bbmesh/bangbang.hpp"
#include "bbmesh/nlp.hpp"
#include "bbmesh/ocp.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bbmesh {

/// Relative error of every mesh interval, indexed [domain][interval].
using MeshErrors = std::vector<std::vector<double>>;

/**
 * Per interval: resample state and control on an LGR rule with one more
 * point, integrate the dynamics from the interval start with the rule's
 * integration matrix, and compare against the interpolated state. Differences
 * are scaled by 1 + max |y_k| over the whole trajectory.
 */
MeshErrors error_estimate(const CollocatedSolution& solution, const BolzaProblem& problem);
double max_error(const MeshErrors& errors);

/// Decay rate of the Legendre coefficients of the state interpolant in each
/// interval (slowest component, in decades per degree).
std::vector<double> legendre_decay(const DomainSolution& domain);

inline constexpr double kFastDecay = 0.5;

/// Raises N_k in failing intervals whose interpolant decays fast and splits
/// the others (or those already at the point cap) into two halves with N_k = 3.
MeshLayout standard_refine(const MeshLayout& mesh, std::span<const double> errors, std::span<const double> decay,
                           double tolerance);

struct DriveConfig {
  std::size_t initial_intervals = 10;
  std::size_t initial_points = 5;
  std::size_t sub_intervals = 2;
  std::size_t sub_points = 5;
  double mesh_tolerance = 1e-6;
  std::size_t max_mesh_iterations = 10;
  bool bang_bang = true;
  double nlp_tolerance = 1e-9;
  std::size_t nlp_max_iterations = 500;
};

struct MeshRecord {
  std::size_t iteration = 0;
  std::size_t domains = 1;
  std::size_t intervals = 0;
  std::size_t points = 0;
  double objective = 0.0;
  double error = 0.0;
  double wall_time = 0.0;
  NlpStatus status = NlpStatus::numerical_failure;
  std::size_t nlp_iterations = 0;
  std::string note;
};

enum class DriveStatus { converged, tolerance_not_met, solver_failure };
std::string to_string(DriveStatus s);

struct DriveResult {
  DriveStatus status = DriveStatus::solver_failure;
  CollocatedSolution solution;
  MultiDomainProblem problem;
  MeshErrors errors;
  std::vector<MeshRecord> history;

  // Bang-bang analysis of the first mesh, when it ran.
  std::optional<LinearityReport> linearity;
  std::optional<SwitchingProfile> profile;
  std::vector<DiscontinuityEstimate> estimates;
  CollocatedSolution initial_solution;
  std::string message;
};

DriveResult drive(const BolzaProblem& problem, const DriveConfig& config);

}  // namespace bbmesh
