#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace bbmesh {

/**
 * Legendre-Gauss-Radau rule on [-1, +1).
 *
 * The N collocation nodes are the roots of P_{N-1} + P_N and include -1. The
 * point +1 is appended as a non-collocated support point, so the state
 * polynomial in an interval is interpolated through `support()` (N + 1 points)
 * while the dynamics are collocated at `nodes` only.
 */
struct QuadratureRule {
  std::size_t order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  // Barycentric weights over the N + 1 support points.
  std::vector<double> barycentric;

  static constexpr double support_node = 1.0;

  std::vector<double> support() const;
};

/// N x (N + 1) matrix of Lagrange basis derivatives at the collocation nodes.
using DifferentiationMatrix = Eigen::MatrixXd;

/// Partition of [-1, +1] into mesh intervals with a point count per interval.
struct MeshLayout {
  std::vector<double> boundaries;
  std::vector<std::size_t> points_per_interval;

  static constexpr std::size_t min_points = 3;
  static constexpr std::size_t max_points = 10;

  static MeshLayout uniform(std::size_t intervals, std::size_t points);

  std::size_t intervals() const { return points_per_interval.size(); }
  std::size_t total_points() const;
  /// Index of the first collocation point of interval k within the domain.
  std::size_t offset(std::size_t k) const;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Throws std::invalid_argument unless 1 <= N <= 64.
QuadratureRule lgr_rule(std::size_t n);

/// Process-wide cache of rules; safe to call from multiple threads.
std::shared_ptr<const QuadratureRule> cached_lgr_rule(std::size_t n);

DifferentiationMatrix diff_matrix(const QuadratureRule& rule);

/// Integration matrix I with Y_{2..N+1} = Y_1 + I * F for samples F of the
/// derivative at the collocation nodes (inverse of D without its first column).
Eigen::MatrixXd integration_matrix(const QuadratureRule& rule);

/// Barycentric evaluation of the polynomial through the rule's support points.
double interpolate(std::span<const double> support_values, const QuadratureRule& rule, double query);

/// Barycentric interpolation through arbitrary distinct nodes.
double barycentric_interpolate(std::span<const double> nodes, std::span<const double> bary_weights,
                               std::span<const double> values, double query);
std::vector<double> barycentric_weights(std::span<const double> nodes);

double legendre(std::size_t n, double x);

/// tau in [-1, 1] to t in [t_start, t_end].
double affine_to_time(double tau, double t_start, double t_end);
double affine_to_tau(double t, double t_start, double t_end);

}  // namespace bbmesh
