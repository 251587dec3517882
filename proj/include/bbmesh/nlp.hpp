#pragma once

#include "bbmesh/hyperdual.hpp"
#include "bbmesh/ocp.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bbmesh {

/**
 * Smooth NLP  min f(x)  s.t.  x_L <= x <= x_U,  g_L <= g(x) <= g_U.
 *
 * Equalities are rows with g_L == g_U; fixed variables have x_L == x_U.
 * Multiplier convention: the Lagrangian is f + lambda^T g - z_L^T (x - x_L)
 * + z_U^T (x - x_U), so at a KKT point grad f + J^T lambda - z_L + z_U = 0 with
 * z_L, z_U >= 0. A row active at its upper bound has lambda >= 0.
 */
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  std::vector<double> x_lower, x_upper;
  std::vector<double> g_lower, g_upper;
  std::vector<double> x_initial;
  std::vector<std::string> variable_names;
  std::vector<std::string> constraint_names;

  std::size_t num_variables() const { return x_lower.size(); }
  std::size_t num_constraints() const { return g_lower.size(); }

  virtual double objective(std::span<const double> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> grad) const = 0;
  virtual void constraints(std::span<const double> x, std::span<double> g) const = 0;
  /// Dense m x n Jacobian.
  virtual void jacobian(std::span<const double> x, Eigen::MatrixXd& jac) const = 0;
  /// Dense symmetric Hessian of objective_factor * f + lambda^T g.
  virtual void hessian(std::span<const double> x, double objective_factor, std::span<const double> lambda,
                       Eigen::MatrixXd& hess) const = 0;
};

/// NLP defined by generic hyper-dual callables; derivatives come from full (i, j) probing.
class DenseNlp : public NlpProblem {
 public:
  using Objective = std::function<HyperDual(std::span<const HyperDual>)>;
  using Constraints = std::function<std::vector<HyperDual>(std::span<const HyperDual>)>;

  DenseNlp(Objective objective, Constraints constraints);

  double objective(std::span<const double> x) const override;
  void gradient(std::span<const double> x, std::span<double> grad) const override;
  void constraints(std::span<const double> x, std::span<double> g) const override;
  void jacobian(std::span<const double> x, Eigen::MatrixXd& jac) const override;
  void hessian(std::span<const double> x, double objective_factor, std::span<const double> lambda,
               Eigen::MatrixXd& hess) const override;

 private:
  Objective objective_;
  Constraints constraints_;
};

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
  double max() const;
};

struct NlpResult {
  std::vector<double> x;
  std::vector<double> multipliers;  // one per constraint row
  std::vector<double> bound_lower;  // z_L per variable
  std::vector<double> bound_upper;  // z_U per variable
  double objective = 0.0;
  NlpStatus status = NlpStatus::numerical_failure;
  KktResiduals kkt;
  std::size_t iterations = 0;
  double wall_time = 0.0;
  std::string message;
};

struct SolverOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 500;
  std::optional<std::vector<double>> initial_point;
  /// One line per iteration: iter, objective, feasibility, stationarity, mu.
  std::ostream* log = nullptr;
};

/// Primal-dual interior point with filter line search. Throws std::invalid_argument
/// on a non-positive tolerance or inconsistent dimensions; all numerical outcomes
/// are reported through NlpResult::status.
NlpResult solve(const NlpProblem& nlp, const SolverOptions& options = {});

/// Residuals of a candidate primal-dual point in the pinned multiplier convention.
KktResiduals kkt_residuals(const NlpProblem& nlp, std::span<const double> x, std::span<const double> lambda,
                           std::span<const double> z_lower, std::span<const double> z_upper);

}  // namespace bbmesh
