#pragma once

#include "bbmesh/hyperdual.hpp"
#include "bbmesh/lgr.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace bbmesh {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

template <typename T>
using PointVectorSig = std::vector<T>(std::span<const T> y, std::span<const T> u, const T& t);
template <typename T>
using PointScalarSig = T(std::span<const T> y, std::span<const T> u, const T& t);
template <typename T>
using EndpointVectorSig = std::vector<T>(std::span<const T> y0, const T& t0, std::span<const T> yf, const T& tf);
template <typename T>
using EndpointScalarSig = T(std::span<const T> y0, const T& t0, std::span<const T> yf, const T& tf);

/**
 * A callable written once against a generic scalar and instantiated for both
 * double and HyperDual. Construct it from a generic lambda:
 *
 *   GenericFn<PointVectorSig> f([](auto y, auto u, const auto& t) { ... });
 */
template <template <typename> class Sig>
class GenericFn {
 public:
  GenericFn() = default;
  template <typename F>
  GenericFn(F f) : real_(f), dual_(f) {}  // NOLINT: implicit from lambdas

  explicit operator bool() const { return static_cast<bool>(real_); }

  template <typename... Args>
  auto operator()(Args&&... args) const {
    if constexpr ((is_dual_arg<std::decay_t<Args>>() || ...))
      return dual_(std::forward<Args>(args)...);
    else
      return real_(std::forward<Args>(args)...);
  }

  const std::function<Sig<double>>& real() const { return real_; }
  const std::function<Sig<HyperDual>>& dual() const { return dual_; }

 private:
  template <typename A>
  static constexpr bool is_dual_arg() {
    if constexpr (std::is_same_v<A, HyperDual>)
      return true;
    else if constexpr (requires { typename A::value_type; })
      return std::is_same_v<std::remove_cv_t<typename A::value_type>, HyperDual>;
    else
      return false;
  }

  std::function<Sig<double>> real_;
  std::function<Sig<HyperDual>> dual_;
};

using DynamicsFn = GenericFn<PointVectorSig>;
using PathFn = GenericFn<PointVectorSig>;
using LagrangianFn = GenericFn<PointScalarSig>;
using MayerFn = GenericFn<EndpointScalarSig>;
using BoundaryFn = GenericFn<EndpointVectorSig>;

/// Component-wise box; infinite entries mean unbounded.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box unbounded(std::size_t n) { return {std::vector<double>(n, -kInfinity), std::vector<double>(n, kInfinity)}; }
  static Box fixed(std::vector<double> values) { return {values, values}; }
  std::size_t size() const { return lower.size(); }
};

struct Range {
  double lower = 0.0;
  double upper = 0.0;
  bool fixed() const { return lower == upper; }
};

/// Straight-line first-mesh guess between two endpoint state vectors.
struct ProblemGuess {
  double t0 = 0.0;
  double tf = 1.0;
  std::vector<double> initial_state;
  std::vector<double> final_state;
  /// Constant control guess; empty means midpoint of the control box (0 if unbounded).
  std::vector<double> control;
};

/**
 * Single-phase Bolza problem:
 *   min M(y0, t0, yf, tf) + int L(y, u, t) dt
 *   s.t. y' = a(y, u, t), c_min <= c(y, u, t) <= c_max, b_min <= b(y0, t0, yf, tf) <= b_max.
 *
 * Endpoint state boxes let boundary values be imposed exactly as variable
 * bounds; `boundary` covers everything else.
 */
struct BolzaProblem {
  std::string name;
  std::size_t n_y = 0;
  std::size_t n_u = 0;
  std::size_t n_c = 0;
  std::size_t n_b = 0;

  MayerFn mayer;
  LagrangianFn lagrangian;
  DynamicsFn dynamics;
  PathFn path;
  BoundaryFn boundary;

  Box path_bounds;
  Box boundary_bounds;
  Box control_bounds;
  std::optional<Box> state_bounds;
  std::optional<Box> initial_state_bounds;
  std::optional<Box> final_state_bounds;
  Range t0_bounds;
  Range tf_bounds;

  ProblemGuess guess;

  /// Optional column labels for reports; defaults are y1.., c1...
  std::vector<std::string> state_names;
  std::vector<std::string> path_names;
};

/// A finding from `validate`; `subject` names the offending callable or bound set.
struct Finding {
  std::string subject;
  std::string message;
};

std::vector<Finding> validate(const BolzaProblem& problem);

/// The guess control, or the midpoint of the control box when none is given.
std::vector<double> guess_control(const BolzaProblem& problem);

enum class ControlMode { free, at_lower, at_upper };

struct SwitchParameter {
  double guess = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/**
 * The horizon split into Q = switches.size() + 1 domains whose interior
 * boundaries are decision variables. `control_modes[d][i]` pins component i
 * to a box limit in domain d or leaves it free.
 */
struct MultiDomainProblem {
  BolzaProblem base;
  std::vector<SwitchParameter> switches;
  std::vector<std::vector<ControlMode>> control_modes;

  std::size_t domains() const { return switches.size() + 1; }
  /// Effective control box in domain d after pinning.
  Box control_box(std::size_t d) const;
  /// Throws std::invalid_argument on malformed domains or overlapping switch boxes.
  void validate() const;
};

MultiDomainProblem as_single_domain(const BolzaProblem& problem);

/// Per-domain discretized trajectory.
struct DomainSolution {
  MeshLayout mesh;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> times;  // N + 1 discretization points
  std::vector<double> taus;   // domain-level tau of each point
  Eigen::MatrixXd states;     // (N + 1) x n_y
  Eigen::MatrixXd controls;   // N x n_u
  Eigen::MatrixXd costates;   // (N + 1) x n_y; empty if multipliers were unavailable
  Eigen::MatrixXd defect_multipliers;  // N x n_y, raw NLP multipliers
};

enum class NlpStatus { converged, max_iterations, infeasible, numerical_failure };

std::string to_string(NlpStatus status);

struct CollocatedSolution {
  std::vector<DomainSolution> domains;
  double t0 = 0.0;
  double tf = 0.0;
  std::vector<double> switch_times;
  double objective = 0.0;
  NlpStatus status = NlpStatus::numerical_failure;
  bool has_costates = false;

  std::size_t total_points() const;
  std::vector<MeshLayout> meshes() const;
  /// Index of the domain containing t (ties go to the later domain except at tf).
  std::size_t domain_of(double t) const;
  /// Lagrange interpolation of the state inside the mesh interval containing t.
  std::vector<double> state_at(double t) const;
  /// Piecewise-linear interpolation between collocation points, held constant
  /// past the last collocation point of a domain.
  std::vector<double> control_at(double t) const;
};

/// H = L + lambda . a at a single point.
template <typename T>
T hamiltonian(const BolzaProblem& problem, std::span<const T> y, std::span<const T> lambda, std::span<const T> u,
              const T& t) {
  T h = problem.lagrangian ? problem.lagrangian(y, u, t) : T(0.0);
  const std::vector<T> a = problem.dynamics(y, u, t);
  for (std::size_t k = 0; k < a.size(); ++k) h += lambda[k] * a[k];
  return h;
}

}  // namespace bbmesh
