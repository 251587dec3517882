#pragma once

// Small problems with known solutions shared by the unit tests and the
// acceptance runner.

#include "bbmesh/ocp.hpp"

#include <cmath>
#include <type_traits>
#include <vector>

namespace bbmesh::testing {

/// y1' = y2, y2' = u, min 1/2 int u^2 on [0, 1], y(0) = (0, 0), y(1) = (1, 0).
/// Optimum u = 6 - 12 t, J = 6, costates lambda1 = -12, lambda2 = 12 t - 6.
inline BolzaProblem double_integrator() {
  BolzaProblem p;
  p.name = "double-integrator";
  p.n_y = 2;
  p.n_u = 1;
  p.dynamics = DynamicsFn([](auto y, auto u, const auto&) {
    using T = std::remove_cv_t<typename decltype(y)::element_type>;
    return std::vector<T>{y[1], u[0]};
  });
  p.lagrangian = LagrangianFn([](auto, auto u, const auto&) { return 0.5 * u[0] * u[0]; });
  p.control_bounds = Box::unbounded(1);
  p.initial_state_bounds = Box::fixed({0.0, 0.0});
  p.final_state_bounds = Box::fixed({1.0, 0.0});
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {1.0, 1.0};
  p.guess = {0.0, 1.0, {0.0, 0.0}, {1.0, 0.0}, {}};
  return p;
}

/// y' = y + 0 u on [0, 1] from y(0) = 1; the only feasible state is e^t.
inline BolzaProblem exponential_growth() {
  BolzaProblem p;
  p.name = "exponential";
  p.n_y = 1;
  p.n_u = 1;
  p.dynamics = DynamicsFn([](auto y, auto u, const auto&) {
    using T = std::remove_cv_t<typename decltype(y)::element_type>;
    return std::vector<T>{y[0] + 0.0 * u[0]};
  });
  p.lagrangian = LagrangianFn([](auto, auto u, const auto&) { return u[0] * u[0]; });
  p.control_bounds = {{-1.0}, {1.0}};
  p.initial_state_bounds = Box::fixed({1.0});
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {1.0, 1.0};
  p.guess = {0.0, 1.0, {1.0}, {std::exp(1.0)}, {}};
  return p;
}

}  // namespace bbmesh::testing
