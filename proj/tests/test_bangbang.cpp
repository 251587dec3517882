#include "bbmesh/bangbang.hpp"
#include "bbmesh/benchmarks.hpp"
#include "bbmesh/transcription.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "problems.hpp"

using namespace bbmesh;

namespace {

// One-domain solution on a hand-made time grid. Only the fields read by the
// switching-function code are filled in.
CollocatedSolution grid_solution(const MeshLayout& mesh, std::vector<double> times, std::size_t n_y, std::size_t n_u) {
  const std::size_t n = mesh.total_points();
  REQUIRE(times.size() == n + 1);
  DomainSolution dom;
  dom.mesh = mesh;
  dom.t_start = times.front();
  dom.t_end = times.back();
  dom.times = std::move(times);
  dom.states = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n_y));
  dom.controls = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_u));
  dom.costates = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n_y));
  CollocatedSolution s;
  s.t0 = dom.t_start;
  s.tf = dom.t_end;
  s.domains.push_back(std::move(dom));
  s.has_costates = true;
  s.status = NlpStatus::converged;
  return s;
}

std::vector<double> uniform_times(double t0, double tf, std::size_t n) {
  std::vector<double> t(n + 1);
  for (std::size_t j = 0; j <= n; ++j) t[j] = t0 + (tf - t0) * static_cast<double>(j) / static_cast<double>(n);
  return t;
}

SwitchingProfile single_profile(std::vector<double> sigma) {
  SwitchingProfile p;
  p.components = {0};
  p.sigma = {{std::move(sigma)}};
  p.zero_level = {1e-8};
  return p;
}

// y' = u1 with an extra control u2 that appears nowhere.
BolzaProblem idle_control() {
  BolzaProblem p;
  p.n_y = 1;
  p.n_u = 2;
  p.dynamics = DynamicsFn([](auto y, auto u, const auto&) {
    using T = std::remove_cv_t<typename decltype(y)::element_type>;
    return std::vector<T>{T(u[0])};
  });
  p.control_bounds = {{-1.0, 0.0}, {1.0, 2.0}};
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {1.0, 1.0};
  p.guess = {0.0, 1.0, {0.0}, {0.0}, {}};
  return p;
}

CollocatedSolution solve_first_mesh(const BolzaProblem& p) {
  const auto nlp = assemble(as_single_domain(p), {MeshLayout::uniform(10, 5)});
  const auto r = solve(*nlp);
  REQUIRE(r.status == NlpStatus::converged);
  return extract(r, *nlp);
}

}  // namespace

TEST_SUITE("bangbang") {

TEST_CASE("interior estimate averages the sign change and the control jump") {
  CHECK(combine_estimate(2.0, 2.4) == doctest::Approx(2.2));

  // Ten collocation points 1.5, 1.7, ..., 3.3 in a single interval.
  const MeshLayout mesh = MeshLayout::uniform(1, 10);
  auto sol = grid_solution(mesh, uniform_times(1.5, 3.5, 10), 1, 1);
  auto& u = sol.domains[0].controls;
  for (Eigen::Index l = 0; l < 10; ++l) u(l, 0) = l <= 4 ? 0.0 : 1.0;  // largest jump between 2.3 and 2.5
  u(3, 0) = 0.1;
  auto prof = single_profile({1, 1, 1, -1, -1, -1, -1, -1, -1, -1});  // change between 1.9 and 2.1
  prof.changes.push_back({0, 0, 0, 2, 3, false});
  const auto est = estimate_discontinuities(prof, sol);
  REQUIRE(est.size() == 1);
  CHECK(est[0].time == doctest::Approx(2.2).epsilon(1e-14));
  CHECK(est[0].source == EstimateSource::interior);
  CHECK(est[0].sign_before == 1);
  CHECK(est[0].sign_after == -1);
  CHECK(est[0].lower == 1.5);
  CHECK(est[0].upper == 3.5);
}

TEST_CASE("a change across an interval boundary uses the mesh point") {
  const MeshLayout mesh = MeshLayout::uniform(2, 5);
  auto sol = grid_solution(mesh, uniform_times(1.0, 5.0, 10), 1, 1);
  auto prof = single_profile({-1, -1, -1, -1, -1, 1, 1, 1, 1, 1});
  prof.changes.push_back({0, 0, 0, 4, 5, true});
  const auto est = estimate_discontinuities(prof, sol);
  REQUIRE(est.size() == 1);
  CHECK(est[0].source == EstimateSource::interval_boundary);
  CHECK(est[0].time == 3.0);
}

TEST_CASE("estimates are sorted with midpoint brackets") {
  const MeshLayout mesh = MeshLayout::uniform(2, 5);
  auto sol = grid_solution(mesh, uniform_times(0.0, 10.0, 10), 1, 2);
  SwitchingProfile prof;
  prof.components = {0, 1};
  prof.sigma = {{{1, 1, 1, 1, 1, -1, -1, -1, -1, -1}}, {{1, 1, -1, -1, -1, -1, -1, -1, -1, -1}}};
  prof.zero_level = {1e-8, 1e-8};
  prof.changes = {{0, 0, 0, 4, 5, true}, {1, 0, 0, 1, 2, false}};
  auto& u = sol.domains[0].controls;
  for (Eigen::Index l = 2; l < 10; ++l) u(l, 1) = 1.0;
  const auto est = estimate_discontinuities(prof, sol);
  REQUIRE(est.size() == 2);
  CHECK(est[0].component == 1);
  CHECK(est[0].time == doctest::Approx(1.5));
  CHECK(est[1].time == 5.0);
  CHECK(est[0].lower == 0.0);
  CHECK(est[0].upper == doctest::Approx(3.25));
  CHECK(est[1].lower == doctest::Approx(3.25));
  CHECK(est[1].upper == 10.0);
}

TEST_CASE("a run of zeros is a possible singular arc") {
  const MeshLayout mesh = MeshLayout::uniform(1, 10);
  auto sol = grid_solution(mesh, uniform_times(0.0, 1.0, 10), 1, 1);
  const auto prof = single_profile({1, 1, 0, 0, 0, -1, -1, -1, -1, -1});
  CHECK_THROWS_AS(estimate_discontinuities(prof, sol), RefinementAborted);
}

TEST_CASE("multi-domain reformulation from one estimate") {
  const MeshLayout mesh = MeshLayout::uniform(2, 10);
  auto sol = grid_solution(mesh, uniform_times(0.0, 7.0, 20), 3, 2);
  std::vector<double> sigma(20);
  for (std::size_t l = 0; l < 20; ++l) sigma[l] = 2.2 - sol.domains[0].times[l];
  SwitchingProfile prof;
  prof.components = {0};
  prof.sigma = {{sigma}};
  prof.zero_level = {1e-8};
  DiscontinuityEstimate e;
  e.component = 0;
  e.time = 2.2;
  e.sign_before = 1;
  e.sign_after = -1;
  e.lower = 0.0 + 1.0;
  e.upper = 7.0 - 1.0;
  e.window_start = 2.1;
  e.window_end = 2.45;
  const auto mdp = build_multidomain(make_three_compartment(), {e}, prof, sol);
  CHECK(mdp.domains() == 2);
  REQUIRE(mdp.switches.size() == 1);
  CHECK(mdp.switches[0].guess == 2.2);
  CHECK(mdp.control_modes[0][0] == ControlMode::at_lower);
  CHECK(mdp.control_modes[1][0] == ControlMode::at_upper);
  CHECK(mdp.control_modes[0][1] == ControlMode::free);
  CHECK(mdp.control_box(0).upper[0] == 0.0);
  CHECK(mdp.control_box(1).lower[0] == 1.0);

  CHECK_THROWS_AS(build_multidomain(make_three_compartment(), {}, prof, sol), std::invalid_argument);
}

TEST_CASE("a sign change without an estimate aborts the reformulation") {
  const MeshLayout mesh = MeshLayout::uniform(2, 5);
  auto sol = grid_solution(mesh, uniform_times(0.0, 7.0, 10), 3, 2);
  auto prof = single_profile({1, 1, -1, -1, -1, -1, -1, 1, 1, 1});
  DiscontinuityEstimate e;
  e.component = 0;
  e.time = 1.0;
  e.sign_before = 1;
  e.sign_after = -1;
  e.lower = 0.5;
  e.upper = 6.5;
  e.window_start = 0.7;
  e.window_end = 1.4;
  CHECK_THROWS_AS(build_multidomain(make_three_compartment(), {e}, prof, sol), RefinementAborted);
}

TEST_CASE("free final time tightens the last bracket") {
  const MeshLayout mesh = MeshLayout::uniform(2, 5);
  auto sol = grid_solution(mesh, uniform_times(0.0, 8.0, 10), 6, 3);
  SwitchingProfile prof;
  prof.components = {0, 1, 2};
  std::vector<double> s(10);
  for (std::size_t l = 0; l < 10; ++l) s[l] = l < 5 ? -1.0 : 1.0;
  prof.sigma = {{s}, {std::vector<double>(10, -1.0)}, {std::vector<double>(10, 1.0)}};
  prof.zero_level = {1e-8, 1e-8, 1e-8};
  DiscontinuityEstimate e;
  e.component = 0;
  e.time = 4.0;
  e.sign_before = -1;
  e.sign_after = 1;
  e.lower = 0.0;
  e.upper = 8.0;
  e.window_start = e.window_end = 4.0;
  const auto mdp = build_multidomain(make_robot_arm(), {e}, prof, sol);
  CHECK(mdp.switches[0].upper == 6.0);
  CHECK(mdp.base.tf_bounds.lower == 6.0);
  CHECK(mdp.base.guess.tf == 8.0);
  CHECK(mdp.control_modes[0][0] == ControlMode::at_upper);
  CHECK(mdp.control_modes[1][0] == ControlMode::at_lower);
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(mdp.control_modes[d][1] == ControlMode::at_upper);
    CHECK(mdp.control_modes[d][2] == ControlMode::at_lower);
  }
}

TEST_CASE("quadratic control dependence is not control-linear") {
  BolzaProblem p = testing::double_integrator();
  p.control_bounds = {{-10.0}, {10.0}};
  const auto sol = solve_first_mesh(p);
  const auto rep = detect_linearity(sol, p);
  CHECK(rep.linear_indices.empty());
  CHECK(rep.nonlinear_indices == std::vector<std::size_t>{0});

  const auto unbounded = detect_linearity(sol, testing::double_integrator());
  CHECK(unbounded.linear_indices.empty());
  CHECK_FALSE(unbounded.warnings.empty());
}

TEST_CASE("a control absent from the Hamiltonian has a zero switching function") {
  const BolzaProblem p = idle_control();
  auto sol = grid_solution(MeshLayout::uniform(1, 4), uniform_times(0.0, 1.0, 4), 1, 2);
  sol.domains[0].costates.setConstant(0.75);
  const auto rep = detect_linearity(sol, p);
  CHECK(rep.linear_indices == std::vector<std::size_t>{0, 1});
  const auto prof = switching_functions(sol, p, rep);
  for (double v : prof.sigma[1][0]) CHECK(v == 0.0);
  for (double v : prof.sigma[0][0]) CHECK(v == 0.75);
  CHECK(prof.changes.empty());
}

TEST_CASE("Example 1 first mesh") {
  const BolzaProblem p = make_three_compartment();
  const auto sol = solve_first_mesh(p);
  const auto rep = detect_linearity(sol, p);
  CHECK(rep.linear_indices == std::vector<std::size_t>{0, 1});

  const auto prof = switching_functions(sol, p, rep);
  using namespace three_compartment;
  const auto& d = sol.domains[0];
  double worst = 0.0;
  for (Eigen::Index l = 0; l < d.controls.rows(); ++l) {
    const double s1 = 1.0 - 2.0 * a3 * d.states(l, 2) * d.costates(l, 0);
    const double s2 = a2 * d.states(l, 1) * (d.costates(l, 2) - d.costates(l, 1));
    worst = std::max({worst, std::abs(prof.sigma[0][0][static_cast<std::size_t>(l)] - s1),
                      std::abs(prof.sigma[1][0][static_cast<std::size_t>(l)] - s2)});
  }
  CHECK(worst < 1e-12);

  const auto est = estimate_discontinuities(prof, sol);
  CHECK(est.size() == 3);
  const auto mdp = build_multidomain(p, est, prof, sol);
  CHECK(mdp.domains() == 4);
  for (std::size_t q = 0; q < mdp.domains(); ++q)
    for (std::size_t i = 0; i < 2; ++i) CHECK(mdp.control_modes[q][i] != ControlMode::free);
}

TEST_CASE("Example 2 first mesh") {
  const BolzaProblem p = make_robot_arm();
  const auto sol = solve_first_mesh(p);
  const auto rep = detect_linearity(sol, p);
  CHECK(rep.linear_indices == std::vector<std::size_t>{0, 1, 2});
  const auto prof = switching_functions(sol, p, rep);
  // sigma_1 = lambda_2 / L, and its sign at the start picks the first limit of u_1.
  const auto& d = sol.domains[0];
  CHECK(std::abs(prof.sigma[0][0][0] - d.costates(0, 1) / robot_arm::length) < 1e-12);
  CHECK(d.controls(0, 0) == doctest::Approx(prof.sigma[0][0][0] > 0 ? -1.0 : 1.0).epsilon(1e-6));
  const auto mdp = build_multidomain(p, estimate_discontinuities(prof, sol), prof, sol);
  CHECK(mdp.domains() == 6);
  for (std::size_t q = 0; q < mdp.domains(); ++q)
    for (std::size_t i = 0; i < 3; ++i) CHECK(mdp.control_modes[q][i] != ControlMode::free);
}

}  // TEST_SUITE
