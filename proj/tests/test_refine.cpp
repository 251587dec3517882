#include "bbmesh/refine.hpp"
#include "bbmesh/transcription.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

#include "problems.hpp"

using namespace bbmesh;

namespace {

CollocatedSolution solve_on(const BolzaProblem& p, const MeshLayout& mesh) {
  const auto nlp = assemble(as_single_domain(p), {mesh});
  const auto r = solve(*nlp);
  REQUIRE(r.status == NlpStatus::converged);
  return extract(r, *nlp);
}

// y' = -y^3 + u, min int (y^2 + u^2) on [0, 2] from y(0) = 1: smooth, with a
// Hamiltonian quadratic in u.
BolzaProblem cubic_regulator() {
  BolzaProblem p;
  p.name = "cubic-regulator";
  p.n_y = 1;
  p.n_u = 1;
  p.dynamics = DynamicsFn([](auto y, auto u, const auto&) {
    using T = std::remove_cv_t<typename decltype(y)::element_type>;
    return std::vector<T>{-y[0] * y[0] * y[0] + u[0]};
  });
  p.lagrangian = LagrangianFn([](auto y, auto u, const auto&) { return y[0] * y[0] + u[0] * u[0]; });
  p.control_bounds = {{-10.0}, {10.0}};
  p.initial_state_bounds = Box::fixed({1.0});
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {2.0, 2.0};
  p.guess = {0.0, 2.0, {1.0}, {0.0}, {0.0}};
  return p;
}

}  // namespace

TEST_SUITE("refine") {

TEST_CASE("exponential growth on a fine mesh") {
  const auto p = testing::exponential_growth();
  const auto sol = solve_on(p, MeshLayout::uniform(4, 8));
  const auto& d = sol.domains[0];
  for (Eigen::Index j = 0; j < d.states.rows(); ++j)
    CHECK(std::abs(d.states(j, 0) - std::exp(d.times[static_cast<std::size_t>(j)])) < 1e-9);
  CHECK(max_error(error_estimate(sol, p)) < 1e-6);
}

TEST_CASE("zero dynamics give zero error") {
  BolzaProblem p;
  p.n_y = 2;
  p.n_u = 1;
  p.dynamics = DynamicsFn([](auto y, auto u, const auto&) {
    using T = std::remove_cv_t<typename decltype(y)::element_type>;
    return std::vector<T>{0.0 * u[0], T(0.0)};
  });
  p.control_bounds = {{-1.0}, {1.0}};
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {3.0, 3.0};
  p.guess = {0.0, 3.0, {1.5, -2.0}, {1.5, -2.0}, {}};
  const auto nlp = assemble(as_single_domain(p), {MeshLayout::uniform(3, 4)});
  NlpResult r;
  r.x = nlp->x_initial;
  const auto sol = extract(r, *nlp);
  const auto e = error_estimate(sol, p);
  REQUIRE(e.size() == 1);
  REQUIRE(e[0].size() == 3);
  for (double v : e[0]) CHECK(v < 1e-14);
}

TEST_CASE("standard refinement rules") {
  const MeshLayout mesh{{-1.0, -0.5, 0.5, 1.0}, {10, 5, 4}};
  const std::vector<double> errors{1e-3, 1e-8, 1e-4};
  const std::vector<double> decay{2.0, 2.0, 0.1};
  const MeshLayout out = standard_refine(mesh, errors, decay, 1e-6);
  // Interval 0 is at the cap and splits, interval 1 passes, interval 2 decays slowly and splits.
  REQUIRE(out.intervals() == 5);
  CHECK(out.boundaries == std::vector<double>{-1.0, -0.75, -0.5, 0.5, 0.75, 1.0});
  CHECK(out.points_per_interval == std::vector<std::size_t>{3, 3, 5, 3, 3});
  CHECK_NOTHROW(out.validate());

  const MeshLayout smooth = standard_refine(MeshLayout::uniform(2, 5), std::vector<double>{1e-4, 1e-7},
                                            std::vector<double>{1.0, 1.0}, 1e-6);
  CHECK(smooth.intervals() == 2);
  CHECK(smooth.points_per_interval == std::vector<std::size_t>{7, 5});
  const MeshLayout capped = standard_refine(MeshLayout::uniform(1, 9), std::vector<double>{1.0},
                                            std::vector<double>{0.6}, 1e-6);
  CHECK(capped.points_per_interval == std::vector<std::size_t>{10});
}

TEST_CASE("a smooth failing interval gains points") {
  const auto p = testing::exponential_growth();
  const MeshLayout coarse = MeshLayout::uniform(1, 3);
  const auto sol = solve_on(p, coarse);
  const auto e = error_estimate(sol, p);
  CHECK(max_error(e) > 1e-6);
  const auto decay = legendre_decay(sol.domains[0]);
  for (double v : decay) CHECK(v >= kFastDecay);
  const MeshLayout next = standard_refine(coarse, e[0], decay, 1e-6);
  CHECK(next.intervals() == coarse.intervals());
  for (std::size_t k = 0; k < next.intervals(); ++k) CHECK(next.points_per_interval[k] > 3);
}

TEST_CASE("the double integrator converges on the first mesh") {
  DriveConfig cfg;
  const auto res = drive(testing::double_integrator(), cfg);
  CHECK(res.status == DriveStatus::converged);
  CHECK(res.history.size() == 1);
  CHECK(std::abs(res.solution.objective - 6.0) < 1e-8);
}

TEST_CASE("a smooth problem never takes the bang-bang branch") {
  DriveConfig cfg;
  cfg.initial_intervals = 2;
  cfg.initial_points = 3;
  const auto res = drive(cubic_regulator(), cfg);
  CHECK(res.status == DriveStatus::converged);
  REQUIRE(res.history.size() >= 2);
  REQUIRE(res.linearity.has_value());
  CHECK(res.linearity->linear_indices.empty());
  CHECK(res.estimates.empty());
  CHECK(res.problem.domains() == 1);
  CHECK(res.history.front().note == "no control-linear components");
  CHECK(max_error(res.errors) < 1e-6);
  for (const auto& h : res.history) CHECK(h.domains == 1);
}

TEST_CASE("the mesh iteration limit is reported") {
  DriveConfig cfg;
  cfg.initial_intervals = 2;
  cfg.initial_points = 3;
  cfg.max_mesh_iterations = 1;
  const auto res = drive(cubic_regulator(), cfg);
  CHECK(res.status == DriveStatus::tolerance_not_met);
  CHECK(res.history.size() == 1);
  CHECK(to_string(res.status) == "tolerance-not-met");
}

TEST_CASE("drive is deterministic") {
  DriveConfig cfg;
  cfg.initial_intervals = 2;
  cfg.initial_points = 3;
  const auto a = drive(cubic_regulator(), cfg);
  const auto b = drive(cubic_regulator(), cfg);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t m = 0; m < a.history.size(); ++m) {
    CHECK(a.history[m].objective == b.history[m].objective);
    CHECK(a.history[m].error == b.history[m].error);
  }
  CHECK(a.solution.domains[0].states == b.solution.domains[0].states);
}

}  // TEST_SUITE
