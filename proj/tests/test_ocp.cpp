#include "bbmesh/benchmarks.hpp"
#include "bbmesh/ocp.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "problems.hpp"

using namespace bbmesh;

namespace {

bool names(const std::vector<Finding>& f, const std::string& subject) {
  return std::any_of(f.begin(), f.end(), [&](const Finding& x) { return x.subject == subject; });
}

}  // namespace

TEST_SUITE("ocp") {

TEST_CASE("benchmarks validate cleanly") {
  for (const auto& name : benchmark_names()) {
    INFO(name);
    CHECK(validate(make_benchmark(name)).empty());
  }
  CHECK(validate(make_three_compartment(CompartmentVariant::growth)).empty());
  CHECK_THROWS_AS(make_benchmark("nope"), std::invalid_argument);
}

TEST_CASE("dimension mismatches are reported by subject") {
  BolzaProblem p = make_three_compartment();
  p.dynamics = DynamicsFn([](auto y, auto, const auto&) {
    using T = std::remove_cv_t<typename decltype(y)::element_type>;
    return std::vector<T>{y[0], y[1]};
  });
  CHECK(names(validate(p), "dynamics"));

  BolzaProblem q = make_free_flying_robot();
  q.path_bounds.lower[1] = 2.0;
  CHECK(names(validate(q), "path bounds"));

  BolzaProblem r = make_robot_arm();
  r.control_bounds.upper.pop_back();
  CHECK(names(validate(r), "control bounds"));
}

TEST_CASE("single-domain wrapper") {
  const BolzaProblem p = make_robot_arm();
  const MultiDomainProblem mdp = as_single_domain(p);
  CHECK(mdp.domains() == 1);
  CHECK(mdp.switches.empty());
  REQUIRE(mdp.control_modes.size() == 1);
  for (auto m : mdp.control_modes[0]) CHECK(m == ControlMode::free);
  CHECK_NOTHROW(mdp.validate());
  const Box box = mdp.control_box(0);
  CHECK(box.lower == p.control_bounds.lower);
  CHECK(box.upper == p.control_bounds.upper);
}

TEST_CASE("pinned control boxes and switch validation") {
  MultiDomainProblem mdp = as_single_domain(make_three_compartment());
  mdp.switches = {{2.2, 1.0, 3.0}};
  mdp.control_modes = {{ControlMode::at_lower, ControlMode::free}, {ControlMode::at_upper, ControlMode::free}};
  CHECK_NOTHROW(mdp.validate());
  CHECK(mdp.control_box(0).upper[0] == 0.0);
  CHECK(mdp.control_box(1).lower[0] == 1.0);

  auto bad = mdp;
  bad.switches = {{2.0, 1.0, 3.0}, {3.5, 2.5, 4.0}};
  bad.control_modes.push_back(bad.control_modes.back());
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = mdp;
  bad.switches[0].guess = 3.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = mdp;
  bad.switches[0].upper = 8.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = as_single_domain(testing::double_integrator());
  bad.control_modes[0][0] = ControlMode::at_upper;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("real and hyper-dual evaluation agree exactly") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-1.0, 2.0);
  for (const auto& name : benchmark_names()) {
    const BolzaProblem p = make_benchmark(name);
    for (int k = 0; k < 10; ++k) {
      std::vector<double> y(p.n_y), u(p.n_u), lam(p.n_y);
      for (auto& v : y) v = dist(gen);
      for (auto& v : u) v = dist(gen);
      for (auto& v : lam) v = dist(gen);
      if (name == "robot-arm") y[4] = 0.8;
      const double t = 0.5;
      std::vector<HyperDual> yd(y.begin(), y.end()), ud(u.begin(), u.end()), ld(lam.begin(), lam.end());
      ud[0].e1 = 1.0;
      const auto a = p.dynamics(std::span<const double>(y), std::span<const double>(u), t);
      const auto ad = p.dynamics(std::span<const HyperDual>(yd), std::span<const HyperDual>(ud), HyperDual(t));
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == ad[i].real);
      const double h = hamiltonian<double>(p, y, lam, u, t);
      const HyperDual hd = hamiltonian<HyperDual>(p, yd, ld, ud, HyperDual(t));
      CHECK(h == hd.real);
    }
  }
}

TEST_CASE("guess control defaults to the box midpoint") {
  const BolzaProblem p = make_three_compartment();
  const auto u = guess_control(p);
  CHECK(u[0] == 0.5);
  CHECK(u[1] == doctest::Approx(0.85));
  CHECK(guess_control(make_robot_arm()) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(guess_control(testing::double_integrator()) == std::vector<double>{0.0});
}

}  // TEST_SUITE
