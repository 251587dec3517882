#include "bbmesh/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bbmesh {

namespace {

template <typename S>
using Elem = std::remove_cv_t<typename S::element_type>;

}  // namespace

BolzaProblem make_three_compartment(CompartmentVariant variant) {
  using namespace three_compartment;
  const double g3 = variant == CompartmentVariant::cell_cycle ? -a3 : a3;
  BolzaProblem p;
  p.name = "three-compartment";
  p.n_y = 3;
  p.n_u = 2;
  p.state_names = {"N1", "N2", "N3"};
  p.mayer = MayerFn([](auto, const auto&, auto yf, const auto&) { return r1 * yf[0] + r2 * yf[1] + r3 * yf[2]; });
  p.lagrangian = LagrangianFn([](auto, auto u, const auto&) { return u[0]; });
  p.dynamics = DynamicsFn([g3](auto y, auto u, const auto&) {
    using T = Elem<decltype(y)>;
    return std::vector<T>{-a1 * y[0] + 2.0 * a3 * y[2] * (1.0 - u[0]), -a2 * y[1] * u[1] + a1 * y[0],
                          g3 * y[2] + a2 * y[1] * u[1]};
  });
  p.control_bounds = {{0.0, u2_min}, {1.0, 1.0}};
  p.initial_state_bounds = Box::fixed({38.0, 2.5, 3.25});
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {horizon, horizon};
  p.guess = {0.0, horizon, {38.0, 2.5, 3.25}, {38.0, 2.5, 3.25}, {}};
  return p;
}

BolzaProblem make_robot_arm() {
  using robot_arm::length;
  constexpr double pi = std::numbers::pi;
  BolzaProblem p;
  p.name = "robot-arm";
  p.n_y = 6;
  p.n_u = 3;
  p.mayer = MayerFn([](auto, const auto&, auto, const auto& tf) { return tf; });
  p.dynamics = DynamicsFn([](auto y, auto u, const auto&) {
    using T = Elem<decltype(y)>;
    using std::sin;
    const T inertia_phi = ((length - y[0]) * (length - y[0]) * (length - y[0]) + y[0] * y[0] * y[0]) / 3.0;
    const T s = sin(y[4]);
    const T inertia_theta = inertia_phi * s * s;
    return std::vector<T>{y[1], u[0] / length, y[3], u[1] / inertia_theta, y[5], u[2] / inertia_phi};
  });
  p.control_bounds = {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
  p.initial_state_bounds = Box::fixed({4.5, 0.0, 0.0, 0.0, pi / 4.0, 0.0});
  p.final_state_bounds = Box::fixed({4.5, 0.0, 2.0 * pi / 3.0, 0.0, pi / 4.0, 0.0});
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {0.1, 50.0};
  p.guess = {0.0, 10.0, {4.5, 0.0, 0.0, 0.0, pi / 4.0, 0.0}, {4.5, 0.0, 2.0 * pi / 3.0, 0.0, pi / 4.0, 0.0},
             {0.0, 0.0, 0.0}};
  return p;
}

BolzaProblem make_free_flying_robot() {
  using namespace free_flying_robot;
  constexpr double pi = std::numbers::pi;
  BolzaProblem p;
  p.name = "free-flying-robot";
  p.n_y = 6;
  p.n_u = 4;
  p.n_c = 2;
  p.lagrangian = LagrangianFn([](auto, auto u, const auto&) { return u[0] + u[1] + u[2] + u[3]; });
  p.dynamics = DynamicsFn([](auto y, auto u, const auto&) {
    using T = Elem<decltype(y)>;
    using std::cos;
    using std::sin;
    const T f1 = u[0] - u[1], f2 = u[2] - u[3];
    return std::vector<T>{y[2], y[3], (f1 + f2) * cos(y[4]), (f1 + f2) * sin(y[4]), y[5], alpha * f1 - beta * f2};
  });
  p.path = PathFn([](auto, auto u, const auto&) {
    using T = Elem<decltype(u)>;
    return std::vector<T>{u[0] - u[1], u[2] - u[3]};
  });
  p.path_names = {"F1", "F2"};
  p.path_bounds = {{-kInfinity, -kInfinity}, {1.0, 1.0}};
  p.control_bounds = {{0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}};
  p.initial_state_bounds = Box::fixed({-10.0, -10.0, 0.0, 0.0, pi / 2.0, 0.0});
  p.final_state_bounds = Box::fixed({0.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  p.t0_bounds = {0.0, 0.0};
  p.tf_bounds = {horizon, horizon};
  p.guess = {0.0, horizon, {-10.0, -10.0, 0.0, 0.0, pi / 2.0, 0.0}, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, {}};
  return p;
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{"three-compartment", "robot-arm", "free-flying-robot"};
  return names;
}

BolzaProblem make_benchmark(const std::string& name) {
  if (name == "three-compartment") return make_three_compartment();
  if (name == "robot-arm") return make_robot_arm();
  if (name == "free-flying-robot") return make_free_flying_robot();
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::string to_string(Method m) { return m == Method::bang_bang ? "bb" : "standard"; }

Method parse_method(const std::string& s) {
  if (s == "bb") return Method::bang_bang;
  if (s == "standard") return Method::standard;
  throw std::invalid_argument("unknown method '" + s + "'");
}

BenchmarkSpec default_spec(const std::string& name, Method method) {
  (void)make_benchmark(name);
  BenchmarkSpec spec;
  spec.name = name;
  spec.method = method;
  spec.config.bang_bang = method == Method::bang_bang;
  spec.config.sub_points = name == "free-flying-robot" ? 6 : 5;
  return spec;
}

double RunReport::wall_time() const {
  double t = 0.0;
  for (const auto& r : result.history) t += r.wall_time;
  return t;
}

RunReport run(const BenchmarkSpec& spec) {
  RunReport report;
  report.name = spec.name;
  report.method = spec.method;
  report.problem = make_benchmark(spec.name);
  DriveConfig config = spec.config;
  config.bang_bang = spec.method == Method::bang_bang;
  report.result = drive(report.problem, config);
  return report;
}

}  // namespace bbmesh
