#pragma once

#include "bbmesh/ocp.hpp"
#include "bbmesh/refine.hpp"

#include <string>
#include <vector>

namespace bbmesh {

namespace three_compartment {
inline constexpr double a1 = 0.197, a2 = 0.395, a3 = 0.107;
inline constexpr double r1 = 1.0, r2 = 0.5, r3 = 1.0;
inline constexpr double horizon = 7.0;
inline constexpr double u2_min = 0.70;
}  // namespace three_compartment

namespace robot_arm {
inline constexpr double length = 5.0;
}

namespace free_flying_robot {
inline constexpr double alpha = 0.2, beta = 0.2;
inline constexpr double horizon = 12.0;
}

/// Sign of the a3 N3 term in the N3 equation. `cell_cycle` is the outflow
/// -a3 N3 of the underlying cell-cycle model (the default); `growth` is +a3 N3.
enum class CompartmentVariant { cell_cycle, growth };

BolzaProblem make_three_compartment(CompartmentVariant variant = CompartmentVariant::cell_cycle);
BolzaProblem make_robot_arm();
BolzaProblem make_free_flying_robot();

/// Names accepted by `make_benchmark`, in example order.
const std::vector<std::string>& benchmark_names();
/// Throws std::invalid_argument for an unknown name.
BolzaProblem make_benchmark(const std::string& name);

enum class Method { bang_bang, standard };
std::string to_string(Method m);
Method parse_method(const std::string& s);

struct BenchmarkSpec {
  std::string name;
  Method method = Method::bang_bang;
  DriveConfig config;
};

/// Default configuration for a benchmark: 10x5 initial mesh, 2x5 sub-meshes
/// (2x6 for the free-flying robot), tolerance 1e-6.
BenchmarkSpec default_spec(const std::string& name, Method method = Method::bang_bang);

struct RunReport {
  std::string name;
  Method method = Method::bang_bang;
  BolzaProblem problem;
  DriveResult result;

  std::size_t mesh_iterations() const { return result.history.size(); }
  std::size_t final_points() const { return result.solution.total_points(); }
  double wall_time() const;
};

RunReport run(const BenchmarkSpec& spec);

}  // namespace bbmesh
