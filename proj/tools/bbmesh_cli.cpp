// Command-line front end for the benchmark problems.
//
//   bbmesh solve --problem robot-arm --method bb --out results/
//   bbmesh table --problem three-compartment
//   bbmesh list

#include "bbmesh/benchmarks.hpp"
#include "bbmesh/report.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <regex>
#include <string>

namespace {

struct MeshSize {
  std::size_t intervals = 0;
  std::size_t points = 0;
};

MeshSize parse_mesh(const std::string& text) {
  static const std::regex pattern(R"((\d+)\s*[xX]\s*(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) throw CLI::ValidationError("mesh", "expected KxN, got '" + text + "'");
  return {std::stoul(m[1]), std::stoul(m[2])};
}

int exit_code(bbmesh::DriveStatus s) {
  switch (s) {
    case bbmesh::DriveStatus::converged:
      return 0;
    case bbmesh::DriveStatus::tolerance_not_met:
      return 2;
    case bbmesh::DriveStatus::solver_failure:
      return 3;
  }
  return 3;
}

void print_summary(const bbmesh::RunReport& r) {
  const auto& res = r.result;
  std::cout << r.name << " [" << bbmesh::to_string(r.method) << "]: " << bbmesh::to_string(res.status) << '\n';
  for (const auto& h : res.history)
    std::cout << "  mesh " << h.iteration << ": Q=" << h.domains << " N=" << h.points << " J=" << h.objective
              << " e=" << h.error << " nlp_iter=" << h.nlp_iterations << " t=" << h.wall_time << "s"
              << (h.note.empty() ? "" : "  (" + h.note + ")") << '\n';
  if (!res.message.empty()) std::cout << "  " << res.message << '\n';
  std::cout << "  M=" << r.mesh_iterations() << " N_f=" << r.final_points() << " objective=" << res.solution.objective
            << '\n';
  for (std::size_t s = 0; s < res.solution.switch_times.size(); ++s)
    std::cout << "  switch " << s + 1 << ": t=" << res.solution.switch_times[s] << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bang-bang mesh refinement for LGR collocation"};
  app.require_subcommand(1);

  std::string problem = "three-compartment";
  std::string method = "bb";
  double mesh_tol = 1e-6;
  std::string initial_mesh = "10x5";
  std::string sub_mesh;
  std::size_t max_mesh = 10;
  std::string out_dir;

  const auto names = bbmesh::benchmark_names();
  auto* solve = app.add_subcommand("solve", "Solve one benchmark and optionally write its report files");
  solve->add_option("--problem", problem, "Benchmark name")->check(CLI::IsMember(names));
  solve->add_option("--method", method, "bb or standard")->check(CLI::IsMember({"bb", "standard"}));
  solve->add_option("--mesh-tol", mesh_tol, "Mesh error tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--initial-mesh", initial_mesh, "Initial mesh, KxN");
  solve->add_option("--sub-mesh", sub_mesh, "Per-domain mesh after the bang-bang step, kxn (default per problem)");
  solve->add_option("--max-mesh-iterations", max_mesh, "Largest number of meshes solved")->check(CLI::PositiveNumber);
  solve->add_option("--out", out_dir, "Directory for trajectory.csv, history.csv and run.txt");

  auto* table = app.add_subcommand("table", "Run bb and standard on one benchmark and print the comparison table");
  table->add_option("--problem", problem, "Benchmark name")->check(CLI::IsMember(names));

  app.add_subcommand("list", "List benchmark names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) {
      for (const auto& n : names) std::cout << n << '\n';
      return 0;
    }
    if (app.got_subcommand("table")) {
      std::vector<bbmesh::RunReport> reports;
      for (auto m : {bbmesh::Method::bang_bang, bbmesh::Method::standard}) {
        reports.push_back(bbmesh::run(bbmesh::default_spec(problem, m)));
        print_summary(reports.back());
      }
      std::cout << '\n' << bbmesh::report_table(reports);
      return 0;
    }

    bbmesh::BenchmarkSpec spec = bbmesh::default_spec(problem, bbmesh::parse_method(method));
    const MeshSize init = parse_mesh(initial_mesh);
    spec.config.initial_intervals = init.intervals;
    spec.config.initial_points = init.points;
    if (!sub_mesh.empty()) {
      const MeshSize sub = parse_mesh(sub_mesh);
      spec.config.sub_intervals = sub.intervals;
      spec.config.sub_points = sub.points;
    }
    spec.config.mesh_tolerance = mesh_tol;
    spec.config.max_mesh_iterations = max_mesh;

    const bbmesh::RunReport report = bbmesh::run(spec);
    print_summary(report);
    std::cout << '\n' << bbmesh::report_table({report});
    if (!out_dir.empty()) {
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      bbmesh::export_trajectory(report, dir / "trajectory.csv");
      bbmesh::export_history(report, dir / "history.csv");
      bbmesh::export_metadata(report, dir / "run.txt");
      std::cout << "wrote " << (dir / "trajectory.csv").string() << ", history.csv, run.txt\n";
    }
    return exit_code(report.result.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
