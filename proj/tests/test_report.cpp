#include "bbmesh/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace bbmesh;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bbmesh_report_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw std::out_of_range(name);
  }
};

Csv read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  Csv csv;
  std::string line;
  std::getline(in, line);
  csv.header = split(line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(std::stod(cell));
    csv.rows.push_back(row);
  }
  return csv;
}

RunReport stub_report(const std::string& name, std::size_t meshes, std::size_t points) {
  RunReport r;
  r.name = name;
  r.problem = make_benchmark(name);
  for (std::size_t m = 0; m < meshes; ++m) {
    MeshRecord rec;
    rec.iteration = m + 1;
    rec.wall_time = 0.25;
    r.result.history.push_back(rec);
  }
  DomainSolution dom;
  dom.mesh = MeshLayout::uniform(1, points);
  r.result.solution.domains.push_back(dom);
  return r;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("table shape") {
  const std::string one = report_table({stub_report("robot-arm", 2, 6)});
  std::vector<std::string> lines;
  std::stringstream ss(one);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  REQUIRE(lines.size() == 5);  // header, rule, M, N_f, T
  CHECK(lines[0].find("robot-arm (bb)") != std::string::npos);
  CHECK(lines[2].rfind("M", 0) == 0);
  CHECK(lines[2].find(" 2") != std::string::npos);
  CHECK(lines[3].rfind("N_f", 0) == 0);
  CHECK(lines[3].find(" 6") != std::string::npos);
  CHECK(lines[4].rfind("T (s)", 0) == 0);
  CHECK(lines[4].find("0.500") != std::string::npos);

  auto second = stub_report("robot-arm", 3, 9);
  second.method = Method::standard;
  const std::string two = report_table({stub_report("robot-arm", 2, 6), second});
  CHECK(two.find("robot-arm (standard)") != std::string::npos);

  CHECK_THROWS_AS(report_table({}), std::invalid_argument);
}

TEST_CASE("trajectory columns") {
  const auto c1 = trajectory_columns(make_three_compartment());
  CHECK(c1 == std::vector<std::string>{"t", "N1", "N2", "N3", "u1", "u2", "lambda1", "lambda2", "lambda3", "sigma1",
                                       "sigma2"});
  const auto c3 = trajectory_columns(make_free_flying_robot());
  REQUIRE(c3.size() == 1 + 6 + 4 + 6 + 4 + 2);
  CHECK(c3[c3.size() - 2] == "F1");
  CHECK(c3.back() == "F2");
  CHECK(trajectory_columns(make_robot_arm())[1] == "y1");
}

TEST_CASE("empty report writes the header only") {
  RunReport r;
  r.name = "three-compartment";
  r.problem = make_three_compartment();
  const auto path = scratch("empty.csv");
  export_trajectory(r, path);
  const Csv csv = read_csv(path);
  CHECK(csv.header == trajectory_columns(r.problem));
  CHECK(csv.rows.empty());
  CHECK_THROWS(export_trajectory(r, std::filesystem::path("/nonexistent/dir/x.csv")));
}

TEST_CASE("Example 1 export honours the boundary values") {
  const RunReport r = run(default_spec("three-compartment"));
  REQUIRE(r.result.status == DriveStatus::converged);
  const auto path = scratch("three_compartment.csv");
  export_trajectory(r, path);
  const Csv csv = read_csv(path);
  REQUIRE(!csv.rows.empty());
  CHECK(csv.rows.size() == r.final_points() + 1);
  const auto& first = csv.rows.front();
  CHECK(first[csv.column("t")] == 0.0);
  CHECK(first[csv.column("N1")] == 38.0);
  CHECK(first[csv.column("N2")] == 2.5);
  CHECK(first[csv.column("N3")] == 3.25);
  CHECK(csv.rows.back()[csv.column("t")] == 7.0);
  for (const auto& row : csv.rows) {
    CHECK(std::isfinite(row[csv.column("sigma1")]));
    const double u1 = row[csv.column("u1")];
    CHECK((u1 == 0.0 || u1 == 1.0));
  }

  export_history(r, scratch("history.csv"));
  std::ifstream h(scratch("history.csv"));
  std::string header, line;
  std::getline(h, header);
  CHECK(header == "iteration,domains,intervals,points,objective,error,wall_time,nlp_status,nlp_iterations,note");
  std::size_t count = 0;
  while (std::getline(h, line)) ++count;
  CHECK(count == r.mesh_iterations());

  export_metadata(r, scratch("run.txt"));
  std::ifstream m(scratch("run.txt"));
  std::string all((std::istreambuf_iterator<char>(m)), std::istreambuf_iterator<char>());
  CHECK(all.find("status=converged\n") != std::string::npos);
  CHECK(all.find("final_points=40\n") != std::string::npos);
  CHECK(all.find("switch.3.time=") != std::string::npos);
}

TEST_CASE("Example 2 and 3 exports honour the boundary values") {
  constexpr double pi = std::numbers::pi;
  {
    const RunReport r = run(default_spec("robot-arm"));
    REQUIRE(r.result.status == DriveStatus::converged);
    export_trajectory(r, scratch("robot_arm.csv"));
    const Csv csv = read_csv(scratch("robot_arm.csv"));
    const auto &a = csv.rows.front(), &b = csv.rows.back();
    CHECK(a[csv.column("y1")] == 4.5);
    CHECK(b[csv.column("y1")] == 4.5);
    CHECK(b[csv.column("y3")] == 2.0 * pi / 3.0);
    CHECK(a[csv.column("y5")] == pi / 4.0);
    CHECK(b[csv.column("y5")] == pi / 4.0);
    for (const char* v : {"y2", "y4", "y6"}) {
      CHECK(a[csv.column(v)] == 0.0);
      CHECK(b[csv.column(v)] == 0.0);
    }
  }
  {
    const RunReport r = run(default_spec("free-flying-robot"));
    REQUIRE(r.result.status == DriveStatus::converged);
    export_trajectory(r, scratch("free_flying_robot.csv"));
    const Csv csv = read_csv(scratch("free_flying_robot.csv"));
    const auto &a = csv.rows.front(), &b = csv.rows.back();
    CHECK(a[csv.column("y1")] == -10.0);
    CHECK(a[csv.column("y2")] == -10.0);
    CHECK(a[csv.column("y5")] == pi / 2.0);
    for (std::size_t k = 1; k <= 6; ++k) CHECK(b[csv.column("y" + std::to_string(k))] == 0.0);
    for (const auto& row : csv.rows) {
      CHECK(row[csv.column("F1")] == row[csv.column("u1")] - row[csv.column("u2")]);
      CHECK(row[csv.column("F2")] == row[csv.column("u3")] - row[csv.column("u4")]);
    }
  }
}

}  // TEST_SUITE
