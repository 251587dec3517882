#include "bbmesh/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bbmesh {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string label(const std::vector<std::string>& names, std::size_t i, const std::string& stem) {
  return i < names.size() ? names[i] : stem + std::to_string(i + 1);
}

std::string run_label(const RunReport& r) { return r.name + " (" + to_string(r.method) + ")"; }

}  // namespace

std::string report_table(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("report_table needs at least one report");
  std::vector<std::vector<std::string>> cells{{""}, {"M"}, {"N_f"}, {"T (s)"}};
  for (const auto& r : reports) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(3) << r.wall_time();
    cells[0].push_back(run_label(r));
    cells[1].push_back(std::to_string(r.mesh_iterations()));
    cells[2].push_back(std::to_string(r.final_points()));
    cells[3].push_back(t.str());
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c > 0) out << " | ";
      out << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[c])) << cells[r][c];
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) out << (c > 0 ? "-+-" : "") << std::string(width[c], '-');
      out << '\n';
    }
  }
  return out.str();
}

std::vector<std::string> trajectory_columns(const BolzaProblem& p) {
  std::vector<std::string> cols{"t"};
  for (std::size_t k = 0; k < p.n_y; ++k) cols.push_back(label(p.state_names, k, "y"));
  for (std::size_t i = 0; i < p.n_u; ++i) cols.push_back("u" + std::to_string(i + 1));
  for (std::size_t k = 0; k < p.n_y; ++k) cols.push_back("lambda" + std::to_string(k + 1));
  for (std::size_t i = 0; i < p.n_u; ++i) cols.push_back("sigma" + std::to_string(i + 1));
  for (std::size_t c = 0; c < p.path_names.size() && c < p.n_c; ++c) cols.push_back(p.path_names[c]);
  return cols;
}

void export_trajectory(const RunReport& report, const std::filesystem::path& path) {
  const BolzaProblem& p = report.problem;
  const CollocatedSolution& sol = report.result.solution;
  auto out = open_for_writing(path);
  const auto cols = trajectory_columns(p);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  const std::size_t named_paths = std::min(p.path_names.size(), p.n_c);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t d = 0; d < sol.domains.size(); ++d) {
    const auto& dom = sol.domains[d];
    const std::size_t n = dom.times.size();
    // The final point of a domain repeats as the first point of the next.
    const std::size_t rows = d + 1 < sol.domains.size() ? n - 1 : n;
    for (std::size_t j = 0; j < rows; ++j) {
      const double t = dom.times[j];
      std::vector<double> y(p.n_y), lambda(p.n_y, nan), u;
      for (std::size_t k = 0; k < p.n_y; ++k) y[k] = dom.states(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      if (j < static_cast<std::size_t>(dom.controls.rows())) {
        u.resize(p.n_u);
        for (std::size_t i = 0; i < p.n_u; ++i)
          u[i] = dom.controls(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      } else {
        u = sol.control_at(t);
      }
      const bool costates = sol.has_costates && dom.costates.rows() > static_cast<Eigen::Index>(j);
      if (costates)
        for (std::size_t k = 0; k < p.n_y; ++k)
          lambda[k] = dom.costates(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));

      out << t;
      for (double v : y) out << ',' << v;
      for (double v : u) out << ',' << v;
      for (double v : lambda) out << ',' << v;
      for (std::size_t i = 0; i < p.n_u; ++i) {
        double sigma = nan;
        if (costates) {
          std::vector<HyperDual> yh(y.begin(), y.end()), lh(lambda.begin(), lambda.end()), uh(u.begin(), u.end());
          uh[i].e1 = 1.0;
          sigma = hamiltonian<HyperDual>(p, yh, lh, uh, HyperDual(t)).e1;
        }
        out << ',' << sigma;
      }
      if (named_paths > 0) {
        const std::vector<double> c = p.path.real()(y, u, t);
        for (std::size_t k = 0; k < named_paths; ++k) out << ',' << c[k];
      }
      out << '\n';
    }
  }
  close_checked(out, path);
}

void export_metadata(const RunReport& report, const std::filesystem::path& path) {
  const auto& res = report.result;
  auto out = open_for_writing(path);
  out << "problem=" << report.name << '\n';
  out << "method=" << to_string(report.method) << '\n';
  out << "status=" << to_string(res.status) << '\n';
  if (!res.message.empty()) out << "message=" << res.message << '\n';
  out << "mesh_iterations=" << report.mesh_iterations() << '\n';
  out << "final_points=" << report.final_points() << '\n';
  out << "domains=" << res.solution.domains.size() << '\n';
  out << "objective=" << res.solution.objective << '\n';
  out << "mesh_error=" << (res.history.empty() ? 0.0 : res.history.back().error) << '\n';
  out << "wall_time=" << report.wall_time() << '\n';
  out << "t0=" << res.solution.t0 << '\n';
  out << "tf=" << res.solution.tf << '\n';
  if (res.linearity) {
    out << "linear_controls=";
    for (std::size_t k = 0; k < res.linearity->linear_indices.size(); ++k)
      out << (k ? "," : "") << "u" << res.linearity->linear_indices[k] + 1;
    out << '\n';
  }
  out << "switches=" << res.solution.switch_times.size() << '\n';
  for (std::size_t s = 0; s < res.solution.switch_times.size(); ++s) {
    out << "switch." << s + 1 << ".time=" << res.solution.switch_times[s] << '\n';
    if (s < res.problem.switches.size()) {
      // Components whose switching function changes sign at this estimate.
      std::string parts;
      for (const auto& e : res.estimates)
        if (e.time == res.problem.switches[s].guess) {
          if (!parts.empty()) parts += ",";
          parts += "u" + std::to_string(e.component + 1) + (e.sign_before > 0 ? "(+/-)" : "(-/+)");
        }
      out << "switch." << s + 1 << ".estimate=" << res.problem.switches[s].guess << '\n';
      out << "switch." << s + 1 << ".sigma=" << parts << '\n';
    }
  }
  close_checked(out, path);
}

void export_history(const RunReport& report, const std::filesystem::path& path) {
  auto out = open_for_writing(path);
  out << "iteration,domains,intervals,points,objective,error,wall_time,nlp_status,nlp_iterations,note\n";
  for (const auto& r : report.result.history) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out << r.iteration << ',' << r.domains << ',' << r.intervals << ',' << r.points << ',' << r.objective << ','
        << r.error << ',' << r.wall_time << ',' << to_string(r.status) << ',' << r.nlp_iterations << ",\"" << note
        << "\"\n";
  }
  close_checked(out, path);
}

}  // namespace bbmesh
