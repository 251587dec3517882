#include "bbmesh/refine.hpp"

#include "bbmesh/transcription.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace bbmesh {

namespace {

using Eigen::Index;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Values of one state component over the support points of interval k.
std::vector<double> interval_values(const DomainSolution& dom, std::size_t k, std::size_t comp) {
  const std::size_t off = dom.mesh.offset(k), n = dom.mesh.points_per_interval[k];
  std::vector<double> v(n + 1);
  for (std::size_t j = 0; j <= n; ++j) v[j] = dom.states(static_cast<Index>(off + j), static_cast<Index>(comp));
  return v;
}

}  // namespace

MeshErrors error_estimate(const CollocatedSolution& solution, const BolzaProblem& problem) {
  const std::size_t n_y = problem.n_y, n_u = problem.n_u;
  std::vector<double> scale(n_y, 0.0);
  for (const auto& dom : solution.domains)
    for (std::size_t k = 0; k < n_y; ++k)
      scale[k] = std::max(scale[k], dom.states.col(static_cast<Index>(k)).cwiseAbs().maxCoeff());
  for (auto& s : scale) s += 1.0;

  MeshErrors errors;
  for (const auto& dom : solution.domains) {
    std::vector<double> row_errors;
    for (std::size_t k = 0; k < dom.mesh.intervals(); ++k) {
      const std::size_t n = dom.mesh.points_per_interval[k], off = dom.mesh.offset(k);
      const auto rule = cached_lgr_rule(n);
      const auto fine = cached_lgr_rule(n + 1);
      const Eigen::MatrixXd integ = integration_matrix(*fine);
      const double t_a = affine_to_time(dom.mesh.boundaries[k], dom.t_start, dom.t_end);
      const double t_b = affine_to_time(dom.mesh.boundaries[k + 1], dom.t_start, dom.t_end);
      const double half = 0.5 * (t_b - t_a);

      std::vector<std::vector<double>> y_nodes(n_y);
      for (std::size_t c = 0; c < n_y; ++c) y_nodes[c] = interval_values(dom, k, c);
      const std::vector<double> u_bary = barycentric_weights(rule->nodes);
      std::vector<std::vector<double>> u_nodes(n_u, std::vector<double>(n));
      for (std::size_t i = 0; i < n_u; ++i)
        for (std::size_t j = 0; j < n; ++j)
          u_nodes[i][j] = dom.controls(static_cast<Index>(off + j), static_cast<Index>(i));

      // Interpolated state at the fine support points and dynamics at the fine nodes.
      const std::vector<double> support = fine->support();
      Eigen::MatrixXd y_interp(static_cast<Index>(n + 2), static_cast<Index>(n_y));
      Eigen::MatrixXd f(static_cast<Index>(n + 1), static_cast<Index>(n_y));
      for (std::size_t j = 0; j < support.size(); ++j) {
        std::vector<double> y(n_y), u(n_u);
        for (std::size_t c = 0; c < n_y; ++c) y[c] = interpolate(y_nodes[c], *rule, support[j]);
        for (std::size_t c = 0; c < n_y; ++c) y_interp(static_cast<Index>(j), static_cast<Index>(c)) = y[c];
        if (j == support.size() - 1) break;
        for (std::size_t i = 0; i < n_u; ++i)
          u[i] = barycentric_interpolate(rule->nodes, u_bary, u_nodes[i], support[j]);
        const double t = t_a + (support[j] + 1.0) * half;
        const std::vector<double> a = problem.dynamics.real()(y, u, t);
        for (std::size_t c = 0; c < n_y; ++c) f(static_cast<Index>(j), static_cast<Index>(c)) = half * a[c];
      }
      const Eigen::MatrixXd integrated = (integ * f).rowwise() + y_interp.row(0);
      double e = 0.0;
      for (Index j = 0; j < integrated.rows(); ++j)
        for (std::size_t c = 0; c < n_y; ++c)
          e = std::max(e, std::abs(integrated(j, static_cast<Index>(c)) - y_interp(j + 1, static_cast<Index>(c))) /
                              scale[c]);
      row_errors.push_back(e);
    }
    errors.push_back(std::move(row_errors));
  }
  return errors;
}

double max_error(const MeshErrors& errors) {
  double e = 0.0;
  for (const auto& d : errors)
    for (double v : d) e = std::max(e, v);
  return e;
}

std::vector<double> legendre_decay(const DomainSolution& domain) {
  const auto n_y = static_cast<std::size_t>(domain.states.cols());
  std::vector<double> decay;
  for (std::size_t k = 0; k < domain.mesh.intervals(); ++k) {
    const std::size_t n = domain.mesh.points_per_interval[k];
    const auto rule = cached_lgr_rule(n);
    const std::vector<double> support = rule->support();
    Eigen::MatrixXd basis(static_cast<Index>(n + 1), static_cast<Index>(n + 1));
    for (std::size_t j = 0; j <= n; ++j)
      for (std::size_t p = 0; p <= n; ++p) basis(static_cast<Index>(j), static_cast<Index>(p)) = legendre(p, support[j]);
    const auto lu = basis.partialPivLu();

    double slowest = kInfinity;
    for (std::size_t c = 0; c < n_y; ++c) {
      const std::vector<double> v = interval_values(domain, k, c);
      const Eigen::VectorXd coeff = lu.solve(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())));
      const double size = coeff.cwiseAbs().maxCoeff();
      if (coeff.tail(static_cast<Index>(n)).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + size)) continue;

      // Least-squares slope of log10 |a_p| over the last (up to) four degrees.
      const std::size_t count = std::min<std::size_t>(4, n);
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t p = n + 1 - count; p <= n; ++p) {
        const double x = static_cast<double>(p);
        const double y = std::log10(std::abs(coeff[static_cast<Index>(p)]) + 1e-300);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double m = static_cast<double>(count);
      const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      slowest = std::min(slowest, -slope);
    }
    decay.push_back(slowest);
  }
  return decay;
}

MeshLayout standard_refine(const MeshLayout& mesh, std::span<const double> errors, std::span<const double> decay,
                           double tolerance) {
  MeshLayout out;
  out.boundaries.push_back(mesh.boundaries.front());
  for (std::size_t k = 0; k < mesh.intervals(); ++k) {
    const std::size_t n = mesh.points_per_interval[k];
    const double lo = mesh.boundaries[k], hi = mesh.boundaries[k + 1];
    if (errors[k] <= tolerance) {
      out.boundaries.push_back(hi);
      out.points_per_interval.push_back(n);
      continue;
    }
    if (n < MeshLayout::max_points && decay[k] >= kFastDecay) {
      const double wanted = std::ceil(std::log10(errors[k] / tolerance) / decay[k]);
      const auto extra = static_cast<std::size_t>(std::max(1.0, wanted));
      out.boundaries.push_back(hi);
      out.points_per_interval.push_back(std::min(MeshLayout::max_points, n + extra));
    } else {
      out.boundaries.push_back(0.5 * (lo + hi));
      out.boundaries.push_back(hi);
      out.points_per_interval.push_back(MeshLayout::min_points);
      out.points_per_interval.push_back(MeshLayout::min_points);
    }
  }
  return out;
}

std::string to_string(DriveStatus s) {
  switch (s) {
    case DriveStatus::converged:
      return "converged";
    case DriveStatus::tolerance_not_met:
      return "tolerance-not-met";
    case DriveStatus::solver_failure:
      return "solver-failure";
  }
  return "unknown";
}

DriveResult drive(const BolzaProblem& problem, const DriveConfig& config) {
  DriveResult result;
  result.problem = as_single_domain(problem);
  std::vector<MeshLayout> meshes{MeshLayout::uniform(config.initial_intervals, config.initial_points)};
  std::optional<CollocatedSolution> prior;

  SolverOptions options;
  options.tolerance = config.nlp_tolerance;
  options.max_iterations = config.nlp_max_iterations;

  for (std::size_t m = 1;; ++m) {
    const auto start = std::chrono::steady_clock::now();
    MeshRecord rec;
    rec.iteration = m;
    rec.domains = meshes.size();
    for (const auto& mesh : meshes) {
      rec.intervals += mesh.intervals();
      rec.points += mesh.total_points();
    }

    const auto nlp = assemble(result.problem, meshes, prior ? &*prior : nullptr);
    const NlpResult nlp_result = solve(*nlp, options);
    rec.status = nlp_result.status;
    rec.nlp_iterations = nlp_result.iterations;
    rec.objective = nlp_result.objective;
    if (nlp_result.status != NlpStatus::converged) {
      rec.wall_time = seconds_since(start);
      rec.note = "NLP " + to_string(nlp_result.status);
      result.history.push_back(rec);
      result.status = DriveStatus::solver_failure;
      result.message = "mesh iteration " + std::to_string(m) + ": NLP " + to_string(nlp_result.status) +
                       (nlp_result.message.empty() ? "" : " (" + nlp_result.message + ")");
      if (prior) result.solution = *prior;
      return result;
    }

    CollocatedSolution solution = extract(nlp_result, *nlp);
    MeshErrors errors = error_estimate(solution, problem);
    rec.error = max_error(errors);
    if (m == 1) result.initial_solution = solution;
    result.solution = solution;
    result.errors = errors;

    auto finish = [&](DriveStatus status, std::string message) {
      rec.wall_time = seconds_since(start);
      result.history.push_back(rec);
      result.status = status;
      result.message = std::move(message);
      return result;
    };
    if (rec.error < config.mesh_tolerance) return finish(DriveStatus::converged, "");
    if (m >= config.max_mesh_iterations) {
      std::ostringstream msg;
      msg << "mesh error " << rec.error << " after " << m << " mesh iterations";
      return finish(DriveStatus::tolerance_not_met, msg.str());
    }

    bool bang_bang_step = false;
    if (m == 1 && config.bang_bang) {
      if (!solution.has_costates) {
        rec.note = "no costates; standard refinement";
      } else {
        result.linearity = detect_linearity(solution, problem);
        if (result.linearity->linear_indices.empty()) {
          rec.note = "no control-linear components";
        } else {
          try {
            result.profile = switching_functions(solution, problem, *result.linearity);
            result.estimates = estimate_discontinuities(*result.profile, solution);
            if (result.estimates.empty()) {
              rec.note = "no switching-function sign changes";
            } else {
              MultiDomainProblem mdp = build_multidomain(problem, result.estimates, *result.profile, solution);
              meshes.assign(mdp.domains(), MeshLayout::uniform(config.sub_intervals, config.sub_points));
              result.problem = std::move(mdp);
              bang_bang_step = true;
              rec.note = "bang-bang: " + std::to_string(result.problem.switches.size()) + " switches";
            }
          } catch (const RefinementAborted& e) {
            rec.note = std::string("bang-bang aborted: ") + e.what();
          }
        }
      }
    }
    if (!bang_bang_step) {
      for (std::size_t d = 0; d < meshes.size(); ++d)
        meshes[d] = standard_refine(meshes[d], errors[d], legendre_decay(solution.domains[d]), config.mesh_tolerance);
    }
    prior = solution;
    rec.wall_time = seconds_since(start);
    result.history.push_back(rec);
  }
}

}  // namespace bbmesh
