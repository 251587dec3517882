#include "bbmesh/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbmesh {

namespace {

void check_box(std::vector<Finding>& findings, const Box& box, std::size_t n, const std::string& subject) {
  if (box.lower.size() != n || box.upper.size() != n) {
    findings.push_back({subject, "expected " + std::to_string(n) + " entries"});
    return;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (box.lower[i] > box.upper[i]) {
      findings.push_back({subject, "lower bound exceeds upper bound in component " + std::to_string(i)});
      return;
    }
}

}  // namespace

std::vector<double> guess_control(const BolzaProblem& p) {
  if (!p.guess.control.empty()) return p.guess.control;
  std::vector<double> u(p.n_u, 0.0);
  for (std::size_t i = 0; i < p.n_u && i < p.control_bounds.size(); ++i) {
    const double lo = p.control_bounds.lower[i], hi = p.control_bounds.upper[i];
    if (std::isfinite(lo) && std::isfinite(hi))
      u[i] = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
      u[i] = std::max(0.0, lo);
    else if (std::isfinite(hi))
      u[i] = std::min(0.0, hi);
  }
  return u;
}

std::string to_string(NlpStatus status) {
  switch (status) {
    case NlpStatus::converged: return "converged";
    case NlpStatus::max_iterations: return "max-iterations";
    case NlpStatus::infeasible: return "infeasible";
    case NlpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

std::vector<Finding> validate(const BolzaProblem& p) {
  std::vector<Finding> findings;
  if (!p.dynamics) findings.push_back({"dynamics", "missing"});

  check_box(findings, p.control_bounds, p.n_u, "control bounds");
  check_box(findings, p.path_bounds, p.n_c, "path bounds");
  check_box(findings, p.boundary_bounds, p.n_b, "boundary bounds");
  if (p.state_bounds) check_box(findings, *p.state_bounds, p.n_y, "state bounds");
  if (p.initial_state_bounds) check_box(findings, *p.initial_state_bounds, p.n_y, "initial state bounds");
  if (p.final_state_bounds) check_box(findings, *p.final_state_bounds, p.n_y, "final state bounds");
  if (p.t0_bounds.lower > p.t0_bounds.upper) findings.push_back({"time bounds", "t0 lower exceeds upper"});
  if (p.tf_bounds.lower > p.tf_bounds.upper) findings.push_back({"time bounds", "tf lower exceeds upper"});
  if (p.t0_bounds.upper >= p.tf_bounds.lower && p.t0_bounds.upper >= p.tf_bounds.upper)
    findings.push_back({"time bounds", "t0 cannot precede tf"});

  if (p.guess.initial_state.size() != p.n_y || p.guess.final_state.size() != p.n_y) {
    findings.push_back({"guess", "state guesses must have n_y entries"});
    return findings;
  }
  const auto u = guess_control(p);
  if (u.size() != p.n_u) {
    findings.push_back({"guess", "control guess must have n_u entries"});
    return findings;
  }
  const std::span<const double> y0(p.guess.initial_state), yf(p.guess.final_state), us(u);
  const double t0 = p.guess.t0, tf = p.guess.tf;
  try {
    if (p.dynamics && p.dynamics(y0, us, t0).size() != p.n_y)
      findings.push_back({"dynamics", "returned wrong number of components, expected " + std::to_string(p.n_y)});
    if (p.n_c > 0 && !p.path) findings.push_back({"path", "n_c > 0 but no path function"});
    if (p.path && p.path(y0, us, t0).size() != p.n_c)
      findings.push_back({"path", "returned wrong number of components, expected " + std::to_string(p.n_c)});
    if (p.n_b > 0 && !p.boundary) findings.push_back({"boundary", "n_b > 0 but no boundary function"});
    if (p.boundary && p.boundary(y0, t0, yf, tf).size() != p.n_b)
      findings.push_back({"boundary", "returned wrong number of components, expected " + std::to_string(p.n_b)});
    if (p.lagrangian) (void)p.lagrangian(y0, us, t0);
    if (p.mayer) (void)p.mayer(y0, t0, yf, tf);
  } catch (const EvaluationError& e) {
    findings.push_back({e.function(), std::string("evaluation failed at guess: ") + e.what()});
  }
  return findings;
}

MultiDomainProblem as_single_domain(const BolzaProblem& problem) {
  MultiDomainProblem mdp;
  mdp.base = problem;
  mdp.control_modes.assign(1, std::vector<ControlMode>(problem.n_u, ControlMode::free));
  return mdp;
}

Box MultiDomainProblem::control_box(std::size_t d) const {
  Box box = base.control_bounds;
  for (std::size_t i = 0; i < base.n_u; ++i) {
    if (control_modes[d][i] == ControlMode::at_lower) box.upper[i] = box.lower[i];
    if (control_modes[d][i] == ControlMode::at_upper) box.lower[i] = box.upper[i];
  }
  return box;
}

void MultiDomainProblem::validate() const {
  if (control_modes.size() != domains()) throw std::invalid_argument("control modes must be given for every domain");
  for (std::size_t d = 0; d < domains(); ++d) {
    if (control_modes[d].size() != base.n_u) throw std::invalid_argument("control modes must cover every component");
    for (std::size_t i = 0; i < base.n_u; ++i)
      if (control_modes[d][i] != ControlMode::free &&
          !std::isfinite(control_modes[d][i] == ControlMode::at_lower ? base.control_bounds.lower[i]
                                                                      : base.control_bounds.upper[i]))
        throw std::invalid_argument("cannot pin a control to an infinite limit");
  }
  for (std::size_t s = 0; s < switches.size(); ++s) {
    const auto& sw = switches[s];
    if (!(sw.lower <= sw.guess && sw.guess <= sw.upper))
      throw std::invalid_argument("switch guess outside its bracket");
    if (s + 1 < switches.size() && sw.upper > switches[s + 1].lower)
      throw std::invalid_argument("switch brackets overlap");
    if (sw.lower < base.t0_bounds.upper || sw.upper > base.tf_bounds.lower)
      throw std::invalid_argument("switch bracket leaves (t0, tf)");
  }
}

std::size_t CollocatedSolution::total_points() const {
  std::size_t n = 0;
  for (const auto& d : domains) n += d.mesh.total_points();
  return n;
}

std::vector<MeshLayout> CollocatedSolution::meshes() const {
  std::vector<MeshLayout> out;
  for (const auto& d : domains) out.push_back(d.mesh);
  return out;
}

std::size_t CollocatedSolution::domain_of(double t) const {
  for (std::size_t d = 0; d + 1 < domains.size(); ++d)
    if (t < domains[d].t_end) return d;
  return domains.size() - 1;
}

std::vector<double> CollocatedSolution::state_at(double t) const {
  const auto& dom = domains[domain_of(t)];
  const double tau = std::clamp(dom.t_end > dom.t_start ? affine_to_tau(t, dom.t_start, dom.t_end) : -1.0, -1.0, 1.0);
  const auto& mesh = dom.mesh;
  std::size_t k = 0;
  while (k + 1 < mesh.intervals() && tau >= mesh.boundaries[k + 1]) ++k;
  const auto rule = cached_lgr_rule(mesh.points_per_interval[k]);
  const double lo = mesh.boundaries[k], hi = mesh.boundaries[k + 1];
  const double local = std::clamp(2.0 * (tau - lo) / (hi - lo) - 1.0, -1.0, 1.0);
  const std::size_t base = mesh.offset(k);
  const std::size_t n = rule->order;
  std::vector<double> out(static_cast<std::size_t>(dom.states.cols()));
  std::vector<double> column(n + 1);
  for (std::size_t c = 0; c < out.size(); ++c) {
    for (std::size_t j = 0; j <= n; ++j)
      column[j] = dom.states(static_cast<Eigen::Index>(base + j), static_cast<Eigen::Index>(c));
    out[c] = interpolate(column, *rule, local);
  }
  return out;
}

std::vector<double> CollocatedSolution::control_at(double t) const {
  const auto& dom = domains[domain_of(t)];
  const auto rows = static_cast<std::size_t>(dom.controls.rows());
  std::vector<double> out(static_cast<std::size_t>(dom.controls.cols()));
  auto row = [&](std::size_t r) {
    for (std::size_t c = 0; c < out.size(); ++c)
      out[c] = dom.controls(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    return out;
  };
  if (t <= dom.times.front()) return row(0);
  if (t >= dom.times[rows - 1]) return row(rows - 1);
  std::size_t r = 0;
  while (r + 2 < rows && t >= dom.times[r + 1]) ++r;
  const double s = (t - dom.times[r]) / (dom.times[r + 1] - dom.times[r]);
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c] = (1.0 - s) * dom.controls(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +
             s * dom.controls(static_cast<Eigen::Index>(r + 1), static_cast<Eigen::Index>(c));
  return out;
}

}  // namespace bbmesh
