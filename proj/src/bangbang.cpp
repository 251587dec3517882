#include "bbmesh/bangbang.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bbmesh {

namespace {

constexpr double kCurvatureTolerance = 1e-10;
constexpr double kSpreadTolerance = 1e-8;
constexpr double kZeroTolerance = 1e-8;
// Longest run of numerically-zero sigma values still read as a root rather
// than as a possible singular arc.
constexpr std::size_t kMaxRootRun = 2;

struct PointData {
  std::vector<double> y, lambda, u;
  double t = 0.0;
};

PointData point_data(const DomainSolution& dom, std::size_t l) {
  PointData p;
  const auto n_y = static_cast<std::size_t>(dom.states.cols());
  const auto n_u = static_cast<std::size_t>(dom.controls.cols());
  p.y.resize(n_y);
  p.lambda.resize(n_y);
  p.u.resize(n_u);
  const auto r = static_cast<Eigen::Index>(l);
  for (std::size_t k = 0; k < n_y; ++k) {
    p.y[k] = dom.states(r, static_cast<Eigen::Index>(k));
    p.lambda[k] = dom.costates(r, static_cast<Eigen::Index>(k));
  }
  for (std::size_t i = 0; i < n_u; ++i) p.u[i] = dom.controls(r, static_cast<Eigen::Index>(i));
  p.t = dom.times[l];
  return p;
}

// H with control components i and j seeded in e1 and e2.
HyperDual probe(const BolzaProblem& problem, const PointData& p, std::span<const double> u, std::size_t i,
                std::size_t j) {
  std::vector<HyperDual> y(p.y.begin(), p.y.end()), lambda(p.lambda.begin(), p.lambda.end());
  std::vector<HyperDual> uh(u.begin(), u.end());
  uh[i].e1 = 1.0;
  uh[j].e2 = 1.0;
  const HyperDual t(p.t);
  return hamiltonian<HyperDual>(problem, y, lambda, uh, t);
}

void require_costates(const CollocatedSolution& solution) {
  if (!solution.has_costates) throw std::invalid_argument("solution carries no costate estimates");
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

bool LinearityReport::is_linear(std::size_t i) const {
  return std::find(linear_indices.begin(), linear_indices.end(), i) != linear_indices.end();
}

LinearityReport detect_linearity(const CollocatedSolution& solution, const BolzaProblem& problem) {
  require_costates(solution);
  const std::size_t n_u = problem.n_u;
  LinearityReport report;
  report.evidence.assign(n_u, 0.0);
  std::vector<bool> linear(n_u, true);
  for (std::size_t i = 0; i < n_u; ++i) {
    const double lo = problem.control_bounds.lower[i], hi = problem.control_bounds.upper[i];
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      linear[i] = false;
      report.evidence[i] = kInfinity;
      report.warnings.push_back("control " + std::to_string(i) + " has an unbounded box; not probed");
    }
  }

  for (const auto& dom : solution.domains) {
    for (std::size_t l = 0; l < static_cast<std::size_t>(dom.controls.rows()); ++l) {
      const PointData p = point_data(dom, l);
      for (std::size_t i = 0; i < n_u; ++i) {
        if (!linear[i]) continue;
        const double lo = problem.control_bounds.lower[i], hi = problem.control_bounds.upper[i];
        double g_min = kInfinity, g_max = -kInfinity;
        for (double s : {lo, 0.5 * (lo + hi), hi}) {
          std::vector<double> u = p.u;
          u[i] = s;
          const HyperDual h = probe(problem, p, u, i, i);
          const double scale = 1.0 + std::abs(h.real);
          g_min = std::min(g_min, h.e1);
          g_max = std::max(g_max, h.e1);
          bool flat = std::abs(h.e12) <= kCurvatureTolerance * scale;
          for (std::size_t j = 0; j < n_u && flat; ++j)
            if (j != i) flat = std::abs(probe(problem, p, u, i, j).e12) <= kCurvatureTolerance * scale;
          if (!flat) linear[i] = false;
        }
        const double spread = (g_max - g_min) / (1.0 + std::max(std::abs(g_min), std::abs(g_max)));
        report.evidence[i] = std::max(report.evidence[i], spread);
        if (spread > kSpreadTolerance) linear[i] = false;
      }
    }
  }
  for (std::size_t i = 0; i < n_u; ++i) (linear[i] ? report.linear_indices : report.nonlinear_indices).push_back(i);
  return report;
}

std::size_t SwitchingProfile::slot(std::size_t i) const {
  const auto it = std::find(components.begin(), components.end(), i);
  if (it == components.end()) throw std::out_of_range("control " + std::to_string(i) + " has no switching function");
  return static_cast<std::size_t>(it - components.begin());
}

int SwitchingProfile::sign(std::size_t c, std::size_t d, std::size_t l) const {
  const double v = sigma[c][d][l];
  return std::abs(v) < zero_level[c] ? 0 : sign_of(v);
}

SwitchingProfile switching_functions(const CollocatedSolution& solution, const BolzaProblem& problem,
                                     const LinearityReport& report) {
  require_costates(solution);
  if (report.linear_indices.empty()) throw std::invalid_argument("no control-linear components");
  SwitchingProfile profile;
  profile.components = report.linear_indices;
  profile.sigma.resize(profile.components.size());
  profile.zero_level.resize(profile.components.size());
  for (std::size_t c = 0; c < profile.components.size(); ++c) {
    const std::size_t i = profile.components[c];
    profile.sigma[c].resize(solution.domains.size());
    double peak = 0.0;
    for (std::size_t d = 0; d < solution.domains.size(); ++d) {
      const auto& dom = solution.domains[d];
      const auto n = static_cast<std::size_t>(dom.controls.rows());
      auto& s = profile.sigma[c][d];
      s.resize(n);
      for (std::size_t l = 0; l < n; ++l) {
        const PointData p = point_data(dom, l);
        s[l] = probe(problem, p, p.u, i, i).e1;
        peak = std::max(peak, std::abs(s[l]));
      }
    }
    profile.zero_level[c] = kZeroTolerance * (1.0 + peak);

    for (std::size_t d = 0; d < solution.domains.size(); ++d) {
      const auto& mesh = solution.domains[d].mesh;
      const std::size_t n = profile.sigma[c][d].size();
      auto interval_of = [&](std::size_t l) {
        std::size_t k = 0;
        while (k + 1 < mesh.intervals() && l >= mesh.offset(k + 1)) ++k;
        return k;
      };
      for (std::size_t l = 0; l + 1 < n; ++l) {
        const int a = profile.sign(c, d, l);
        if (a == 0) continue;
        std::size_t next = l + 1;
        while (profile.sign(c, d, next) == 0 && next + 1 < n && next - l <= kMaxRootRun) ++next;
        const int b = profile.sign(c, d, next);
        if (a * b >= 0) continue;
        const std::size_t k = interval_of(l);
        profile.changes.push_back({i, d, k, l, next, interval_of(next) != k});
      }
    }
  }
  return profile;
}

std::vector<DiscontinuityEstimate> estimate_discontinuities(const SwitchingProfile& profile,
                                                            const CollocatedSolution& solution) {
  for (std::size_t c = 0; c < profile.components.size(); ++c)
    for (std::size_t d = 0; d < profile.sigma[c].size(); ++d) {
      std::size_t run = 0;
      for (std::size_t l = 0; l < profile.sigma[c][d].size(); ++l) {
        run = profile.sign(c, d, l) == 0 ? run + 1 : 0;
        if (run > kMaxRootRun)
          throw RefinementAborted("switching function of control " + std::to_string(profile.components[c]) +
                                  " vanishes on consecutive points near t = " +
                                  std::to_string(solution.domains[d].times[l]) + " (possible singular arc)");
      }
    }

  std::vector<DiscontinuityEstimate> estimates;
  for (const SignChange& ch : profile.changes) {
    const auto& dom = solution.domains[ch.domain];
    const std::size_t c = profile.slot(ch.component);
    const double t_a = dom.times[ch.point], t_b = dom.times[ch.next];
    DiscontinuityEstimate e;
    e.component = ch.component;
    e.sign_before = profile.sign(c, ch.domain, ch.point);
    e.sign_after = profile.sign(c, ch.domain, ch.next);
    if (ch.across_boundary) {
      e.source = EstimateSource::interval_boundary;
      e.time = dom.times[dom.mesh.offset(ch.interval + 1)];  // mesh point T_k
    } else {
      const std::size_t first = dom.mesh.offset(ch.interval);
      const std::size_t last = first + dom.mesh.points_per_interval[ch.interval];
      const auto col = static_cast<Eigen::Index>(ch.component);
      std::size_t jump = first;
      double largest = -1.0;
      for (std::size_t l = first; l + 1 < last; ++l) {
        const double diff =
            std::abs(dom.controls(static_cast<Eigen::Index>(l + 1), col) - dom.controls(static_cast<Eigen::Index>(l), col));
        if (diff > largest) {
          largest = diff;
          jump = l;
        }
      }
      // Collocation points sitting on the root are their own best estimate.
      const double t_sigma =
          ch.through_zero() ? 0.5 * (dom.times[ch.point + 1] + dom.times[ch.next - 1]) : 0.5 * (t_a + t_b);
      const double t_u = 0.5 * (dom.times[jump] + dom.times[jump + 1]);
      e.time = combine_estimate(t_sigma, t_u);
    }
    e.window_start = std::min(t_a, e.time);
    e.window_end = std::max(t_b, e.time);
    estimates.push_back(e);
  }
  std::stable_sort(estimates.begin(), estimates.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });

  // Brackets run to the midpoints between neighbouring distinct times.
  std::vector<double> times;
  for (const auto& e : estimates)
    if (times.empty() || e.time != times.back()) times.push_back(e.time);
  for (auto& e : estimates) {
    const auto s = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), e.time) - times.begin());
    e.lower = s == 0 ? solution.t0 : 0.5 * (times[s - 1] + times[s]);
    e.upper = s + 1 == times.size() ? solution.tf : 0.5 * (times[s] + times[s + 1]);
  }
  return estimates;
}

MultiDomainProblem build_multidomain(const BolzaProblem& problem, const std::vector<DiscontinuityEstimate>& estimates,
                                     const SwitchingProfile& profile, const CollocatedSolution& solution) {
  if (estimates.empty()) throw std::invalid_argument("no discontinuity estimates");
  MultiDomainProblem mdp;
  mdp.base = problem;

  // One switch per distinct estimate time.
  for (const auto& e : estimates) {
    if (!mdp.switches.empty() && e.time == mdp.switches.back().guess) continue;
    if (!mdp.switches.empty() && e.time < mdp.switches.back().guess)
      throw std::invalid_argument("discontinuity estimates must be sorted");
    mdp.switches.push_back({e.time, e.lower, e.upper});
  }

  // With a free initial or final time the outer brackets end halfway to the
  // current endpoint, and the endpoint box is tightened so the domains stay ordered.
  auto& first = mdp.switches.front();
  auto& last = mdp.switches.back();
  if (!problem.t0_bounds.fixed()) {
    first.lower = 0.5 * (solution.t0 + first.guess);
    mdp.base.t0_bounds.upper = std::min(mdp.base.t0_bounds.upper, first.lower);
  }
  if (!problem.tf_bounds.fixed()) {
    last.upper = 0.5 * (last.guess + solution.tf);
    mdp.base.tf_bounds.lower = std::max(mdp.base.tf_bounds.lower, last.upper);
  }
  mdp.base.guess.t0 = solution.t0;
  mdp.base.guess.tf = solution.tf;

  const std::size_t q = mdp.domains();
  std::vector<double> edges{solution.t0};
  for (const auto& s : mdp.switches) edges.push_back(s.guess);
  edges.push_back(solution.tf);

  mdp.control_modes.assign(q, std::vector<ControlMode>(problem.n_u, ControlMode::free));
  for (std::size_t c = 0; c < profile.components.size(); ++c) {
    const std::size_t i = profile.components[c];
    std::vector<const DiscontinuityEstimate*> own;
    for (const auto& e : estimates)
      if (e.component == i) own.push_back(&e);

    int initial = 0;
    if (!own.empty()) {
      initial = own.front()->sign_before;
    } else {
      for (std::size_t d = 0; d < profile.sigma[c].size(); ++d)
        for (std::size_t l = 0; l < profile.sigma[c][d].size(); ++l)
          if (initial == 0) initial = profile.sign(c, d, l);
    }

    for (std::size_t d = 0; d < q; ++d) {
      int sign = initial;
      for (const auto* e : own)
        if (e->time <= edges[d]) sign = e->sign_after;

      // Every collocation point clearly inside the domain must agree.
      for (std::size_t dd = 0; dd < solution.domains.size(); ++dd) {
        const auto& dom = solution.domains[dd];
        for (std::size_t l = 0; l < profile.sigma[c][dd].size(); ++l) {
          const double t = dom.times[l];
          if (t < edges[d] || t >= edges[d + 1]) continue;
          const bool in_window = std::any_of(own.begin(), own.end(), [t](const DiscontinuityEstimate* e) {
            return t >= e->window_start && t <= e->window_end;
          });
          if (in_window) continue;
          const int here = profile.sign(c, dd, l);
          if (here != 0 && here != sign)
            throw RefinementAborted("switching function of control " + std::to_string(i) +
                                    " changes sign inside domain " + std::to_string(d) + " near t = " +
                                    std::to_string(t));
        }
      }
      if (sign == 0) throw RefinementAborted("no switching-function sign for control " + std::to_string(i));
      mdp.control_modes[d][i] = sign > 0 ? ControlMode::at_lower : ControlMode::at_upper;
    }
  }
  mdp.validate();
  return mdp;
}

}  // namespace bbmesh
