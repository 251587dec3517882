#include "bbmesh/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bbmesh {

namespace {

using Eigen::Index;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr long kObjectiveRow = -1;

/// Variables and values of one local block plus the rows its outputs feed.
struct Block {
  std::vector<std::size_t> vars;  // kNone marks a constant entry
  std::vector<double> z;
  std::vector<long> rows;         // kObjectiveRow for the cost contribution
};

std::string indexed(const std::string& stem, std::initializer_list<std::size_t> idx) {
  std::string s = stem + "[";
  bool first = true;
  for (auto i : idx) {
    if (!first) s += ",";
    s += std::to_string(i);
    first = false;
  }
  return s + "]";
}

}  // namespace

DomainGrid make_grid(const MeshLayout& mesh) {
  mesh.validate();
  DomainGrid g;
  g.mesh = mesh;
  const std::size_t n = mesh.total_points();
  g.taus.resize(n + 1);
  g.weights.resize(n);
  g.diff = Eigen::MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(n + 1));
  for (std::size_t k = 0; k < mesh.intervals(); ++k) {
    const auto rule = cached_lgr_rule(mesh.points_per_interval[k]);
    const auto dref = diff_matrix(*rule);
    const double lo = mesh.boundaries[k], hi = mesh.boundaries[k + 1];
    const double half = 0.5 * (hi - lo);
    const std::size_t off = mesh.offset(k);
    for (std::size_t j = 0; j < rule->order; ++j) {
      g.taus[off + j] = lo + (rule->nodes[j] + 1.0) * half;
      g.weights[off + j] = rule->weights[j] * half;
    }
    for (std::size_t l = 0; l < rule->order; ++l)
      for (std::size_t j = 0; j <= rule->order; ++j)
        g.diff(static_cast<Index>(off + l), static_cast<Index>(off + j)) =
            dref(static_cast<Index>(l), static_cast<Index>(j)) / half;
  }
  g.taus[0] = -1.0;
  g.taus[n] = 1.0;
  return g;
}

CollocationNlp::CollocationNlp(MultiDomainProblem mdp, std::vector<MeshLayout> meshes) : mdp_(std::move(mdp)) {
  mdp_.validate();
  const auto& p = mdp_.base;
  const std::size_t q = mdp_.domains();
  if (meshes.size() != q) throw std::invalid_argument("one mesh is required per domain");
  for (const auto& m : meshes) grids_.push_back(make_grid(m));

  auto& L = layout_;
  L.n_y = p.n_y;
  L.n_u = p.n_u;
  L.n_c = p.n_c;
  L.n_b = p.n_b;
  std::size_t pt = 0, cp = 0;
  for (const auto& g : grids_) {
    const std::size_t n = g.mesh.total_points();
    L.points.push_back(n);
    L.point_offset.push_back(pt);
    L.control_row.push_back(cp);
    pt += n;
    cp += n;
  }
  L.state_points = pt + 1;
  L.control_points = cp;

  // Boundary times: t0, switches, tf.
  std::size_t next = L.state_points * L.n_y + L.control_points * L.n_u;
  L.time_index.assign(q + 1, std::nullopt);
  L.time_value.assign(q + 1, 0.0);
  std::vector<Range> time_box(q + 1);
  time_box[0] = p.t0_bounds;
  time_box[q] = p.tf_bounds;
  for (std::size_t s = 0; s + 1 < q; ++s) time_box[s + 1] = {mdp_.switches[s].lower, mdp_.switches[s].upper};
  std::vector<std::size_t> order;
  order.push_back(0);
  order.push_back(q);
  for (std::size_t s = 1; s < q; ++s) order.push_back(s);
  for (std::size_t i : order) {
    if (time_box[i].fixed())
      L.time_value[i] = time_box[i].lower;
    else
      L.time_index[i] = next++;
  }
  L.num_variables = next;

  std::size_t row = 0;
  for (std::size_t d = 0; d < q; ++d) {
    L.row_offset.push_back(row);
    row += L.points[d] * (L.n_y + L.n_c);
  }
  L.boundary_offset = row;
  L.num_constraints = row + L.n_b;

  x_lower.assign(L.num_variables, -kInfinity);
  x_upper.assign(L.num_variables, kInfinity);
  x_initial.assign(L.num_variables, 0.0);
  variable_names.resize(L.num_variables);
  g_lower.assign(L.num_constraints, 0.0);
  g_upper.assign(L.num_constraints, 0.0);
  constraint_names.resize(L.num_constraints);

  for (std::size_t gp = 0; gp < L.state_points; ++gp)
    for (std::size_t k = 0; k < L.n_y; ++k) {
      const std::size_t v = gp * L.n_y + k;
      variable_names[v] = indexed("y", {gp, k});
      double lo = -kInfinity, hi = kInfinity;
      if (p.state_bounds) {
        lo = p.state_bounds->lower[k];
        hi = p.state_bounds->upper[k];
      }
      if (gp == 0 && p.initial_state_bounds) {
        lo = std::max(lo, p.initial_state_bounds->lower[k]);
        hi = std::min(hi, p.initial_state_bounds->upper[k]);
      }
      if (gp + 1 == L.state_points && p.final_state_bounds) {
        lo = std::max(lo, p.final_state_bounds->lower[k]);
        hi = std::min(hi, p.final_state_bounds->upper[k]);
      }
      x_lower[v] = lo;
      x_upper[v] = hi;
    }
  for (std::size_t d = 0; d < q; ++d) {
    const Box box = mdp_.control_box(d);
    for (std::size_t l = 0; l < L.points[d]; ++l)
      for (std::size_t i = 0; i < L.n_u; ++i) {
        const std::size_t v = L.control(d, l, i);
        variable_names[v] = indexed("u", {d, l, i});
        x_lower[v] = box.lower[i];
        x_upper[v] = box.upper[i];
      }
  }
  for (std::size_t i = 0; i <= q; ++i)
    if (L.time_index[i]) {
      const std::size_t v = *L.time_index[i];
      variable_names[v] = i == 0 ? "t0" : i == q ? "tf" : indexed("ts", {i});
      x_lower[v] = time_box[i].lower;
      x_upper[v] = time_box[i].upper;
    }

  for (std::size_t d = 0; d < q; ++d)
    for (std::size_t l = 0; l < L.points[d]; ++l) {
      for (std::size_t k = 0; k < L.n_y; ++k) constraint_names[L.defect_row(d, l, k)] = indexed("defect", {d, l, k});
      for (std::size_t c = 0; c < L.n_c; ++c) {
        const std::size_t r = L.path_row(d, l, c);
        constraint_names[r] = indexed("path", {d, l, c});
        g_lower[r] = p.path_bounds.lower[c];
        g_upper[r] = p.path_bounds.upper[c];
      }
    }
  for (std::size_t b = 0; b < L.n_b; ++b) {
    const std::size_t r = L.boundary_row(b);
    constraint_names[r] = indexed("boundary", {b});
    g_lower[r] = p.boundary_bounds.lower[b];
    g_upper[r] = p.boundary_bounds.upper[b];
  }
}

double CollocationNlp::time(std::span<const double> x, std::size_t i) const {
  return layout_.time_index[i] ? x[*layout_.time_index[i]] : layout_.time_value[i];
}

std::vector<std::size_t> CollocationNlp::block_variables(std::size_t d, std::size_t l) const {
  const auto& L = layout_;
  std::vector<std::size_t> vars;
  auto time_var = [&](std::size_t i) { return L.time_index[i] ? *L.time_index[i] : kNone; };
  if (d == L.domains()) {
    for (std::size_t k = 0; k < L.n_y; ++k) vars.push_back(L.state(0, 0, k));
    vars.push_back(time_var(0));
    for (std::size_t k = 0; k < L.n_y; ++k) vars.push_back(L.state(d - 1, L.points[d - 1], k));
    vars.push_back(time_var(d));
    return vars;
  }
  for (std::size_t k = 0; k < L.n_y; ++k) vars.push_back(L.state(d, l, k));
  for (std::size_t i = 0; i < L.n_u; ++i) vars.push_back(L.control(d, l, i));
  vars.push_back(time_var(d));
  vars.push_back(time_var(d + 1));
  return vars;
}

namespace {

Block make_block(const CollocationNlp& nlp, std::span<const double> x, std::size_t d, std::size_t l) {
  const auto& L = nlp.layout();
  Block b;
  b.vars = nlp.block_variables(d, l);
  b.z.resize(b.vars.size());
  for (std::size_t i = 0; i < b.vars.size(); ++i) b.z[i] = b.vars[i] == kNone ? 0.0 : x[b.vars[i]];
  if (d == L.domains()) {
    b.z[L.n_y] = nlp.time(x, 0);
    b.z[2 * L.n_y + 1] = nlp.time(x, d);
    b.rows.push_back(kObjectiveRow);
    for (std::size_t r = 0; r < L.n_b; ++r) b.rows.push_back(static_cast<long>(L.boundary_row(r)));
  } else {
    b.z[L.n_y + L.n_u] = nlp.time(x, d);
    b.z[L.n_y + L.n_u + 1] = nlp.time(x, d + 1);
    b.rows.push_back(kObjectiveRow);
    for (std::size_t k = 0; k < L.n_y; ++k) b.rows.push_back(static_cast<long>(L.defect_row(d, l, k)));
    for (std::size_t c = 0; c < L.n_c; ++c) b.rows.push_back(static_cast<long>(L.path_row(d, l, c)));
  }
  return b;
}

// Outputs of a block in the order of Block::rows.
template <typename T>
std::vector<T> eval_block(const CollocationNlp& nlp, std::size_t d, std::size_t l, std::span<const T> z) {
  const auto& L = nlp.layout();
  const auto& p = nlp.problem().base;
  std::vector<T> out;
  if (d == L.domains()) {
    const auto y0 = z.subspan(0, L.n_y);
    const T& t0 = z[L.n_y];
    const auto yf = z.subspan(L.n_y + 1, L.n_y);
    const T& tf = z[2 * L.n_y + 1];
    out.push_back(p.mayer ? p.mayer(y0, t0, yf, tf) : T(0.0));
    if (L.n_b > 0) {
      const auto b = p.boundary(y0, t0, yf, tf);
      out.insert(out.end(), b.begin(), b.end());
    }
    return out;
  }
  const auto y = z.subspan(0, L.n_y);
  const auto u = z.subspan(L.n_y, L.n_u);
  const T& ts = z[L.n_y + L.n_u];
  const T& te = z[L.n_y + L.n_u + 1];
  const auto& grid = nlp.grids()[d];
  const T h = 0.5 * (te - ts);
  const T t = ts + (grid.taus[l] + 1.0) * h;
  out.reserve(1 + L.n_y + L.n_c);
  out.push_back(p.lagrangian ? grid.weights[l] * h * p.lagrangian(y, u, t) : T(0.0));
  const auto a = p.dynamics(y, u, t);
  for (std::size_t k = 0; k < L.n_y; ++k) out.push_back(-h * a[k]);
  if (L.n_c > 0) {
    const auto c = p.path(y, u, t);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

template <typename F>
void for_each_block(const CollocationNlp& nlp, F&& f) {
  const auto& L = nlp.layout();
  for (std::size_t d = 0; d < L.domains(); ++d)
    for (std::size_t l = 0; l < L.points[d]; ++l) f(d, l);
  f(L.domains(), 0);
}

std::vector<HyperDual> lift_block(const Block& b) { return {b.z.begin(), b.z.end()}; }

}  // namespace

double CollocationNlp::objective(std::span<const double> x) const {
  double f = 0.0;
  for_each_block(*this, [&](std::size_t d, std::size_t l) {
    const Block b = make_block(*this, x, d, l);
    f += eval_block<double>(*this, d, l, b.z)[0];
  });
  return f;
}

void CollocationNlp::constraints(std::span<const double> x, std::span<double> g) const {
  std::fill(g.begin(), g.end(), 0.0);
  const auto& L = layout_;
  for (std::size_t d = 0; d < L.domains(); ++d) {
    const auto& D = grids_[d].diff;
    for (Index l = 0; l < D.rows(); ++l)
      for (Index j = 0; j < D.cols(); ++j) {
        const double v = D(l, j);
        if (v == 0.0) continue;
        for (std::size_t k = 0; k < L.n_y; ++k)
          g[L.defect_row(d, static_cast<std::size_t>(l), k)] += v * x[L.state(d, static_cast<std::size_t>(j), k)];
      }
  }
  for_each_block(*this, [&](std::size_t d, std::size_t l) {
    const Block b = make_block(*this, x, d, l);
    const auto out = eval_block<double>(*this, d, l, b.z);
    for (std::size_t r = 1; r < out.size(); ++r) g[static_cast<std::size_t>(b.rows[r])] += out[r];
  });
}

void CollocationNlp::gradient(std::span<const double> x, std::span<double> grad) const {
  std::fill(grad.begin(), grad.end(), 0.0);
  for_each_block(*this, [&](std::size_t d, std::size_t l) {
    const Block b = make_block(*this, x, d, l);
    auto z = lift_block(b);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (b.vars[i] == kNone) continue;
      z[i].e1 = 1.0;
      const auto out = eval_block<HyperDual>(*this, d, l, z);
      z[i].e1 = 0.0;
      grad[b.vars[i]] += out[0].e1;
    }
  });
}

void CollocationNlp::jacobian(std::span<const double> x, Eigen::MatrixXd& jac) const {
  const auto& L = layout_;
  jac.setZero(static_cast<Index>(L.num_constraints), static_cast<Index>(L.num_variables));
  for (std::size_t d = 0; d < L.domains(); ++d) {
    const auto& D = grids_[d].diff;
    for (Index l = 0; l < D.rows(); ++l)
      for (Index j = 0; j < D.cols(); ++j) {
        const double v = D(l, j);
        if (v == 0.0) continue;
        for (std::size_t k = 0; k < L.n_y; ++k)
          jac(static_cast<Index>(L.defect_row(d, static_cast<std::size_t>(l), k)),
              static_cast<Index>(L.state(d, static_cast<std::size_t>(j), k))) += v;
      }
  }
  for_each_block(*this, [&](std::size_t d, std::size_t l) {
    const Block b = make_block(*this, x, d, l);
    auto z = lift_block(b);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (b.vars[i] == kNone) continue;
      z[i].e1 = 1.0;
      const auto out = eval_block<HyperDual>(*this, d, l, z);
      z[i].e1 = 0.0;
      for (std::size_t r = 1; r < out.size(); ++r)
        jac(static_cast<Index>(b.rows[r]), static_cast<Index>(b.vars[i])) += out[r].e1;
    }
  });
}

void CollocationNlp::hessian(std::span<const double> x, double objective_factor, std::span<const double> lambda,
                             Eigen::MatrixXd& hess) const {
  const auto n = static_cast<Index>(layout_.num_variables);
  hess.setZero(n, n);
  for_each_block(*this, [&](std::size_t d, std::size_t l) {
    const Block b = make_block(*this, x, d, l);
    auto z = lift_block(b);
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (b.vars[i] == kNone) continue;
      for (std::size_t j = i; j < z.size(); ++j) {
        if (b.vars[j] == kNone) continue;
        z[i].e1 = 1.0;
        z[j].e2 = 1.0;
        const auto out = eval_block<HyperDual>(*this, d, l, z);
        z[i].e1 = 0.0;
        z[j].e2 = 0.0;
        double v = objective_factor * out[0].e12;
        for (std::size_t r = 1; r < out.size(); ++r) v += lambda[static_cast<std::size_t>(b.rows[r])] * out[r].e12;
        if (v == 0.0) continue;
        const auto vi = static_cast<Index>(b.vars[i]), vj = static_cast<Index>(b.vars[j]);
        hess(vi, vj) += v;
        if (vi != vj) hess(vj, vi) += v;
      }
    }
  });
}

std::unique_ptr<CollocationNlp> assemble(const MultiDomainProblem& mdp, const std::vector<MeshLayout>& meshes,
                                         const CollocatedSolution* prior) {
  auto nlp = std::make_unique<CollocationNlp>(mdp, meshes);
  const auto& L = nlp->layout();
  const auto& p = mdp.base;
  const std::size_t q = mdp.domains();

  std::vector<double> ts(q + 1);
  ts[0] = prior ? prior->t0 : p.guess.t0;
  ts[q] = prior ? prior->tf : p.guess.tf;
  ts[0] = std::clamp(ts[0], p.t0_bounds.lower, p.t0_bounds.upper);
  ts[q] = std::clamp(ts[q], p.tf_bounds.lower, p.tf_bounds.upper);
  for (std::size_t s = 0; s + 1 < q; ++s) ts[s + 1] = mdp.switches[s].guess;

  auto& x = nlp->x_initial;
  for (std::size_t i = 0; i <= q; ++i)
    if (L.time_index[i]) x[*L.time_index[i]] = ts[i];

  const double g0 = p.guess.t0, g1 = p.guess.tf;
  const auto u_default = guess_control(p);
  for (std::size_t d = 0; d < q; ++d) {
    const auto& grid = nlp->grids()[d];
    for (std::size_t j = 0; j <= L.points[d]; ++j) {
      const double t = affine_to_time(grid.taus[j], ts[d], ts[d + 1]);
      std::vector<double> y(L.n_y);
      if (prior) {
        y = prior->state_at(t);
      } else {
        const double s = g1 > g0 ? std::clamp((t - g0) / (g1 - g0), 0.0, 1.0) : 0.0;
        for (std::size_t k = 0; k < L.n_y; ++k)
          y[k] = (1.0 - s) * p.guess.initial_state[k] + s * p.guess.final_state[k];
      }
      for (std::size_t k = 0; k < L.n_y; ++k) x[L.state(d, j, k)] = y[k];
      if (j == L.points[d]) continue;
      const auto u = prior ? prior->control_at(t) : u_default;
      for (std::size_t i = 0; i < L.n_u; ++i) x[L.control(d, j, i)] = u[i];
    }
  }
  for (std::size_t v = 0; v < L.num_variables; ++v) x[v] = std::clamp(x[v], nlp->x_lower[v], nlp->x_upper[v]);
  return nlp;
}

Eigen::MatrixXd costates_from_multipliers(const Eigen::MatrixXd& multipliers, std::span<const double> weights,
                                           const Eigen::MatrixXd& diff) {
  const Index n = multipliers.rows();
  if (static_cast<Index>(weights.size()) != n || diff.rows() != n || diff.cols() != n + 1)
    throw std::invalid_argument("costate transform: inconsistent dimensions");
  Eigen::MatrixXd lam(n + 1, multipliers.cols());
  for (Index l = 0; l < n; ++l) lam.row(l) = multipliers.row(l) / weights[static_cast<std::size_t>(l)];
  lam.row(n) = diff.col(n).transpose() * multipliers;
  return lam;
}

CollocatedSolution extract(const NlpResult& result, const CollocationNlp& nlp) {
  const auto& L = nlp.layout();
  const auto& x = result.x;
  CollocatedSolution sol;
  sol.status = result.status;
  sol.objective = result.objective;
  const std::size_t q = L.domains();
  sol.t0 = nlp.time(x, 0);
  sol.tf = nlp.time(x, q);
  for (std::size_t s = 1; s < q; ++s) sol.switch_times.push_back(nlp.time(x, s));

  bool have = result.multipliers.size() == L.num_constraints;
  for (double v : result.multipliers) have = have && std::isfinite(v);
  sol.has_costates = have;

  for (std::size_t d = 0; d < q; ++d) {
    const auto& grid = nlp.grids()[d];
    DomainSolution dom;
    dom.mesh = grid.mesh;
    dom.t_start = nlp.time(x, d);
    dom.t_end = nlp.time(x, d + 1);
    dom.taus = grid.taus;
    const std::size_t n = L.points[d];
    dom.states.resize(static_cast<Index>(n + 1), static_cast<Index>(L.n_y));
    dom.controls.resize(static_cast<Index>(n), static_cast<Index>(L.n_u));
    for (std::size_t j = 0; j <= n; ++j) {
      dom.times.push_back(j == n ? dom.t_end : affine_to_time(grid.taus[j], dom.t_start, dom.t_end));
      for (std::size_t k = 0; k < L.n_y; ++k)
        dom.states(static_cast<Index>(j), static_cast<Index>(k)) = x[L.state(d, j, k)];
      if (j < n)
        for (std::size_t i = 0; i < L.n_u; ++i)
          dom.controls(static_cast<Index>(j), static_cast<Index>(i)) = x[L.control(d, j, i)];
    }
    if (have) {
      dom.defect_multipliers.resize(static_cast<Index>(n), static_cast<Index>(L.n_y));
      for (std::size_t l = 0; l < n; ++l)
        for (std::size_t k = 0; k < L.n_y; ++k)
          dom.defect_multipliers(static_cast<Index>(l), static_cast<Index>(k)) =
              result.multipliers[L.defect_row(d, l, k)];
      // The solver adds multiplier * defect to its Lagrangian; the transform
      // expects the subtracting convention.
      dom.costates = costates_from_multipliers(-dom.defect_multipliers, grid.weights, grid.diff);
    }
    sol.domains.push_back(std::move(dom));
  }
  return sol;
}

}  // namespace bbmesh
