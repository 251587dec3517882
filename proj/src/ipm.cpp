// Primal-dual interior point method for the dense NLPs produced by the
// transcription. The structure follows the usual barrier / filter line search
// recipe: fixed variables are removed, inequality rows get slacks, and each
// iteration solves one symmetric indefinite KKT system with inertia correction.

#include "bbmesh/nlp.hpp"
#include "dense_ldlt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace bbmesh {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double KktResiduals::max() const { return std::max({stationarity, feasibility, complementarity}); }

// ---------------------------------------------------------------------------
// DenseNlp

DenseNlp::DenseNlp(Objective objective, Constraints constraints)
    : objective_(std::move(objective)), constraints_(std::move(constraints)) {}

double DenseNlp::objective(std::span<const double> x) const {
  std::vector<HyperDual> arg(x.begin(), x.end());
  return objective_(arg).real;
}

void DenseNlp::gradient(std::span<const double> x, std::span<double> grad) const {
  std::vector<HyperDual> arg(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    arg[i].e1 = 1.0;
    grad[i] = objective_(arg).e1;
    arg[i].e1 = 0.0;
  }
}

void DenseNlp::constraints(std::span<const double> x, std::span<double> g) const {
  if (!constraints_) return;
  std::vector<HyperDual> arg(x.begin(), x.end());
  const auto out = constraints_(arg);
  for (std::size_t r = 0; r < out.size(); ++r) g[r] = out[r].real;
}

void DenseNlp::jacobian(std::span<const double> x, Eigen::MatrixXd& jac) const {
  jac.setZero(static_cast<Index>(num_constraints()), static_cast<Index>(x.size()));
  if (!constraints_) return;
  std::vector<HyperDual> arg(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    arg[i].e1 = 1.0;
    const auto out = constraints_(arg);
    for (std::size_t r = 0; r < out.size(); ++r) jac(static_cast<Index>(r), static_cast<Index>(i)) = out[r].e1;
    arg[i].e1 = 0.0;
  }
}

void DenseNlp::hessian(std::span<const double> x, double objective_factor, std::span<const double> lambda,
                       Eigen::MatrixXd& hess) const {
  const std::size_t n = x.size();
  hess.setZero(static_cast<Index>(n), static_cast<Index>(n));
  std::vector<HyperDual> arg(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      arg[i].e1 = 1.0;
      arg[j].e2 = 1.0;
      double value = objective_factor * objective_(arg).e12;
      if (constraints_) {
        const auto out = constraints_(arg);
        for (std::size_t r = 0; r < out.size(); ++r) value += lambda[r] * out[r].e12;
      }
      arg[i].e1 = 0.0;
      arg[j].e2 = 0.0;
      hess(static_cast<Index>(i), static_cast<Index>(j)) = value;
      hess(static_cast<Index>(j), static_cast<Index>(i)) = value;
    }
}

// ---------------------------------------------------------------------------
// KKT residuals in the caller's variable space

KktResiduals kkt_residuals(const NlpProblem& nlp, std::span<const double> x, std::span<const double> lambda,
                           std::span<const double> z_lower, std::span<const double> z_upper) {
  const std::size_t n = nlp.num_variables(), m = nlp.num_constraints();
  std::vector<double> grad(n), g(m);
  nlp.gradient(x, grad);
  nlp.constraints(x, g);
  MatrixXd jac;
  nlp.jacobian(x, jac);
  VectorXd lam = Eigen::Map<const VectorXd>(lambda.data(), static_cast<Index>(m));
  VectorXd r = Eigen::Map<const VectorXd>(grad.data(), static_cast<Index>(n));
  if (m > 0) r += jac.transpose() * lam;
  KktResiduals res;
  for (std::size_t i = 0; i < n; ++i) {
    const double ri = r[static_cast<Index>(i)] - z_lower[i] + z_upper[i];
    res.stationarity = std::max(res.stationarity, std::abs(ri));
    if (std::isfinite(nlp.x_lower[i]))
      res.complementarity = std::max(res.complementarity, std::abs((x[i] - nlp.x_lower[i]) * z_lower[i]));
    if (std::isfinite(nlp.x_upper[i]))
      res.complementarity = std::max(res.complementarity, std::abs((nlp.x_upper[i] - x[i]) * z_upper[i]));
    res.feasibility = std::max({res.feasibility, nlp.x_lower[i] - x[i], x[i] - nlp.x_upper[i]});
  }
  for (std::size_t r_i = 0; r_i < m; ++r_i) {
    res.feasibility = std::max({res.feasibility, nlp.g_lower[r_i] - g[r_i], g[r_i] - nlp.g_upper[r_i]});
    // An inequality multiplier pairs with the distance to the side it pushes on.
    if (nlp.g_lower[r_i] < nlp.g_upper[r_i]) {
      const double l = lambda[r_i];
      if (l > 0.0 && std::isfinite(nlp.g_upper[r_i]))
        res.complementarity = std::max(res.complementarity, std::abs(l * (nlp.g_upper[r_i] - g[r_i])));
      if (l < 0.0 && std::isfinite(nlp.g_lower[r_i]))
        res.complementarity = std::max(res.complementarity, std::abs(l * (g[r_i] - nlp.g_lower[r_i])));
    }
  }
  return res;
}

namespace {


struct FilterEntry {
  double theta;
  double phi;
};

class InteriorPoint {
 public:
  InteriorPoint(const NlpProblem& nlp, const SolverOptions& options) : nlp_(nlp), opt_(options) { setup(); }

  NlpResult run();

 private:
  struct Trial {
    VectorXd w;
    double f = 0.0;
    std::vector<double> g;
    VectorXd c;
    double theta = 0.0;
    double phi = 0.0;
    bool ok = false;
  };

  void setup();
  void expand(const VectorXd& w, std::vector<double>& x) const;
  Trial evaluate(const VectorXd& w) const;
  VectorXd residual(const std::vector<double>& g, const VectorXd& w) const;
  double barrier(const VectorXd& w, double f) const;
  void evaluate_derivatives();
  VectorXd lagrangian_gradient() const;
  double complementarity(double mu) const;
  double optimality_error(double mu, bool scaled) const;
  bool factor_kkt(bool for_restoration);
  double max_step(const VectorXd& v, const VectorXd& dv, const VectorXd& lo, const VectorXd& hi) const;
  bool acceptable_to_filter(double theta, double phi) const;
  void augment_filter(double theta, double phi);
  bool restoration();
  void least_squares_multipliers();
  void clamp_bound_multipliers();
  NlpResult finish(NlpStatus status, std::string message);

  const NlpProblem& nlp_;
  SolverOptions opt_;

  std::size_t n_ = 0, m_ = 0, nf_ = 0, ns_ = 0, nw_ = 0;
  std::vector<std::size_t> free_;
  std::vector<long> slack_of_row_;
  std::vector<double> x_full_;

  VectorXd w_, wl_, wu_, lambda_, zl_, zu_;
  std::vector<bool> has_l_, has_u_;

  // Values and derivatives at the current iterate.
  Trial cur_;
  VectorXd grad_w_;
  MatrixXd jac_w_;
  MatrixXd hess_w_;

  SymmetricFactorization kkt_;
  double delta_w_last_ = 0.0;
  double mu_ = 0.1;
  double tau_ = 0.99;
  double theta_min_ = 0.0, theta_max_ = 0.0;
  std::vector<FilterEntry> filter_;
  std::size_t iter_ = 0;
  std::chrono::steady_clock::time_point start_;
};

void InteriorPoint::setup() {
  n_ = nlp_.num_variables();
  m_ = nlp_.num_constraints();
  if (nlp_.x_upper.size() != n_ || nlp_.g_upper.size() != m_)
    throw std::invalid_argument("NLP bound vectors have inconsistent sizes");
  if (!(opt_.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");

  std::vector<double> x0 = opt_.initial_point ? *opt_.initial_point : nlp_.x_initial;
  if (x0.size() != n_) throw std::invalid_argument("initial point has the wrong dimension");
  x_full_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (nlp_.x_lower[i] > nlp_.x_upper[i]) throw std::invalid_argument("variable bounds are inverted");
    if (nlp_.x_lower[i] == nlp_.x_upper[i])
      x_full_[i] = nlp_.x_lower[i];
    else
      free_.push_back(i);
  }
  slack_of_row_.assign(m_, -1);
  for (std::size_t r = 0; r < m_; ++r) {
    if (nlp_.g_lower[r] > nlp_.g_upper[r]) throw std::invalid_argument("constraint bounds are inverted");
    if (nlp_.g_lower[r] < nlp_.g_upper[r]) slack_of_row_[r] = static_cast<long>(ns_++);
  }
  nf_ = free_.size();
  nw_ = nf_ + ns_;

  w_.resize(static_cast<Index>(nw_));
  wl_.resize(static_cast<Index>(nw_));
  wu_.resize(static_cast<Index>(nw_));
  for (std::size_t k = 0; k < nf_; ++k) {
    wl_[static_cast<Index>(k)] = nlp_.x_lower[free_[k]];
    wu_[static_cast<Index>(k)] = nlp_.x_upper[free_[k]];
    w_[static_cast<Index>(k)] = x0[free_[k]];
  }
  // Slack boxes are widened by a tenth of the tolerance so that rows which are
  // constant at one of their bounds still leave the barrier an interior to
  // work in, while the reported violation stays inside the tolerance.
  const double relax = 0.1 * opt_.tolerance;
  for (std::size_t r = 0; r < m_; ++r)
    if (slack_of_row_[r] >= 0) {
      const auto k = static_cast<Index>(nf_) + slack_of_row_[r];
      wl_[k] = nlp_.g_lower[r] - relax * std::max(1.0, std::abs(nlp_.g_lower[r]));
      wu_[k] = nlp_.g_upper[r] + relax * std::max(1.0, std::abs(nlp_.g_upper[r]));
    }
  has_l_.resize(nw_);
  has_u_.resize(nw_);
  for (std::size_t k = 0; k < nw_; ++k) {
    has_l_[k] = std::isfinite(wl_[static_cast<Index>(k)]);
    has_u_[k] = std::isfinite(wu_[static_cast<Index>(k)]);
  }

  // Slack start values follow g(x0).
  if (ns_ > 0) {
    std::vector<double> x;
    VectorXd wtmp = w_;
    for (std::size_t k = 0; k < nf_; ++k) {
      const auto i = static_cast<Index>(k);
      wtmp[i] = std::clamp(wtmp[i], wl_[i], wu_[i]);
    }
    expand(wtmp, x);
    std::vector<double> g(m_);
    nlp_.constraints(x, g);
    for (std::size_t r = 0; r < m_; ++r)
      if (slack_of_row_[r] >= 0) w_[static_cast<Index>(nf_) + slack_of_row_[r]] = g[r];
  }

  // Push the start strictly inside the box.
  constexpr double kappa1 = 1e-2, kappa2 = 1e-2;
  for (std::size_t k = 0; k < nw_; ++k) {
    const auto i = static_cast<Index>(k);
    const double lo = wl_[i], hi = wu_[i];
    if (has_l_[k] && has_u_[k]) {
      const double pl = std::min(kappa1 * std::max(1.0, std::abs(lo)), kappa2 * (hi - lo));
      const double pu = std::min(kappa1 * std::max(1.0, std::abs(hi)), kappa2 * (hi - lo));
      w_[i] = std::clamp(w_[i], lo + pl, hi - pu);
    } else if (has_l_[k]) {
      w_[i] = std::max(w_[i], lo + kappa1 * std::max(1.0, std::abs(lo)));
    } else if (has_u_[k]) {
      w_[i] = std::min(w_[i], hi - kappa1 * std::max(1.0, std::abs(hi)));
    }
  }

  lambda_ = VectorXd::Zero(static_cast<Index>(m_));
  zl_ = VectorXd::Zero(static_cast<Index>(nw_));
  zu_ = VectorXd::Zero(static_cast<Index>(nw_));
  for (std::size_t k = 0; k < nw_; ++k) {
    if (has_l_[k]) zl_[static_cast<Index>(k)] = 1.0;
    if (has_u_[k]) zu_[static_cast<Index>(k)] = 1.0;
  }
}

void InteriorPoint::expand(const VectorXd& w, std::vector<double>& x) const {
  x = x_full_;
  for (std::size_t k = 0; k < nf_; ++k) x[free_[k]] = w[static_cast<Index>(k)];
}

VectorXd InteriorPoint::residual(const std::vector<double>& g, const VectorXd& w) const {
  VectorXd c(static_cast<Index>(m_));
  for (std::size_t r = 0; r < m_; ++r) {
    const auto ri = static_cast<Index>(r);
    c[ri] = slack_of_row_[r] >= 0 ? g[r] - w[static_cast<Index>(nf_) + slack_of_row_[r]] : g[r] - nlp_.g_lower[r];
  }
  return c;
}

double InteriorPoint::barrier(const VectorXd& w, double f) const {
  double phi = f;
  for (std::size_t k = 0; k < nw_; ++k) {
    const auto i = static_cast<Index>(k);
    if (has_l_[k]) phi -= mu_ * std::log(w[i] - wl_[i]);
    if (has_u_[k]) phi -= mu_ * std::log(wu_[i] - w[i]);
  }
  return phi;
}

InteriorPoint::Trial InteriorPoint::evaluate(const VectorXd& w) const {
  Trial t;
  t.w = w;
  std::vector<double> x;
  expand(w, x);
  try {
    t.f = nlp_.objective(x);
    t.g.resize(m_);
    nlp_.constraints(x, t.g);
  } catch (const EvaluationError&) {
    return t;
  }
  if (!std::isfinite(t.f)) return t;
  for (double v : t.g)
    if (!std::isfinite(v)) return t;
  t.c = residual(t.g, w);
  t.theta = t.c.lpNorm<1>();
  t.phi = barrier(w, t.f);
  t.ok = std::isfinite(t.phi);
  return t;
}

void InteriorPoint::evaluate_derivatives() {
  std::vector<double> x;
  expand(w_, x);
  std::vector<double> grad(n_);
  nlp_.gradient(x, grad);
  MatrixXd jac;
  nlp_.jacobian(x, jac);
  MatrixXd hess;
  std::vector<double> lam(lambda_.data(), lambda_.data() + m_);
  nlp_.hessian(x, 1.0, lam, hess);

  grad_w_ = VectorXd::Zero(static_cast<Index>(nw_));
  jac_w_ = MatrixXd::Zero(static_cast<Index>(m_), static_cast<Index>(nw_));
  hess_w_ = MatrixXd::Zero(static_cast<Index>(nw_), static_cast<Index>(nw_));
  for (std::size_t k = 0; k < nf_; ++k) {
    const auto ki = static_cast<Index>(k);
    const auto col = static_cast<Index>(free_[k]);
    grad_w_[ki] = grad[free_[k]];
    if (m_ > 0) jac_w_.col(ki) = jac.col(col);
    for (std::size_t l = 0; l < nf_; ++l) hess_w_(ki, static_cast<Index>(l)) = hess(col, static_cast<Index>(free_[l]));
  }
  for (std::size_t r = 0; r < m_; ++r)
    if (slack_of_row_[r] >= 0) jac_w_(static_cast<Index>(r), static_cast<Index>(nf_) + slack_of_row_[r]) = -1.0;
}

VectorXd InteriorPoint::lagrangian_gradient() const {
  VectorXd r = grad_w_ - zl_ + zu_;
  if (m_ > 0) r += jac_w_.transpose() * lambda_;
  return r;
}

double InteriorPoint::complementarity(double mu) const {
  double worst = 0.0;
  for (std::size_t k = 0; k < nw_; ++k) {
    const auto i = static_cast<Index>(k);
    if (has_l_[k]) worst = std::max(worst, std::abs((w_[i] - wl_[i]) * zl_[i] - mu));
    if (has_u_[k]) worst = std::max(worst, std::abs((wu_[i] - w_[i]) * zu_[i] - mu));
  }
  return worst;
}

double InteriorPoint::optimality_error(double mu, bool scaled) const {
  double sd = 1.0, sc = 1.0;
  if (scaled) {
    constexpr double smax = 100.0;
    const double count = static_cast<double>(m_ + 2 * nw_);
    const double zsum = zl_.lpNorm<1>() + zu_.lpNorm<1>();
    if (count > 0) {
      sd = std::max(smax, (lambda_.lpNorm<1>() + zsum) / count) / smax;
      sc = std::max(smax, zsum / std::max<double>(1.0, static_cast<double>(2 * nw_))) / smax;
    }
  }
  const double stat = nw_ > 0 ? lagrangian_gradient().lpNorm<Eigen::Infinity>() : 0.0;
  const double feas = m_ > 0 ? cur_.c.lpNorm<Eigen::Infinity>() : 0.0;
  return std::max({stat / sd, feas, complementarity(mu) / sc});
}

bool InteriorPoint::factor_kkt(bool for_restoration) {
  const auto nw = static_cast<Index>(nw_), m = static_cast<Index>(m_);
  VectorXd sigma = VectorXd::Zero(nw);
  for (std::size_t k = 0; k < nw_; ++k) {
    const auto i = static_cast<Index>(k);
    if (has_l_[k]) sigma[i] += zl_[i] / (w_[i] - wl_[i]);
    if (has_u_[k]) sigma[i] += zu_[i] / (wu_[i] - w_[i]);
  }

  auto build = [&](double dw, double dc) {
    MatrixXd k = MatrixXd::Zero(nw + m, nw + m);
    if (for_restoration) {
      // Minimum-norm feasibility step in a diagonal metric.
      for (Index i = 0; i < nw; ++i) k(i, i) = sigma[i] + 1.0 + dw;
    } else {
      k.topLeftCorner(nw, nw) = hess_w_;
      k.topLeftCorner(nw, nw).diagonal() += sigma + VectorXd::Constant(nw, dw);
    }
    k.bottomLeftCorner(m, nw) = jac_w_;
    k.topRightCorner(nw, m) = jac_w_.transpose();
    k.bottomRightCorner(m, m).diagonal().setConstant(-dc);
    return k;
  };

  double dw = 0.0, dc = 0.0;
  for (int attempt = 0; attempt < 60; ++attempt) {
    MatrixXd k = build(dw, dc);
    if (!kkt_.factor(k)) return false;
    const bool good = kkt_.zero() == 0 && kkt_.positive() == static_cast<int>(nw_) &&
                      kkt_.negative() == static_cast<int>(m_);
    if (good) {
      if (!for_restoration) delta_w_last_ = dw;
      return true;
    }
    // Too few negative pivots means the constraint Jacobian is (numerically)
    // rank deficient; only a regularized (2,2) block can fix that.
    const bool deficient = kkt_.zero() > 0 || kkt_.negative() < static_cast<int>(m_);
    if (deficient && dc == 0.0 && m_ > 0) {
      dc = 1e-8 * std::pow(mu_, 0.25);
      if (attempt == 0) continue;
    }
    if (dw == 0.0)
      dw = delta_w_last_ == 0.0 ? 1e-4 : std::max(1e-20, delta_w_last_ / 3.0);
    else
      dw *= delta_w_last_ == 0.0 ? 100.0 : 8.0;
    if (dw > 1e40) return false;
  }
  return false;
}

double InteriorPoint::max_step(const VectorXd& v, const VectorXd& dv, const VectorXd& lo, const VectorXd& hi) const {
  double alpha = 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(lo[i]) && dv[i] < 0.0) alpha = std::min(alpha, -tau_ * (v[i] - lo[i]) / dv[i]);
    if (std::isfinite(hi[i]) && dv[i] > 0.0) alpha = std::min(alpha, tau_ * (hi[i] - v[i]) / dv[i]);
  }
  return alpha;
}

bool InteriorPoint::acceptable_to_filter(double theta, double phi) const {
  if (theta > theta_max_) return false;
  for (const auto& e : filter_)
    if (theta >= e.theta && phi >= e.phi) return false;
  return true;
}

void InteriorPoint::augment_filter(double theta, double phi) {
  std::erase_if(filter_, [&](const FilterEntry& e) { return e.theta >= theta && e.phi >= phi; });
  filter_.push_back({theta, phi});
}

void InteriorPoint::clamp_bound_multipliers() {
  constexpr double kappa_sigma = 1e10;
  for (std::size_t k = 0; k < nw_; ++k) {
    const auto i = static_cast<Index>(k);
    if (has_l_[k]) {
      const double s = w_[i] - wl_[i];
      zl_[i] = std::clamp(zl_[i], mu_ / (kappa_sigma * s), kappa_sigma * mu_ / s);
    }
    if (has_u_[k]) {
      const double s = wu_[i] - w_[i];
      zu_[i] = std::clamp(zu_[i], mu_ / (kappa_sigma * s), kappa_sigma * mu_ / s);
    }
  }
}

void InteriorPoint::least_squares_multipliers() {
  if (m_ == 0) return;
  const auto nw = static_cast<Index>(nw_), m = static_cast<Index>(m_);
  MatrixXd k = MatrixXd::Zero(nw + m, nw + m);
  k.topLeftCorner(nw, nw).diagonal().setOnes();
  k.bottomLeftCorner(m, nw) = jac_w_;
  k.topRightCorner(nw, m) = jac_w_.transpose();
  SymmetricFactorization f;
  if (!f.factor(k) || f.zero() > 0) return;
  VectorXd rhs = VectorXd::Zero(nw + m);
  rhs.head(nw) = -(grad_w_ - zl_ + zu_);
  f.solve(rhs);
  VectorXd lam = rhs.tail(m);
  if (lam.allFinite() && lam.lpNorm<Eigen::Infinity>() <= 1e3) lambda_ = lam;
}

// Feasibility restoration: repeated minimum-norm Newton steps on c(w) = 0
// until the constraint violation drops enough to be accepted by the filter.
bool InteriorPoint::restoration() {
  const double theta_start = cur_.theta;
  for (int it = 0; it < 100; ++it) {
    if (!factor_kkt(true)) return false;
    const auto nw = static_cast<Index>(nw_), m = static_cast<Index>(m_);
    VectorXd rhs = VectorXd::Zero(nw + m);
    rhs.tail(m) = -cur_.c;
    kkt_.solve(rhs);
    const VectorXd dw = rhs.head(nw);
    double alpha = max_step(w_, dw, wl_, wu_);
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      Trial t = evaluate(w_ + alpha * dw);
      if (t.ok && t.theta <= (1.0 - 1e-4 * alpha) * cur_.theta) {
        w_ = t.w;
        cur_ = std::move(t);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return false;
    evaluate_derivatives();
    clamp_bound_multipliers();
    if (cur_.theta <= 0.9 * theta_start && acceptable_to_filter(cur_.theta, cur_.phi)) {
      augment_filter(cur_.theta, cur_.phi);
      least_squares_multipliers();
      return true;
    }
    if (cur_.theta <= 1e-2 * opt_.tolerance) {
      least_squares_multipliers();
      return true;
    }
  }
  return false;
}

NlpResult InteriorPoint::finish(NlpStatus status, std::string message) {
  NlpResult res;
  expand(w_, res.x);
  res.status = status;
  res.message = std::move(message);
  res.iterations = iter_;
  res.multipliers.assign(lambda_.data(), lambda_.data() + m_);
  res.bound_lower.assign(n_, 0.0);
  res.bound_upper.assign(n_, 0.0);
  for (std::size_t k = 0; k < nf_; ++k) {
    res.bound_lower[free_[k]] = zl_[static_cast<Index>(k)];
    res.bound_upper[free_[k]] = zu_[static_cast<Index>(k)];
  }
  // Fixed variables: bound multipliers absorb the reduced gradient.
  if (nf_ < n_) {
    std::vector<double> grad(n_);
    nlp_.gradient(res.x, grad);
    MatrixXd jac;
    nlp_.jacobian(res.x, jac);
    VectorXd r = Eigen::Map<VectorXd>(grad.data(), static_cast<Index>(n_));
    if (m_ > 0) r += jac.transpose() * lambda_;
    for (std::size_t i = 0; i < n_; ++i)
      if (nlp_.x_lower[i] == nlp_.x_upper[i]) {
        res.bound_lower[i] = std::max(0.0, r[static_cast<Index>(i)]);
        res.bound_upper[i] = std::max(0.0, -r[static_cast<Index>(i)]);
      }
  }
  try {
    res.objective = nlp_.objective(res.x);
    res.kkt = kkt_residuals(nlp_, res.x, res.multipliers, res.bound_lower, res.bound_upper);
  } catch (const EvaluationError&) {
    res.status = NlpStatus::numerical_failure;
  }
  if (res.status == NlpStatus::converged && res.kkt.max() > opt_.tolerance) {
    res.status = NlpStatus::numerical_failure;
    res.message = "final residuals exceed tolerance";
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return res;
}

NlpResult InteriorPoint::run() {
  start_ = std::chrono::steady_clock::now();
  const double tol = opt_.tolerance;
  const double mu_min = std::max(1e-13, tol / 10.0);
  constexpr double kappa_eps = 10.0, kappa_mu = 0.2, theta_mu = 1.5;
  constexpr double gamma_theta = 1e-5, gamma_phi = 1e-8, delta = 1.0, s_theta = 1.1, s_phi = 2.3, eta = 1e-8;
  constexpr double gamma_alpha = 0.05, kappa_soc = 0.99;

  cur_ = evaluate(w_);
  if (!cur_.ok) return finish(NlpStatus::numerical_failure, "objective or constraints not evaluable at start");
  evaluate_derivatives();
  least_squares_multipliers();
  theta_max_ = 1e4 * std::max(1.0, cur_.theta);
  theta_min_ = 1e-4 * std::max(1.0, cur_.theta);

  bool force_mu_decrease = false;
  for (iter_ = 0; iter_ < opt_.max_iterations; ++iter_) {
    const double stat = nw_ > 0 ? lagrangian_gradient().lpNorm<Eigen::Infinity>() : 0.0;
    const double feas = m_ > 0 ? cur_.c.lpNorm<Eigen::Infinity>() : 0.0;
    if (opt_.log)
      *opt_.log << iter_ << ' ' << cur_.f << ' ' << feas << ' ' << stat << ' ' << mu_ << '\n';
    if (stat <= tol && feas <= tol && complementarity(0.0) <= tol) return finish(NlpStatus::converged, "");

    // Monotone barrier update.
    while (mu_ > mu_min && (force_mu_decrease || optimality_error(mu_, true) <= kappa_eps * mu_)) {
      mu_ = std::max(mu_min, std::min(kappa_mu * mu_, std::pow(mu_, theta_mu)));
      tau_ = std::max(0.99, 1.0 - mu_);
      filter_.clear();
      cur_.phi = barrier(w_, cur_.f);
      force_mu_decrease = false;
    }
    force_mu_decrease = false;

    if (!factor_kkt(false)) return finish(NlpStatus::numerical_failure, "KKT factorization failed");

    const auto nw = static_cast<Index>(nw_), m = static_cast<Index>(m_);
    VectorXd barrier_grad = grad_w_;
    for (std::size_t k = 0; k < nw_; ++k) {
      const auto i = static_cast<Index>(k);
      if (has_l_[k]) barrier_grad[i] -= mu_ / (w_[i] - wl_[i]);
      if (has_u_[k]) barrier_grad[i] += mu_ / (wu_[i] - w_[i]);
    }
    VectorXd rhs(nw + m);
    rhs.head(nw) = -barrier_grad;
    if (m_ > 0) {
      rhs.head(nw) -= jac_w_.transpose() * lambda_;
      rhs.tail(m) = -cur_.c;
    }
    VectorXd sol = rhs;
    kkt_.solve(sol);
    VectorXd dw = sol.head(nw);
    VectorXd dlam = sol.tail(m);
    if (!dw.allFinite() || !dlam.allFinite()) return finish(NlpStatus::numerical_failure, "non-finite search direction");

    VectorXd dzl = VectorXd::Zero(nw), dzu = VectorXd::Zero(nw);
    for (std::size_t k = 0; k < nw_; ++k) {
      const auto i = static_cast<Index>(k);
      if (has_l_[k]) {
        const double s = w_[i] - wl_[i];
        dzl[i] = (mu_ - s * zl_[i] - zl_[i] * dw[i]) / s;
      }
      if (has_u_[k]) {
        const double s = wu_[i] - w_[i];
        dzu[i] = (mu_ - s * zu_[i] + zu_[i] * dw[i]) / s;
      }
    }

    const double alpha_max = max_step(w_, dw, wl_, wu_);
    double alpha_z = 1.0;
    for (Index i = 0; i < nw; ++i) {
      if (dzl[i] < 0.0) alpha_z = std::min(alpha_z, -tau_ * zl_[i] / dzl[i]);
      if (dzu[i] < 0.0) alpha_z = std::min(alpha_z, -tau_ * zu_[i] / dzu[i]);
    }

    // Tiny steps: the barrier problem is solved to roundoff, move on.
    double rel_step = 0.0;
    for (Index i = 0; i < nw; ++i) rel_step = std::max(rel_step, std::abs(dw[i]) / (1.0 + std::abs(w_[i])));
    const double feas_now = m_ > 0 ? cur_.c.lpNorm<Eigen::Infinity>() : 0.0;
    const bool tiny = rel_step < 10.0 * std::numeric_limits<double>::epsilon() && feas_now < 1e-2 * tol;

    const double theta = cur_.theta, phi = cur_.phi;
    const double grad_phi_d = barrier_grad.dot(dw);
    double alpha_min = gamma_theta;
    if (grad_phi_d < 0.0) {
      alpha_min = std::min(gamma_theta, gamma_phi * theta / (-grad_phi_d));
      if (theta <= theta_min_) alpha_min = std::min(alpha_min, delta * std::pow(theta, s_theta) / std::pow(-grad_phi_d, s_phi));
    }
    alpha_min *= gamma_alpha;

    bool accepted = false;
    Trial trial;
    VectorXd step_w = dw, step_lam = dlam;
    double alpha = alpha_max;
    double alpha_lam = alpha_max;
    if (tiny) {
      trial = evaluate(w_ + alpha_max * dw);
      accepted = trial.ok;
      force_mu_decrease = true;
    }
    for (int ls = 0; !accepted && ls < 60; ++ls) {
      trial = evaluate(w_ + alpha * dw);
      if (trial.ok && acceptable_to_filter(trial.theta, trial.phi)) {
        const bool switching = grad_phi_d < 0.0 && theta <= theta_min_ &&
                               alpha * std::pow(-grad_phi_d, s_phi) > delta * std::pow(theta, s_theta);
        if (switching) {
          if (trial.phi <= phi + eta * alpha * grad_phi_d) {
            accepted = true;
            break;
          }
        } else if (trial.theta <= (1.0 - gamma_theta) * theta || trial.phi <= phi - gamma_phi * theta) {
          augment_filter((1.0 - gamma_theta) * theta, phi - gamma_phi * theta);
          accepted = true;
          break;
        }
      }
      // Second-order correction on the first trial step.
      if (ls == 0 && trial.ok && trial.theta >= theta && m_ > 0) {
        VectorXd c_soc = alpha * cur_.c + trial.c;
        double theta_prev = theta;
        for (int p = 0; p < 4; ++p) {
          VectorXd rsoc(nw + m);
          rsoc.head(nw) = rhs.head(nw);
          rsoc.tail(m) = -c_soc;
          kkt_.solve(rsoc);
          const VectorXd dws = rsoc.head(nw);
          const double asoc = max_step(w_, dws, wl_, wu_);
          Trial ts = evaluate(w_ + asoc * dws);
          if (!ts.ok) break;
          bool ok = false;
          if (acceptable_to_filter(ts.theta, ts.phi)) {
            const bool switching = grad_phi_d < 0.0 && theta <= theta_min_ &&
                                   alpha * std::pow(-grad_phi_d, s_phi) > delta * std::pow(theta, s_theta);
            if (switching)
              ok = ts.phi <= phi + eta * alpha * grad_phi_d;
            else
              ok = ts.theta <= (1.0 - gamma_theta) * theta || ts.phi <= phi - gamma_phi * theta;
            if (ok && !switching) augment_filter((1.0 - gamma_theta) * theta, phi - gamma_phi * theta);
          }
          if (ok) {
            trial = std::move(ts);
            step_w = dws;
            step_lam = rsoc.tail(m);
            alpha_lam = asoc;
            alpha = asoc;
            accepted = true;
            break;
          }
          if (ts.theta > kappa_soc * theta_prev) break;
          theta_prev = ts.theta;
          c_soc = asoc * c_soc + ts.c;
        }
        if (accepted) break;
      }
      alpha *= 0.5;
      alpha_lam = alpha;
      if (alpha < alpha_min) break;
    }

    if (!accepted) {
      if (theta <= 1e-2 * tol) {
        // Feasible but stuck: take the tiny step and let mu move on.
        trial = evaluate(w_ + alpha_min * dw);
        if (!trial.ok) return finish(NlpStatus::numerical_failure, "line search failed at a feasible point");
        alpha_lam = alpha_min;
        force_mu_decrease = true;
      } else {
        augment_filter(theta, phi);
        if (!restoration()) return finish(NlpStatus::infeasible, "feasibility restoration failed");
        continue;
      }
    }

    w_ = trial.w;
    if (m_ > 0) lambda_ += alpha_lam * step_lam;
    zl_ += alpha_z * dzl;
    zu_ += alpha_z * dzu;
    cur_ = std::move(trial);
    clamp_bound_multipliers();
    evaluate_derivatives();
  }
  const double stat = nw_ > 0 ? lagrangian_gradient().lpNorm<Eigen::Infinity>() : 0.0;
  const double feas = m_ > 0 ? cur_.c.lpNorm<Eigen::Infinity>() : 0.0;
  if (stat <= tol && feas <= tol && complementarity(0.0) <= tol) return finish(NlpStatus::converged, "");
  return finish(NlpStatus::max_iterations, "iteration limit reached");
}

}  // namespace

NlpResult solve(const NlpProblem& nlp, const SolverOptions& options) {
  InteriorPoint ip(nlp, options);
  return ip.run();
}

}  // namespace bbmesh
