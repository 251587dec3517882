#include "bbmesh/lgr.hpp"

#include <Eigen/LU>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bbmesh {

namespace {

struct LegendrePair {
  double value;
  double derivative;
};

// P_n and P_n' via the three-term recurrence; the derivative uses
// P'_{k+1} = P'_{k-1} + (2k + 1) P_k, which stays finite at x = +-1.
LegendrePair legendre_with_derivative(std::size_t n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0, p = x;
  double d_prev = 0.0, d = 1.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double p_next = ((2.0 * kk + 1.0) * x * p - kk * p_prev) / (kk + 1.0);
    const double d_next = d_prev + (2.0 * kk + 1.0) * p;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d};
}

}  // namespace

double legendre(std::size_t n, double x) { return legendre_with_derivative(n, x).value; }

std::vector<double> QuadratureRule::support() const {
  std::vector<double> s = nodes;
  s.push_back(support_node);
  return s;
}

MeshLayout MeshLayout::uniform(std::size_t intervals, std::size_t points) {
  if (intervals == 0) throw std::invalid_argument("mesh must have at least one interval");
  MeshLayout mesh;
  mesh.boundaries.resize(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k)
    mesh.boundaries[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(intervals);
  mesh.boundaries.front() = -1.0;
  mesh.boundaries.back() = 1.0;
  mesh.points_per_interval.assign(intervals, points);
  mesh.validate();
  return mesh;
}

std::size_t MeshLayout::total_points() const {
  std::size_t total = 0;
  for (auto n : points_per_interval) total += n;
  return total;
}

std::size_t MeshLayout::offset(std::size_t k) const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < k; ++i) total += points_per_interval[i];
  return total;
}

void MeshLayout::validate() const {
  if (points_per_interval.empty()) throw std::invalid_argument("mesh has no intervals");
  if (boundaries.size() != points_per_interval.size() + 1)
    throw std::invalid_argument("mesh boundary count must be interval count + 1");
  if (boundaries.front() != -1.0 || boundaries.back() != 1.0)
    throw std::invalid_argument("mesh boundaries must start at -1 and end at +1");
  for (std::size_t k = 1; k < boundaries.size(); ++k)
    if (!(boundaries[k] > boundaries[k - 1]))
      throw std::invalid_argument("mesh boundaries must be strictly increasing");
  for (auto n : points_per_interval)
    if (n < min_points || n > max_points)
      throw std::invalid_argument("mesh interval point count " + std::to_string(n) + " outside [" +
                                  std::to_string(min_points) + ", " + std::to_string(max_points) + "]");
}

QuadratureRule lgr_rule(std::size_t n) {
  if (n < 1 || n > 64) throw std::invalid_argument("LGR order must lie in [1, 64], got " + std::to_string(n));

  QuadratureRule rule;
  rule.order = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.nodes[0] = -1.0;

  const double nn = static_cast<double>(n);
  for (std::size_t j = 1; j < n; ++j) {
    // Chebyshev-Gauss-Radau points as the starting guess.
    double x = -std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / (2.0 * nn - 1.0));
    for (int iter = 0; iter < 100; ++iter) {
      const auto a = legendre_with_derivative(n - 1, x);
      const auto b = legendre_with_derivative(n, x);
      const double step = (a.value + b.value) / (a.derivative + b.derivative);
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    rule.nodes[j] = x;
  }

  rule.weights[0] = 2.0 / (nn * nn);
  for (std::size_t j = 1; j < n; ++j) {
    const double p = legendre(n - 1, rule.nodes[j]);
    rule.weights[j] = (1.0 - rule.nodes[j]) / (nn * nn * p * p);
  }

  for (std::size_t j = 1; j < n; ++j)
    if (!(rule.nodes[j] > rule.nodes[j - 1]) || !(rule.nodes[j] < 1.0))
      throw std::runtime_error("LGR node iteration failed for order " + std::to_string(n));

  rule.barycentric = barycentric_weights(rule.support());
  return rule;
}

std::shared_ptr<const QuadratureRule> cached_lgr_rule(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const QuadratureRule>(lgr_rule(n));
  return slot;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t m = nodes.size();
  std::vector<double> w(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k)
      if (k != j) w[j] *= nodes[j] - nodes[k];
    w[j] = 1.0 / w[j];
  }
  return w;
}

DifferentiationMatrix diff_matrix(const QuadratureRule& rule) {
  const auto support = rule.support();
  const auto& bw = rule.barycentric;
  const std::size_t n = rule.order;
  DifferentiationMatrix d = DifferentiationMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    double diagonal = 0.0;
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == i) continue;
      const double entry = (bw[j] / bw[i]) / (support[i] - support[j]);
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entry;
      diagonal -= entry;
    }
    d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diagonal;
  }
  return d;
}

Eigen::MatrixXd integration_matrix(const QuadratureRule& rule) {
  const auto d = diff_matrix(rule);
  const auto n = static_cast<Eigen::Index>(rule.order);
  Eigen::MatrixXd tail = d.rightCols(n);
  return tail.partialPivLu().inverse();
}

double barycentric_interpolate(std::span<const double> nodes, std::span<const double> bary_weights,
                               std::span<const double> values, double query) {
  double numerator = 0.0, denominator = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double diff = query - nodes[j];
    if (diff == 0.0) return values[j];
    const double term = bary_weights[j] / diff;
    numerator += term * values[j];
    denominator += term;
  }
  return numerator / denominator;
}

double interpolate(std::span<const double> support_values, const QuadratureRule& rule, double query) {
  if (support_values.size() != rule.order + 1)
    throw std::invalid_argument("interpolate expects N + 1 support values");
  const auto support = rule.support();
  return barycentric_interpolate(support, rule.barycentric, support_values, query);
}

double affine_to_time(double tau, double t_start, double t_end) {
  if (!(t_end > t_start)) throw std::invalid_argument("affine map requires t_end > t_start");
  return 0.5 * (t_end - t_start) * tau + 0.5 * (t_end + t_start);
}

double affine_to_tau(double t, double t_start, double t_end) {
  if (!(t_end > t_start)) throw std::invalid_argument("affine map requires t_end > t_start");
  return 2.0 * (t - t_start) / (t_end - t_start) - 1.0;
}

}  // namespace bbmesh
