#include "bbmesh/hyperdual.hpp"

#include <cmath>

namespace bbmesh {

HyperDual& HyperDual::operator/=(const HyperDual& o) {
  if (o.real == 0.0) throw EvaluationError("divide", "division by zero");
  // Solve q * o = *this slot by slot so the real part is the plain quotient.
  const double q = real / o.real;
  const double q1 = (e1 - q * o.e1) / o.real;
  const double q2 = (e2 - q * o.e2) / o.real;
  const double q12 = (e12 - q1 * o.e2 - q2 * o.e1 - q * o.e12) / o.real;
  *this = HyperDual{q, q1, q2, q12};
  return *this;
}

HyperDual sin(const HyperDual& x) {
  const double s = std::sin(x.real), c = std::cos(x.real);
  return lift(x, s, c, -s);
}

HyperDual cos(const HyperDual& x) {
  const double s = std::sin(x.real), c = std::cos(x.real);
  return lift(x, c, -s, -c);
}

HyperDual tan(const HyperDual& x) {
  const double c = std::cos(x.real);
  if (c == 0.0) throw EvaluationError("tan", "argument is an odd multiple of pi/2");
  const double t = std::tan(x.real);
  const double sec2 = 1.0 / (c * c);
  return lift(x, t, sec2, 2.0 * sec2 * t);
}

HyperDual exp(const HyperDual& x) {
  const double e = std::exp(x.real);
  return lift(x, e, e, e);
}

double checked_log(double x) {
  if (!(x > 0.0)) throw EvaluationError("log", "argument must be positive");
  return std::log(x);
}

double checked_sqrt(double x) {
  if (x < 0.0) throw EvaluationError("sqrt", "argument must be non-negative");
  return std::sqrt(x);
}

HyperDual log(const HyperDual& x) {
  const double l = checked_log(x.real);
  const double inv = 1.0 / x.real;
  return lift(x, l, inv, -inv * inv);
}

HyperDual sqrt(const HyperDual& x) {
  if (!(x.real > 0.0)) throw EvaluationError("sqrt", "argument must be positive for derivatives");
  const double s = std::sqrt(x.real);
  return lift(x, s, 0.5 / s, -0.25 / (s * x.real));
}

HyperDual pow(const HyperDual& x, double p) {
  if (p == std::floor(p) && std::abs(p) < 1e9) return pow(x, static_cast<int>(p));
  if (!(x.real > 0.0)) throw EvaluationError("pow", "non-integer power of a non-positive base");
  const double f = std::pow(x.real, p);
  return lift(x, f, p * f / x.real, p * (p - 1.0) * f / (x.real * x.real));
}

HyperDual pow(const HyperDual& x, int p) {
  if (p == 0) return HyperDual(1.0);
  if (p < 0 && x.real == 0.0) throw EvaluationError("pow", "negative power of zero");
  const double f = std::pow(x.real, p);
  const double d1 = p * std::pow(x.real, p - 1);
  const double d2 = (p == 1) ? 0.0 : p * (p - 1) * std::pow(x.real, p - 2);
  return lift(x, f, d1, d2);
}

HyperDual pow(const HyperDual& x, const HyperDual& p) {
  if (!(x.real > 0.0)) throw EvaluationError("pow", "hyper-dual exponent requires a positive base");
  return exp(p * log(x));
}

HyperDual abs(const HyperDual& x) { return x.real < 0.0 ? -x : x; }

SecondPartials second_partials(const HyperDualFunction& f, std::span<const double> x, std::size_t i, std::size_t j) {
  if (i >= x.size() || j >= x.size()) throw std::out_of_range("second_partials index out of range");
  std::vector<HyperDual> arg(x.begin(), x.end());
  arg[i].e1 = 1.0;
  arg[j].e2 = 1.0;
  const HyperDual r = f(arg);
  return {r.real, r.e1, r.e2, r.e12};
}

void gradient_and_hessian(const HyperDualFunction& f, std::span<const double> x, std::vector<double>& gradient,
                          std::vector<double>& hessian_row_major) {
  const std::size_t n = x.size();
  gradient.assign(n, 0.0);
  hessian_row_major.assign(n * n, 0.0);
  std::vector<HyperDual> arg(x.begin(), x.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      arg[i].e1 = 1.0;
      arg[j].e2 = 1.0;
      const HyperDual r = f(arg);
      arg[i].e1 = 0.0;
      arg[j].e2 = 0.0;
      if (i == j) gradient[i] = r.e1;
      hessian_row_major[i * n + j] = r.e12;
      hessian_row_major[j * n + i] = r.e12;
    }
  }
}

}  // namespace bbmesh
