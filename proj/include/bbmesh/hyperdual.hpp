#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbmesh {

/// Raised when an elementary function is evaluated outside its domain.
class EvaluationError : public std::domain_error {
 public:
  EvaluationError(const std::string& function, const std::string& what)
      : std::domain_error(function + ": " + what), function_(function) {}
  const std::string& function() const noexcept { return function_; }

 private:
  std::string function_;
};

/**
 * Hyper-dual number a + b e1 + c e2 + d e1e2 with e1^2 = e2^2 = 0.
 *
 * Evaluating f at x + e1 + e2 gives f(x), f'(x), f'(x), f''(x) in the four
 * slots with no truncation error. Seeding two different inputs in e1 and e2
 * gives the mixed second partial in the cross slot.
 */
struct HyperDual {
  double real = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double e12 = 0.0;

  constexpr HyperDual() = default;
  constexpr HyperDual(double value) : real(value) {}  // NOLINT: implicit lift of constants
  constexpr HyperDual(double value, double d1, double d2, double d12) : real(value), e1(d1), e2(d2), e12(d12) {}

  HyperDual& operator+=(const HyperDual& o) {
    real += o.real;
    e1 += o.e1;
    e2 += o.e2;
    e12 += o.e12;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    real -= o.real;
    e1 -= o.e1;
    e2 -= o.e2;
    e12 -= o.e12;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) {
    *this = HyperDual{real * o.real, real * o.e1 + e1 * o.real, real * o.e2 + e2 * o.real,
                      real * o.e12 + e1 * o.e2 + e2 * o.e1 + e12 * o.real};
    return *this;
  }
  HyperDual& operator/=(const HyperDual& o);
};

// Applies a scalar function with known value, first and second derivative at
// the real part.
constexpr HyperDual lift(const HyperDual& x, double f, double df, double d2f) {
  return {f, df * x.e1, df * x.e2, df * x.e12 + d2f * x.e1 * x.e2};
}

inline HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
inline HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
inline HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }
inline HyperDual operator/(HyperDual a, const HyperDual& b) { return a /= b; }
inline HyperDual operator-(const HyperDual& a) { return {-a.real, -a.e1, -a.e2, -a.e12}; }
inline HyperDual operator+(const HyperDual& a) { return a; }

inline HyperDual operator+(HyperDual a, double b) { a.real += b; return a; }
inline HyperDual operator+(double a, HyperDual b) { b.real += a; return b; }
inline HyperDual operator-(HyperDual a, double b) { a.real -= b; return a; }
inline HyperDual operator-(double a, const HyperDual& b) { return {a - b.real, -b.e1, -b.e2, -b.e12}; }
inline HyperDual operator*(const HyperDual& a, double b) { return {a.real * b, a.e1 * b, a.e2 * b, a.e12 * b}; }
inline HyperDual operator*(double a, const HyperDual& b) { return b * a; }
inline HyperDual operator/(const HyperDual& a, double b) {
  if (b == 0.0) throw EvaluationError("divide", "division by zero");
  return {a.real / b, a.e1 / b, a.e2 / b, a.e12 / b};
}
inline HyperDual operator/(double a, const HyperDual& b) { return HyperDual(a) / b; }

// Comparisons look at the real part only, so branching code runs unchanged.
inline bool operator<(const HyperDual& a, const HyperDual& b) { return a.real < b.real; }
inline bool operator>(const HyperDual& a, const HyperDual& b) { return a.real > b.real; }
inline bool operator<=(const HyperDual& a, const HyperDual& b) { return a.real <= b.real; }
inline bool operator>=(const HyperDual& a, const HyperDual& b) { return a.real >= b.real; }
inline bool operator==(const HyperDual& a, const HyperDual& b) { return a.real == b.real; }

HyperDual sin(const HyperDual& x);
HyperDual cos(const HyperDual& x);
HyperDual tan(const HyperDual& x);
HyperDual exp(const HyperDual& x);
HyperDual log(const HyperDual& x);
HyperDual sqrt(const HyperDual& x);
HyperDual pow(const HyperDual& x, double p);
HyperDual pow(const HyperDual& x, int p);
HyperDual pow(const HyperDual& x, const HyperDual& p);
HyperDual abs(const HyperDual& x);

inline double value_of(double x) { return x; }
inline double value_of(const HyperDual& x) { return x.real; }

/// Checked real-valued counterparts so both scalar paths report domain errors alike.
double checked_log(double x);
double checked_sqrt(double x);

/// Result of probing a function in two directions at once.
struct SecondPartials {
  double value;
  double d_i;
  double d_j;
  double d_ij;
};

using HyperDualFunction = std::function<HyperDual(std::span<const HyperDual>)>;

/// Exact f, df/dx_i, df/dx_j and d2f/dx_i dx_j at x (i == j gives the pure second derivative).
SecondPartials second_partials(const HyperDualFunction& f, std::span<const double> x, std::size_t i, std::size_t j);

/// Dense gradient and Hessian by looping over (i, j) probes.
void gradient_and_hessian(const HyperDualFunction& f, std::span<const double> x, std::vector<double>& gradient,
                          std::vector<double>& hessian_row_major);

}  // namespace bbmesh
