#include "bbmesh/lgr.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace bbmesh;

namespace {

std::vector<double> powers(const std::vector<double>& pts, int p) {
  std::vector<double> v;
  for (double x : pts) v.push_back(std::pow(x, p));
  return v;
}

}  // namespace

TEST_SUITE("lgr") {

TEST_CASE("one-point rule") {
  const auto r = lgr_rule(1);
  REQUIRE(r.nodes.size() == 1);
  CHECK(r.nodes[0] == -1.0);
  CHECK(r.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("two-point rule from P1 + P2 = 0") {
  // P1 + P2 = (3t^2 + 2t - 1)/2 has roots -1 and 1/3; the weights then follow
  // from w1 = 2/N^2 and exactness on t.
  const auto r = lgr_rule(2);
  CHECK(r.nodes[0] == -1.0);
  CHECK(r.nodes[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.weights[1] == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("five-point rule integrates t^8") {
  const auto r = lgr_rule(5);
  double sum = 0.0, q = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    sum += r.weights[j];
    q += r.weights[j] * std::pow(r.nodes[j], 8);
  }
  CHECK(std::abs(sum - 2.0) < 1e-13);
  CHECK(std::abs(q - 2.0 / 9.0) < 1e-12);
}

TEST_CASE("rule invariants and range checks") {
  for (std::size_t n = 1; n <= 20; ++n) {
    const auto r = lgr_rule(n);
    CHECK(r.nodes.front() == -1.0);
    for (std::size_t j = 1; j < n; ++j) CHECK(r.nodes[j] > r.nodes[j - 1]);
    CHECK(r.nodes.back() < 1.0);
    for (double w : r.weights) CHECK(w > 0.0);
    const auto s = r.support();
    CHECK(s.size() == n + 1);
    CHECK(s.back() == 1.0);
  }
  CHECK_THROWS_AS(lgr_rule(0), std::invalid_argument);
  CHECK_THROWS_AS(lgr_rule(65), std::invalid_argument);
  CHECK(cached_lgr_rule(7) == cached_lgr_rule(7));
}

TEST_CASE("rules of different order share only -1") {
  const auto a = lgr_rule(4), b = lgr_rule(6);
  for (std::size_t i = 1; i < a.nodes.size(); ++i)
    for (double y : b.nodes) CHECK(std::abs(a.nodes[i] - y) > 1e-8);
}

TEST_CASE("differentiation matrix") {
  SUBCASE("N = 1 is the slope of the linear interpolant") {
    const auto d = diff_matrix(lgr_rule(1));
    REQUIRE(d.rows() == 1);
    REQUIRE(d.cols() == 2);
    CHECK(d(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(d(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("rows sum to zero") {
    for (std::size_t n = 1; n <= 10; ++n) {
      const auto d = diff_matrix(lgr_rule(n));
      for (Eigen::Index i = 0; i < d.rows(); ++i) CHECK(std::abs(d.row(i).sum()) < 1e-12);
    }
  }
  SUBCASE("N = 5 differentiates t^3") {
    const auto r = lgr_rule(5);
    const auto d = diff_matrix(r);
    const auto y = powers(r.support(), 3);
    for (std::size_t l = 0; l < 5; ++l) {
      double v = 0.0;
      for (std::size_t j = 0; j < 6; ++j) v += d(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) * y[j];
      CHECK(std::abs(v - 3.0 * r.nodes[l] * r.nodes[l]) < 1e-10);
    }
  }
}

TEST_CASE("random polynomial exactness for N = 1..10") {
  std::mt19937 gen(20240611);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (std::size_t n = 1; n <= 10; ++n) {
    const auto r = lgr_rule(n);
    const auto d = diff_matrix(r);
    const auto s = r.support();
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t qdeg = 2 * n - 2;
      std::vector<double> c(qdeg + 1);
      for (auto& v : c) v = coef(gen);
      double exact = 0.0, approx = 0.0;
      for (std::size_t p = 0; p <= qdeg; ++p) exact += c[p] * (p % 2 == 0 ? 2.0 / static_cast<double>(p + 1) : 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        for (std::size_t p = 0; p <= qdeg; ++p) v += c[p] * std::pow(r.nodes[j], static_cast<int>(p));
        approx += r.weights[j] * v;
      }
      CHECK(std::abs(exact - approx) < 1e-12);

      std::vector<double> b(n + 1);
      for (auto& v : b) v = coef(gen);
      auto poly = [&](double x, bool deriv) {
        double v = 0.0;
        for (std::size_t p = 0; p <= n; ++p) {
          if (!deriv)
            v += b[p] * std::pow(x, static_cast<int>(p));
          else if (p > 0)
            v += b[p] * static_cast<double>(p) * std::pow(x, static_cast<int>(p) - 1);
        }
        return v;
      };
      for (std::size_t l = 0; l < n; ++l) {
        double v = 0.0;
        for (std::size_t j = 0; j <= n; ++j) v += d(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) * poly(s[j], false);
        CHECK(std::abs(v - poly(r.nodes[l], true)) < 1e-10);
      }
    }
  }
}

TEST_CASE("interpolation") {
  const auto r3 = lgr_rule(3);
  CHECK(interpolate(std::vector<double>(4, 2.5), r3, 0.123) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(std::abs(interpolate(powers(r3.support(), 2), r3, 0.5) - 0.25) < 1e-13);

  // exp on the nine-point support: compare with the product form of the
  // same interpolant, and with exp itself up to the interpolation error
  // (about 1.6e-8 at 0.2 for this support).
  const auto r8 = lgr_rule(8);
  const auto s8 = r8.support();
  std::vector<double> e;
  for (double x : s8) e.push_back(std::exp(x));
  double product_form = 0.0;
  for (std::size_t j = 0; j < s8.size(); ++j) {
    double basis = 1.0;
    for (std::size_t m = 0; m < s8.size(); ++m)
      if (m != j) basis *= (0.2 - s8[m]) / (s8[j] - s8[m]);
    product_form += basis * e[j];
  }
  CHECK(std::abs(interpolate(e, r8, 0.2) - product_form) < 1e-13);
  CHECK(std::abs(interpolate(e, r8, 0.2) - std::exp(0.2)) < 2e-8);
  CHECK(interpolate(e, r8, r8.nodes[3]) == e[3]);
}

TEST_CASE("integration matrix reproduces antiderivatives") {
  const auto r = lgr_rule(6);
  const auto s = r.support();
  const Eigen::MatrixXd integ = integration_matrix(r);
  REQUIRE(integ.rows() == 6);
  REQUIRE(integ.cols() == 6);
  // f = t^4 sampled at the nodes, F(t) - F(-1) at support points 2..N+1.
  Eigen::VectorXd f(6);
  for (Eigen::Index j = 0; j < 6; ++j) f[j] = std::pow(r.nodes[static_cast<std::size_t>(j)], 4);
  const Eigen::VectorXd F = integ * f;
  for (Eigen::Index j = 0; j < 6; ++j) {
    const double t = s[static_cast<std::size_t>(j) + 1];
    CHECK(std::abs(F[j] - (std::pow(t, 5) + 1.0) / 5.0) < 1e-12);
  }
}

TEST_CASE("affine time map") {
  CHECK(affine_to_time(-1.0, 0.0, 7.0) == 0.0);
  CHECK(affine_to_time(0.0, 2.0, 4.0) == 3.0);
  CHECK(affine_to_time(1.0, 2.0, 4.0) == 4.0);
  CHECK(std::abs(affine_to_tau(affine_to_time(0.37, 1.5, 9.25), 1.5, 9.25) - 0.37) < 1e-14);
  CHECK_THROWS_AS(affine_to_time(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(affine_to_tau(0.0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("mesh layout") {
  const auto m = MeshLayout::uniform(10, 5);
  CHECK(m.intervals() == 10);
  CHECK(m.total_points() == 50);
  CHECK(m.offset(3) == 15);
  CHECK(m.boundaries.front() == -1.0);
  CHECK(m.boundaries.back() == 1.0);
  CHECK_NOTHROW(m.validate());

  MeshLayout bad = m;
  bad.points_per_interval[2] = 11;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = m;
  bad.points_per_interval[2] = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = m;
  std::swap(bad.boundaries[3], bad.boundaries[4]);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

}  // TEST_SUITE
