#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hbvm/basis.hpp"
#include "hbvm/errors.hpp"
#include "hbvm/quadrature.hpp"

using namespace hbvm;
using doctest::Approx;

namespace {

// Closed forms of the first orthonormal shifted Legendre polynomials, as
// coefficient lists in x (lowest degree first).
const std::vector<std::vector<double>> kClosedForms = {
    {1.0},
    {-std::sqrt(3.0), 2.0 * std::sqrt(3.0)},
    {std::sqrt(5.0), -6.0 * std::sqrt(5.0), 6.0 * std::sqrt(5.0)},
    {-std::sqrt(7.0), 12.0 * std::sqrt(7.0), -30.0 * std::sqrt(7.0), 20.0 * std::sqrt(7.0)},
};

double poly(const std::vector<double>& coeffs, double x) {
  double s = 0.0;
  for (std::size_t d = coeffs.size(); d-- > 0;) s = s * x + coeffs[d];
  return s;
}

double poly_integral(const std::vector<double>& coeffs, double c) {
  double s = 0.0;
  for (std::size_t d = 0; d < coeffs.size(); ++d) s += coeffs[d] * std::pow(c, d + 1) / (d + 1.0);
  return s;
}

}  // namespace

TEST_CASE("legendre_eval examples") {
  CHECK(legendre_eval(0, 0.37) == 1.0);
  CHECK(legendre_eval(1, 0.5) == Approx(0.0).epsilon(1e-15));
  CHECK(legendre_eval(2, 1.0) == Approx(std::sqrt(5.0)).epsilon(1e-15));
  for (int j = 0; j <= 30; ++j) CHECK(legendre_eval(j, 1.0) == Approx(std::sqrt(2.0 * j + 1)));
}

TEST_CASE("legendre_eval matches closed forms") {
  for (std::size_t j = 0; j < kClosedForms.size(); ++j)
    for (double x : {0.0, 0.1, 0.33, 0.5, 0.71, 1.0})
      CHECK(legendre_eval(static_cast<int>(j), x) == Approx(poly(kClosedForms[j], x)).epsilon(1e-14));
}

TEST_CASE("legendre_eval rejects bad arguments") {
  CHECK_THROWS_AS(legendre_eval(-1, 0.5), std::domain_error);
  CHECK_THROWS_AS(legendre_eval(kMaxLegendreDegree + 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(legendre_eval(2, 1.5), std::domain_error);
  CHECK_THROWS_AS(legendre_antiderivative(-3, 0.5), std::domain_error);

  OrthonormalBasis basis(4);
  CHECK(basis.eval(4, 0.2) == legendre_eval(4, 0.2));
  CHECK_THROWS_AS(basis.eval(5, 0.2), std::domain_error);
  CHECK_THROWS_AS(basis.antiderivative(5, 0.2), std::domain_error);
  CHECK(basis.eval_all(0.3).size() == 5);
}

TEST_CASE("legendre_antiderivative examples") {
  for (double c : {0.0, 0.25, 0.9, 1.0}) CHECK(legendre_antiderivative(0, c) == c);
  for (int j = 1; j <= 40; ++j) CHECK(std::abs(legendre_antiderivative(j, 1.0)) < 1e-13);
  CHECK(legendre_antiderivative(1, 0.5) == Approx(-std::sqrt(3.0) / 4.0).epsilon(1e-15));
  for (std::size_t j = 0; j < kClosedForms.size(); ++j)
    for (double c : {0.05, 0.3, 0.5, 0.8})
      CHECK(legendre_antiderivative(static_cast<int>(j), c) ==
            Approx(poly_integral(kClosedForms[j], c)).epsilon(1e-14));
}

TEST_CASE("antiderivative is consistent with eval (finite differences)") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> pos(0.01, 0.99);
  std::uniform_int_distribution<int> deg(0, 12);
  for (int trial = 0; trial < 20; ++trial) {
    const int j = deg(rng);
    const double c = pos(rng);
    const double step = 1e-6;
    const double fd = (legendre_antiderivative(j, c + step) - legendre_antiderivative(j, c - step)) / (2 * step);
    const double exact = legendre_eval(j, c);
    CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("orthonormality on gauss_rule(12)") {
  const QuadratureRule rule = gauss_rule(12);
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      const double ip = rule.integrate([&](double x) { return legendre_eval(i, x) * legendre_eval(j, x); });
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-13);
    }
}

TEST_CASE("gauss_rule small cases") {
  const auto g1 = gauss_rule(1);
  CHECK(g1.order == 2);
  CHECK(g1.nodes == std::vector<double>{0.5});
  CHECK(g1.weights[0] == Approx(1.0).epsilon(1e-15));

  const auto g2 = gauss_rule(2);
  CHECK(g2.order == 4);
  CHECK(g2.nodes[0] == Approx(0.5 - std::sqrt(3.0) / 6.0).epsilon(1e-15));
  CHECK(g2.nodes[1] == Approx(0.5 + std::sqrt(3.0) / 6.0).epsilon(1e-15));
  CHECK(g2.weights[0] == Approx(0.5).epsilon(1e-15));
  CHECK(g2.weights[1] == Approx(0.5).epsilon(1e-15));

  const auto g3 = gauss_rule(3);
  CHECK(g3.nodes[0] == Approx(0.5 - std::sqrt(15.0) / 10.0).epsilon(1e-15));
  CHECK(g3.nodes[1] == 0.5);
  CHECK(g3.weights[0] == Approx(5.0 / 18.0).epsilon(1e-15));
  CHECK(g3.weights[1] == Approx(4.0 / 9.0).epsilon(1e-15));

  CHECK_THROWS_AS(gauss_rule(0), ValidationError);
}

TEST_CASE("gauss_rule invariants up to k = 50") {
  for (int k = 1; k <= 50; ++k) {
    const auto g = gauss_rule(k);
    REQUIRE(g.size() == k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      sum += g.weights[i];
      CHECK(g.nodes[i] > 0.0);
      CHECK(g.nodes[i] < 1.0);
      CHECK(g.weights[i] > 0.0);
      if (i > 0) CHECK(g.nodes[i] > g.nodes[i - 1]);
      CHECK(std::abs(g.nodes[i] + g.nodes[k - 1 - i] - 1.0) < 1e-14);
      CHECK(std::abs(legendre_eval(k, g.nodes[i])) < 1e-12 * std::sqrt(2.0 * k + 1));
    }
    CHECK(std::abs(sum - 1.0) < 1e-14);
  }
}

TEST_CASE("gauss_rule exactness boundary") {
  for (int k = 1; k <= 10; ++k) {
    const auto g = gauss_rule(k);
    for (int d = 0; d <= 2 * k - 1; ++d) {
      const double v = g.integrate([d](double x) { return std::pow(x, d); });
      CHECK(std::abs(v - 1.0 / (d + 1)) < 1e-13);
    }
    const double v = g.integrate([k](double x) { return std::pow(x, 2 * k); });
    CHECK(std::abs(v - 1.0 / (2 * k + 1)) > 1e-13);
  }
}

TEST_CASE("custom_rule order detection") {
  CHECK(custom_rule({0.0, 0.5, 1.0}, {1.0 / 6, 2.0 / 3, 1.0 / 6}).order == 4);
  CHECK(custom_rule({0.5}, {1.0}).order == 2);
  CHECK(custom_rule({0.0, 1.0}, {0.5, 0.5}).order == 2);
  // Left rectangle rule is only exact on constants.
  CHECK(custom_rule({0.0}, {1.0}).order == 1);
}

TEST_CASE("custom_rule validation") {
  CHECK_THROWS_AS(custom_rule({0.5, 0.5}, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(custom_rule({0.6, 0.4}, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(custom_rule({0.2, 0.8}, {1.5, -0.5}), ValidationError);
  CHECK_THROWS_AS(custom_rule({0.2, 0.8}, {0.5}), ValidationError);
  CHECK_THROWS_AS(custom_rule({-0.1, 0.8}, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(custom_rule({}, {}), ValidationError);
}

TEST_CASE("lobatto_rule") {
  const auto l3 = lobatto_rule(3);
  CHECK(l3.order == 4);
  CHECK(l3.nodes == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(l3.weights[0] == Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(l3.weights[1] == Approx(2.0 / 3.0).epsilon(1e-15));

  const auto l4 = lobatto_rule(4);
  CHECK(l4.order == 6);
  CHECK(l4.nodes[1] == Approx(0.5 - std::sqrt(5.0) / 10.0).epsilon(1e-15));
  CHECK(l4.weights[1] == Approx(5.0 / 12.0).epsilon(1e-15));
  for (int k = 2; k <= 12; ++k) CHECK(lobatto_rule(k).order == 2 * k - 2);
  // Detection by monomials alone sees the small first defect as exact.
  const auto l10 = lobatto_rule(10);
  CHECK(custom_rule(l10.nodes, l10.weights).order >= 18);
}

TEST_CASE("expansion coefficients of a smooth function decay like h^j") {
  // int_0^1 P_j(tau) exp(tau h) dtau = O(h^j)
  const QuadratureRule quad = gauss_rule(20);
  const std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
  for (int j = 1; j <= 4; ++j) {
    std::vector<double> lx, ly;
    for (double h : hs) {
      const double g = quad.integrate([&](double t) { return legendre_eval(j, t) * std::exp(t * h); });
      lx.push_back(std::log(h));
      ly.push_back(std::log(std::abs(g)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
    CHECK(std::abs(sxy / sxx - j) < 0.2);
  }
}
