#include "hbvm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hbvm {
namespace {

double radius_checked(std::span<const double> y) {
  const double r = std::hypot(y[0], y[1]);
  if (r < kCollisionRadius) {
    throw std::domain_error("Kepler collision: |q| = " + std::to_string(r));
  }
  return r;
}

// Solve E - e sin E = M, M in [-pi, pi]. The residual is increasing in E and
// the root lies in [M - e, M + e], so Newton steps leaving the bracket are
// replaced by bisection.
double eccentric_anomaly(double mean_anomaly, double e) {
  double lo = mean_anomaly - e;
  double hi = mean_anomaly + e;
  double E = e > 0.8 ? (mean_anomaly >= 0 ? std::min(hi, std::numbers::pi) : std::max(lo, -std::numbers::pi))
                     : mean_anomaly;
  for (int it = 0; it < 200; ++it) {
    const double g = E - e * std::sin(E) - mean_anomaly;
    if (g > 0) hi = E; else lo = E;
    const double dg = 1.0 - e * std::cos(E);
    double next = E - g / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double delta = std::abs(next - E);
    E = next;
    if (delta <= 1e-14 * std::max(1.0, std::abs(E))) break;
  }
  return E;
}

}  // namespace

State kepler_initial(double e) {
  if (!(e >= 0.0 && e < 1.0)) {
    throw std::domain_error("Kepler eccentricity must lie in [0,1), got " + std::to_string(e));
  }
  return {1.0 - e, 0.0, 0.0, std::sqrt((1.0 + e) / (1.0 - e))};
}

double kepler_energy(std::span<const double> y) {
  const double r = radius_checked(y);
  return 0.5 * (y[2] * y[2] + y[3] * y[3]) - 1.0 / r;
}

HamiltonianSystem KeplerProblem::hamiltonian() const {
  HamiltonianSystem sys;
  sys.degrees_of_freedom = 2;
  sys.hamiltonian = [](std::span<const double> y) { return kepler_energy(y); };
  sys.gradient = [](std::span<const double> y, std::span<double> g) {
    const double r = radius_checked(y);
    const double r3 = r * r * r;
    g[0] = y[0] / r3;
    g[1] = y[1] / r3;
    g[2] = y[2];
    g[3] = y[3];
  };
  sys.hessian = [](std::span<const double> y, std::span<double> h) {
    const double r = radius_checked(y);
    const double r3 = r * r * r;
    const double r5 = r3 * r * r;
    std::fill(h.begin(), h.end(), 0.0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        h[i * 4 + j] = (i == j ? 1.0 / r3 : 0.0) - 3.0 * y[i] * y[j] / r5;
    h[2 * 4 + 2] = 1.0;
    h[3 * 4 + 3] = 1.0;
  };
  return sys;
}

State KeplerProblem::exact(double t) const {
  const double e = eccentricity;
  const double mean_anomaly = std::remainder(t, kKeplerPeriod);
  const double E = eccentric_anomaly(mean_anomaly, e);
  const double cos_e = std::cos(E);
  const double sin_e = std::sin(E);
  const double b = std::sqrt(1.0 - e * e);
  const double denom = 1.0 - e * cos_e;
  return {cos_e - e, b * sin_e, -sin_e / denom, b * cos_e / denom};
}

OdeSystem LinearTestProblem::system() const {
  OdeSystem sys;
  sys.dimension = 2;
  const double a = alpha;
  const double b = beta;
  sys.rhs = [a, b](std::span<const double> x, std::span<double> out) {
    out[0] = a * x[0] - b * x[1];
    out[1] = b * x[0] + a * x[1];
  };
  sys.jacobian = [a, b](std::span<const double>, std::span<double> out) {
    out[0] = a;
    out[1] = -b;
    out[2] = b;
    out[3] = a;
  };
  return sys;
}

State LinearTestProblem::exact(std::span<const double> x0, double t) const {
  const double scale = std::exp(alpha * t);
  const double c = std::cos(beta * t);
  const double s = std::sin(beta * t);
  return {scale * (c * x0[0] - s * x0[1]), scale * (s * x0[0] + c * x0[1])};
}

double lyapunov(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return 0.5 * s;
}

PolynomialHamiltonian::PolynomialHamiltonian(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.q_power < 0 || t.p_power < 0) {
      throw std::invalid_argument("polynomial Hamiltonian: negative power");
    }
    if (t.coefficient != 0.0) degree_ = std::max(degree_, t.q_power + t.p_power);
  }
}

double PolynomialHamiltonian::value(double q, double p) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coefficient * std::pow(q, t.q_power) * std::pow(p, t.p_power);
  return s;
}

std::array<double, 2> PolynomialHamiltonian::gradient(double q, double p) const {
  double dq = 0.0;
  double dp = 0.0;
  for (const auto& t : terms_) {
    if (t.q_power > 0)
      dq += t.coefficient * t.q_power * std::pow(q, t.q_power - 1) * std::pow(p, t.p_power);
    if (t.p_power > 0)
      dp += t.coefficient * t.p_power * std::pow(q, t.q_power) * std::pow(p, t.p_power - 1);
  }
  return {dq, dp};
}

HamiltonianSystem PolynomialHamiltonian::hamiltonian() const {
  HamiltonianSystem sys;
  sys.degrees_of_freedom = 1;
  const PolynomialHamiltonian self = *this;
  sys.hamiltonian = [self](std::span<const double> y) { return self.value(y[0], y[1]); };
  sys.gradient = [self](std::span<const double> y, std::span<double> g) {
    const auto grad = self.gradient(y[0], y[1]);
    g[0] = grad[0];
    g[1] = grad[1];
  };
  sys.hessian = [self](std::span<const double> y, std::span<double> h) {
    const double q = y[0];
    const double p = y[1];
    double hqq = 0.0, hqp = 0.0, hpp = 0.0;
    for (const auto& t : self.terms()) {
      const int a = t.q_power;
      const int b = t.p_power;
      if (a > 1) hqq += t.coefficient * a * (a - 1) * std::pow(q, a - 2) * std::pow(p, b);
      if (a > 0 && b > 0) hqp += t.coefficient * a * b * std::pow(q, a - 1) * std::pow(p, b - 1);
      if (b > 1) hpp += t.coefficient * b * (b - 1) * std::pow(q, a) * std::pow(p, b - 2);
    }
    h[0] = hqq;
    h[1] = hqp;
    h[2] = hqp;
    h[3] = hpp;
  };
  return sys;
}

PolynomialHamiltonian quartic_oscillator() {
  return PolynomialHamiltonian({{0.5, 0, 2}, {0.25, 4, 0}});
}

}  // namespace hbvm
