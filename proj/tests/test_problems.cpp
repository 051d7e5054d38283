#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hbvm/problems.hpp"

using namespace hbvm;

namespace {

// Central-difference gradient check against the analytic gradient.
void check_gradient(const HamiltonianSystem& sys, const State& y) {
  const std::size_t n = sys.dimension();
  State g(n);
  sys.gradient(y, g);
  for (std::size_t i = 0; i < n; ++i) {
    State yp = y, ym = y;
    const double step = 1e-6 * (1.0 + std::abs(y[i]));
    yp[i] += step;
    ym[i] -= step;
    const double fd = (sys.hamiltonian(yp) - sys.hamiltonian(ym)) / (2 * step);
    CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
  }
}

// rhs must equal J grad H with J = [[0, I], [-I, 0]].
void check_canonical(const HamiltonianSystem& sys, const State& y) {
  const std::size_t n = sys.dimension();
  const std::size_t m = n / 2;
  State g(n), f(n);
  sys.gradient(y, g);
  sys.ode().rhs(y, f);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(std::abs(f[i] - g[m + i]) <= 1e-12);
    CHECK(std::abs(f[m + i] + g[i]) <= 1e-12);
  }
}

}  // namespace

TEST_CASE("kepler_initial") {
  CHECK(kepler_initial(0.0) == State{1.0, 0.0, 0.0, 1.0});
  const State s = kepler_initial(0.6);
  CHECK(s[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(s[3] == doctest::Approx(2.0).epsilon(1e-15));
  const State hard = kepler_initial(0.99);
  CHECK(hard[0] == doctest::Approx(0.01).epsilon(1e-13));
  CHECK(hard[3] == doctest::Approx(std::sqrt(199.0)).epsilon(1e-13));
  CHECK_THROWS_AS(kepler_initial(1.0), std::domain_error);
  CHECK_THROWS_AS(kepler_initial(-0.1), std::domain_error);
}

TEST_CASE("kepler_energy") {
  for (double e : {0.0, 0.6, 0.99}) CHECK(kepler_energy(kepler_initial(e)) == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(kepler_energy(State{1.0, 0.0, 0.0, 1.0}) == -0.5);
  CHECK(kepler_energy(State{2.0, 0.0, 0.0, 0.0}) == -0.5);
  CHECK_THROWS_AS(kepler_energy(State{0.0, 0.0, 1.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(kepler_energy(State{1e-9, 0.0, 1.0, 0.0}), std::domain_error);
}

TEST_CASE("Kepler Hamiltonian structure") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto sys = KeplerProblem{0.6}.hamiltonian();
  for (int n = 0; n < 20; ++n) {
    State y{u(rng), u(rng), u(rng), u(rng)};
    if (std::hypot(y[0], y[1]) < 0.2) continue;
    check_gradient(sys, y);
    check_canonical(sys, y);
  }
}

TEST_CASE("closed-form Kepler orbit") {
  for (double e : {0.0, 0.6, 0.99}) {
    const KeplerProblem kp{e};
    const State y0 = kp.initial_state();
    const State back = kp.exact(0.0);
    const State period = kp.exact(3 * kKeplerPeriod);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(back[i] - y0[i]) < 1e-12);
      CHECK(std::abs(period[i] - y0[i]) < 1e-9);
    }
    // Energy and angular momentum along the orbit.
    for (double t : {0.3, 1.7, 3.14159, 5.0}) {
      const State y = kp.exact(t);
      CHECK(kepler_energy(y) == doctest::Approx(-0.5).epsilon(1e-10));
      CHECK(y[0] * y[3] - y[1] * y[2] == doctest::Approx(y0[0] * y0[3]).epsilon(1e-10));
    }
  }
  // The closed form solves the ODE: compare its time derivative with f.
  const KeplerProblem kp{0.6};
  const auto sys = kp.system();
  const double t = 1.1, dt = 1e-5;
  const State yp = kp.exact(t + dt), ym = kp.exact(t - dt), y = kp.exact(t);
  const State f = sys.eval(y);
  for (int i = 0; i < 4; ++i) CHECK(std::abs((yp[i] - ym[i]) / (2 * dt) - f[i]) < 1e-8);
}

TEST_CASE("linear test problem") {
  const LinearTestProblem p{-0.5, 3.0};
  const auto sys = p.system();
  const State f = sys.eval(State{1.0, 2.0});
  CHECK(f[0] == -0.5 - 6.0);
  CHECK(f[1] == 3.0 - 1.0);
  std::vector<double> jac(4);
  sys.jacobian(State{1.0, 2.0}, jac);
  CHECK(jac == std::vector<double>{-0.5, -3.0, 3.0, -0.5});
  const State x = p.exact(State{1.0, 0.0}, 2.0);
  CHECK(x[0] == doctest::Approx(std::exp(-1.0) * std::cos(6.0)));
  CHECK(lyapunov(State{3.0, 4.0}) == 12.5);
}

TEST_CASE("quartic oscillator") {
  const auto q = quartic_oscillator();
  CHECK(q.degree() == 4);
  CHECK(q.value(0.0, 0.0) == 0.0);
  CHECK(q.gradient(1.0, 1.0) == std::array<double, 2>{1.0, 1.0});
  const State f = q.system().eval(State{2.0, 3.0});
  CHECK(f[0] == 3.0);
  CHECK(f[1] == -8.0);
  check_gradient(q.hamiltonian(), State{0.7, -1.3});
  check_canonical(q.hamiltonian(), State{0.7, -1.3});
  CHECK_THROWS_AS(PolynomialHamiltonian({{1.0, -1, 2}}), std::invalid_argument);
}
