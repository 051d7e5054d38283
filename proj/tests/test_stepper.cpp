#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "hbvm/errors.hpp"
#include "hbvm/problems.hpp"
#include "hbvm/stepper.hpp"

using namespace hbvm;
using cplx = std::complex<double>;

namespace {

OdeSystem scalar_linear(double lambda) {
  OdeSystem s;
  s.dimension = 1;
  s.rhs = [lambda](std::span<const double> y, std::span<double> out) { out[0] = lambda * y[0]; };
  return s;
}

OdeSystem constant_field(std::vector<double> v) {
  OdeSystem s;
  s.dimension = v.size();
  s.rhs = [v](std::span<const double>, std::span<double> out) {
    std::copy(v.begin(), v.end(), out.begin());
  };
  return s;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// H = p^2/2 + q^6/6, degree 6.
PolynomialHamiltonian sextic() { return PolynomialHamiltonian({{0.5, 0, 2}, {1.0 / 6.0, 6, 0}}); }

}  // namespace

TEST_CASE("zero field converges immediately") {
  const auto sys = constant_field({0.0, 0.0, 0.0});
  const State y0{1.0, -2.0, 3.0};
  const auto sol = solve_stages(build_hbvm(4, 3), sys, y0, 0.3);
  CHECK(sol.converged);
  CHECK(sol.iterations == 1);
  CHECK(sol.residual == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(max_diff(sol.stage(i), y0) == 0.0);
}

TEST_CASE("midpoint stage on the scalar test equation") {
  const double h = 0.1;
  const auto sol = solve_stages(build_hbvm(1, 1), scalar_linear(-1.0), State{1.0}, h);
  CHECK(sol.converged);
  CHECK(sol.stage(0)[0] == doctest::Approx(1.0 / 1.05).epsilon(1e-13));
}

TEST_CASE("Kepler stages converge for a small step") {
  const KeplerProblem kp{0.6};
  StageOptions opt;
  opt.tol = 1e-13;
  const auto sol = solve_stages(build_hbvm(3, 3), kp.system(), kp.initial_state(), 0.01, opt);
  CHECK(sol.converged);
  CHECK(sol.iterations < 30);
  CHECK(sol.residual <= opt.tol * (1.0 + 2.0));
}

TEST_CASE("constant field advances linearly") {
  const auto y = step(build_hbvm(5, 2), constant_field({1.5, -0.25}), State{0.0, 1.0}, 0.2);
  CHECK(y.y1[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(y.y1[1] == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("scalar linear step equals the stability function") {
  for (auto [k, r] : {std::pair{1, 1}, {2, 2}, {3, 3}, {4, 3}, {6, 2}}) {
    const auto tab = build_hbvm(k, r);
    for (double z : {-0.3, -0.05, 0.1}) {
      const auto res = step(tab, scalar_linear(z), State{1.0}, 1.0);
      const auto R = stability_value(tab, z);
      REQUIRE(R);
      CHECK(std::abs(res.y1[0] - R->real()) < 1e-13);
    }
  }
}

TEST_CASE("rotated test system matches R((alpha + i beta) h) (random triples)") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> alpha(-2.0, 0.0), beta(-2.0, 2.0), h(0.01, 0.2);
  std::uniform_real_distribution<double> x(-1.0, 1.0);
  const ButcherTableau tabs[] = {build_hbvm(1, 1), build_hbvm(3, 3), build_hbvm(4, 3), build_hbvm(15, 3)};
  for (int n = 0; n < 25; ++n) {
    const LinearTestProblem prob{alpha(rng), beta(rng)};
    const double hh = h(rng);
    const State x0{x(rng), x(rng)};
    for (const auto& t : tabs) {
      const auto res = step(t, prob.system(), x0, hh);
      const auto R = stability_value(t, cplx(prob.alpha, prob.beta) * hh);
      REQUIRE(R);
      const cplx expect = *R * cplx(x0[0], x0[1]);
      CHECK(std::abs(res.y1[0] - expect.real()) < 1e-12);
      CHECK(std::abs(res.y1[1] - expect.imag()) < 1e-12);
    }
  }
}

TEST_CASE("HBVM(15,3) conserves the Kepler energy over a step") {
  const KeplerProblem kp{0.6};
  const State y0 = kp.initial_state();
  const auto res = step(build_hbvm(15, 3), kp.system(), y0, kKeplerPeriod / 500);
  REQUIRE(res.converged);
  const double h0 = kepler_energy(y0);
  CHECK(std::abs(kepler_energy(res.y1) - h0) / std::abs(h0) <= 1e-12);
}

TEST_CASE("exact conservation for polynomial H of degree <= 2k/r") {
  struct Case {
    PolynomialHamiltonian ham;
    int k, r;
  };
  const std::vector<Case> cases{{quartic_oscillator(), 2, 1}, {quartic_oscillator(), 4, 2},
                                {quartic_oscillator(), 6, 3}, {sextic(), 3, 1},
                                {sextic(), 6, 2}};
  for (const auto& c : cases) {
    const auto tab = build_hbvm(c.k, c.r);
    const auto sys = c.ham.system();
    State y{1.2, -0.4};
    for (int n = 0; n < 50; ++n) {
      const double h0 = c.ham.value(y[0], y[1]);
      const auto res = step(tab, sys, y, 0.1);
      REQUIRE(res.converged);
      CHECK(std::abs(c.ham.value(res.y1[0], res.y1[1]) - h0) <= 1e-12 * (1.0 + std::abs(h0)));
      y = res.y1;
    }
  }
}

TEST_CASE("midpoint does not conserve the quartic energy") {
  const auto ham = quartic_oscillator();
  const auto tab = build_hbvm(1, 1);
  State y{1.0, 0.0};
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const double h0 = ham.value(y[0], y[1]);
    y = step(tab, ham.system(), y, 0.1).y1;
    worst = std::max(worst, std::abs(ham.value(y[0], y[1]) - h0));
  }
  CHECK(worst > 1e-8);
}

TEST_CASE("HBVM(k,2) steps coincide once the quadrature is exact") {
  const auto sys = quartic_oscillator().system();
  const State y0{0.8, 0.3};
  const double h = 0.2;
  const auto a = step(build_hbvm(4, 2), sys, y0, h).y1;
  const auto b = step(build_hbvm(6, 2), sys, y0, h).y1;
  const auto c = step(build_hbvm(10, 2), sys, y0, h).y1;
  CHECK(max_diff(a, b) < 1e-11);
  CHECK(max_diff(a, c) < 1e-11);
  CHECK(max_diff(b, c) < 1e-11);
  // With k = 2 the quadrature is too coarse and the step differs.
  CHECK(max_diff(step(build_hbvm(2, 2), sys, y0, h).y1, a) > 1e-8);
}

TEST_CASE("non-convergence and divergence") {
  const KeplerProblem kp{0.6};
  StageOptions opt;
  opt.max_iter = 2;
  const auto sol = solve_stages(build_hbvm(3, 3), kp.system(), kp.initial_state(), 0.05, opt);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 2);

  OdeSystem blowup;
  blowup.dimension = 1;
  blowup.rhs = [](std::span<const double> y, std::span<double> out) { out[0] = y[0] * y[0]; };
  CHECK_THROWS_AS(solve_stages(build_hbvm(1, 1), blowup, State{1.0}, 10.0), DivergenceError);

  CHECK_THROWS_AS(solve_stages(build_hbvm(1, 1), blowup, State{1.0}, -1.0), ValidationError);
}

TEST_CASE("Newton stage solver agrees with fixed point and handles stiff steps") {
  const KeplerProblem kp{0.6};
  StageOptions newton;
  newton.solver = StageSolver::Newton;
  const auto tab = build_hbvm(4, 3);
  const auto fp = step(tab, kp.system(), kp.initial_state(), 0.02);
  const auto nw = step(tab, kp.system(), kp.initial_state(), 0.02, newton);
  REQUIRE(nw.converged);
  CHECK(max_diff(fp.y1, nw.y1) < 1e-13);

  // Without an analytic Jacobian Newton falls back to finite differences.
  OdeSystem sys = kp.system();
  sys.jacobian = nullptr;
  const auto fd = step(tab, sys, kp.initial_state(), 0.02, newton);
  REQUIRE(fd.converged);
  CHECK(max_diff(fp.y1, fd.y1) < 1e-13);

  const LinearTestProblem stiff{-1.0, 1.0};
  const auto res = step(tab, stiff.system(), State{1.0, 0.0}, 100.0, newton);
  REQUIRE(res.converged);
  const auto R = stability_value(tab, cplx(-100.0, 100.0));
  REQUIRE(R);
  CHECK(std::abs(res.y1[0] - R->real()) < 1e-12);
  CHECK(std::abs(res.y1[1] - R->imag()) < 1e-12);
}

TEST_CASE("step polynomial interpolates the stages") {
  const KeplerProblem kp{0.6};
  const auto tab = build_hbvm(6, 3);
  const auto sys = kp.system();
  const State y0 = kp.initial_state();
  const double h = 0.05;
  const auto res = step(tab, sys, y0, h);
  const auto coeffs = step_polynomial_coefficients(tab, sys, res);
  for (int i = 0; i < tab.stages; ++i)
    CHECK(max_diff(eval_step_polynomial(y0, h, coeffs, tab.truncation, tab.c[i]), res.stage(i)) < 1e-14);
  CHECK(max_diff(eval_step_polynomial(y0, h, coeffs, tab.truncation, 1.0), res.y1) < 1e-14);
  CHECK(max_diff(eval_step_polynomial(y0, h, coeffs, tab.truncation, 0.0), y0) == 0.0);
}
