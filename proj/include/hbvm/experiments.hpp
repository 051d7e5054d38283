#pragma once

// Experiment drivers behind the CLI subcommands. Each returns a report with
// the raw per-run data, fitted slopes and pass/fail verdicts.

#include <optional>
#include <vector>

#include "hbvm/integrator.hpp"
#include "hbvm/method_spec.hpp"
#include "hbvm/report.hpp"

namespace hbvm {

// --- order of convergence --------------------------------------------------

struct ConvergeOptions {
  MethodSpec method;
  ProblemSpec problem;
  /// At least 3 stepsizes, each half the previous; t_end must be a multiple of each.
  std::vector<double> stepsizes;
  double t_end = kKeplerPeriod;
  /// Expected slope; defaults to the tableau's min(q, 2r).
  std::optional<double> expected_order;
  double slope_tolerance = 0.3;
  StageOptions stage;
};

/// Kepler e=0.6 defaults: h = 2*pi/N, N = 100..1600, one period.
ConvergeOptions default_kepler_convergence(const MethodSpec& method);

/// Error at t_end against the closed-form solution when the problem has one,
/// else against HBVM(15,3) at the smallest h / 8.
ExperimentReport run_converge(const ConvergeOptions& options);

// --- Hamiltonian drift and error growth ------------------------------------

enum class StepMode { Fixed, Adaptive };

struct DriftOptions {
  MethodSpec method;
  double eccentricity = 0.99;
  StepMode mode = StepMode::Adaptive;
  int periods = 100;
  double tol = 1e-10;                // adaptive
  double h = kKeplerPeriod / 200.0;  // fixed; rounded to a divisor of the period
  AdaptiveConfig adaptive;           // tol and order filled in from above
  /// Optional expectations turned into verdicts.
  std::optional<double> max_drift_slope;
  std::optional<double> expected_exponent;
  double exponent_tolerance = 0.3;
  std::optional<double> max_energy_error;
};

/// Integrates the Kepler problem period by period. Per period it records
/// |H - H0| and the infinity-norm error against the closed-form orbit, then
/// fits the drift slope of |H - H0| per period and the power of the solution
/// error in time. The full grid trajectory is kept as the `trajectory` table.
ExperimentReport run_drift(const DriftOptions& options);

// --- linear stability -------------------------------------------------------

struct StabilityOptions {
  MethodSpec method;
  double re_min = -50.0, re_max = 0.0;
  double im_min = -50.0, im_max = 50.0;
  int nx = 60, ny = 60;
  std::vector<double> imaginary_samples{0.1, 1.0, 10.0, 40.0};
  std::vector<double> stepsizes{0.1, 1.0, 10.0, 100.0};
  double beta = 1.0;
  int steps_conservative = 1000;  // alpha = 0
  int steps_dissipative = 100;    // alpha = -1
  double bound_tolerance = 1e-10;
  double lyapunov_tolerance = 1e-11;
};

/// |R(z)| over the grid, ||R(iy)| - 1| on the imaginary axis (when q >= 2r),
/// and the sign of V(x_{n+1}) - V(x_n) along the rotated test system.
ExperimentReport run_stability(const StabilityOptions& options);

// --- decay of the expansion coefficients ------------------------------------

struct GammaOptions {
  MethodSpec method{5, 5, RuleKind::Gauss, {}};
  ProblemSpec problem;
  std::vector<double> stepsizes{0.1, 0.05, 0.025, 0.0125};
  int max_index = -1;  // highest j; defaults to r - 1
  double slope_tolerance = 0.3;
  double zero_slope_tolerance = 0.2;
  int quadrature_points = 40;
};

/// gamma_j(u) = int_0^1 P_j(tau) f(u(t0 + tau h)) dtau along the converged
/// step polynomial u, by Gauss quadrature; log-log slope of |gamma_j| vs h.
ExperimentReport run_gamma_decay(const GammaOptions& options);

/// Per-coefficient values for one step, used by run_gamma_decay.
std::vector<double> gamma_magnitudes(const ButcherTableau& tableau, const OdeSystem& system,
                                     const State& y0, double h, int max_index,
                                     int quadrature_points, const StageOptions& stage = {});

// --- tableau checks ---------------------------------------------------------

/// Classical r-stage Gauss tableau for r = 1, 2, 3 (closed forms).
ButcherTableau published_gauss_tableau(int r);

/// Largest |a_ij - a'_ij|, |b_i - b'_i|, |c_i - c'_i|.
double tableau_distance(const ButcherTableau& a, const ButcherTableau& b);

/// Row sums, factorization (Gauss nodes) and coincidence with the Gauss
/// method (k == r). Checks that do not apply are omitted.
ExperimentReport verify_tableau(const MethodSpec& method, const ButcherTableau& tableau);

}  // namespace hbvm
