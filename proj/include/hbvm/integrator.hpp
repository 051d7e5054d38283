#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbvm/stepper.hpp"

namespace hbvm {

struct StepStat {
  double t = 0.0;      // time at the start of the attempt
  double h = 0.0;
  int iterations = 0;  // stage iterations (summed over sub-steps when doubling)
  bool accepted = true;
  double err = 0.0;    // local error estimate, 0 for fixed steps
};

/// Grid values of one integration. Entry i of `steps` produced states[i+1];
/// rejected attempts of the adaptive controller live in `rejected`.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> energies;  // H(y_i), empty if the system has none
  std::vector<double> lyapunov;  // V(y_i) = y_i^T y_i / 2
  std::vector<StepStat> steps;
  std::vector<StepStat> rejected;
  /// Adaptive runs: the controller's stepsize when the run ended, ignoring
  /// the truncation of the final step. Lets a caller continue the run.
  double next_stepsize = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  const State& back() const { return states.back(); }
};

/// Thrown when integrate_fixed cannot converge the stage equations.
/// Carries the trajectory up to the failing step.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, std::size_t step_index, Trajectory partial)
      : std::runtime_error(what), step_index_(step_index), partial_(std::move(partial)) {}

  std::size_t step_index() const noexcept { return step_index_; }
  const Trajectory& partial() const noexcept { return partial_; }

private:
  std::size_t step_index_;
  Trajectory partial_;
};

struct AdaptiveConfig {
  double tol = 1e-8;
  double safety = 0.7;
  std::optional<int> order;  // exponent uses 1/(p+1); defaults to the tableau's p
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 1.0;
  double facmax = 5.0;
  StageOptions stage;

  /// Throws ValidationError unless 0 < h_min <= h_init <= h_max, 0 < safety < 1,
  /// tol > 0 and facmax > 1.
  void validate() const;
};

/// n_steps fixed steps of size h from (t0, y0).
Trajectory integrate_fixed(const ButcherTableau& tableau, const OdeSystem& system,
                           const State& y0, double h, int n_steps,
                           const StageOptions& options = {}, double t0 = 0.0);

struct LocalErrorEstimate {
  double err = 0.0;
  State y_fine;
  State increment;  // y_fine - y0 before rounding into y0
  int iterations = 0;
  bool converged = true;
};

/// Step doubling: err = |y(h/2, h/2) - y(h)|_inf / (2^p - 1); y_fine is the
/// two-half-step result.
LocalErrorEstimate estimate_local_error(const ButcherTableau& tableau, const OdeSystem& system,
                                        std::span<const double> y0, double h,
                                        const StageOptions& options = {});

/// h_new = safety * h * (tol/err)^(1/(p+1)), with err = 0 mapped to the growth
/// cap. The result is capped at min(h_max, facmax * h); the lower bound h_min
/// is enforced by the caller.
double propose_stepsize(double h, double err, double tol, int order, double safety,
                        double facmax, double h_max);

/// Adaptive integration from (t0, y0) to t_end, landing exactly on t_end.
/// Failed stage solves count as rejections with h halved. Throws
/// StepsizeUnderflowError when the controller asks for h < h_min.
Trajectory integrate_adaptive(const ButcherTableau& tableau, const OdeSystem& system,
                              const State& y0, double t_end, const AdaptiveConfig& config,
                              double t0 = 0.0);

/// CSV with header t,y_1..y_m[,H],V,h,err,accepted; one row per grid point,
/// reals printed with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

}  // namespace hbvm
