#include "hbvm/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hbvm/errors.hpp"
#include "hbvm/problems.hpp"

namespace hbvm {
namespace {

void record(Trajectory& traj, const OdeSystem& system, double t, const State& y) {
  traj.times.push_back(t);
  traj.states.push_back(y);
  if (system.energy) traj.energies.push_back(system.energy(y));
  traj.lyapunov.push_back(lyapunov(y));
}

// y += delta with a running compensation term (Kahan), keeping the
// accumulated rounding of long fixed-step runs at the unit-roundoff level.
void compensated_add(State& y, State& carry, std::span<const double> delta) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = delta[i] + carry[i];
    const double sum = y[i] + d;
    carry[i] = d - (sum - y[i]);
    y[i] = sum;
  }
}

double inf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

void AdaptiveConfig::validate() const {
  if (!(tol > 0.0)) throw ValidationError("adaptive: Tol must be positive");
  if (!(safety > 0.0 && safety < 1.0)) throw ValidationError("adaptive: safety must lie in (0,1)");
  if (!(h_min > 0.0 && h_min <= h_init && h_init <= h_max)) {
    throw ValidationError("adaptive: need 0 < h_min <= h_init <= h_max");
  }
  if (!(facmax > 1.0)) throw ValidationError("adaptive: facmax must exceed 1");
  if (order && *order < 1) throw ValidationError("adaptive: order must be positive");
}

Trajectory integrate_fixed(const ButcherTableau& tableau, const OdeSystem& system,
                           const State& y0, double h, int n_steps, const StageOptions& options,
                           double t0) {
  if (!(h > 0.0)) throw ValidationError("integrate_fixed: h must be positive");
  if (n_steps < 1) throw ValidationError("integrate_fixed: need at least one step");

  Trajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  record(traj, system, t0, y0);
  State y = y0;
  State carry(y0.size(), 0.0);
  for (int n = 0; n < n_steps; ++n) {
    StepResult res;
    try {
      res = step(tableau, system, y, h, options);
    } catch (const DivergenceError& e) {
      throw IntegrationError(std::string(e.what()) + " at step " + std::to_string(n), n,
                             std::move(traj));
    }
    if (!res.converged) {
      throw IntegrationError("stage equations not converged at step " + std::to_string(n) +
                                 " (residual " + std::to_string(res.residual) + ")",
                             n, std::move(traj));
    }
    compensated_add(y, carry, res.increment);
    // t0 + (n+1) h rather than accumulating, so the grid has no drift.
    record(traj, system, t0 + (n + 1) * h, y);
    traj.steps.push_back({t0 + n * h, h, res.iterations, true, 0.0});
  }
  return traj;
}

LocalErrorEstimate estimate_local_error(const ButcherTableau& tableau, const OdeSystem& system,
                                        std::span<const double> y0, double h,
                                        const StageOptions& options) {
  LocalErrorEstimate est;
  const StepResult coarse = step(tableau, system, y0, h, options);
  est.iterations += coarse.iterations;
  if (!coarse.converged) {
    est.converged = false;
    return est;
  }
  const StepResult half1 = step(tableau, system, y0, 0.5 * h, options);
  est.iterations += half1.iterations;
  if (!half1.converged) {
    est.converged = false;
    return est;
  }
  StepResult half2 = step(tableau, system, half1.y1, 0.5 * h, options);
  est.iterations += half2.iterations;
  if (!half2.converged) {
    est.converged = false;
    return est;
  }
  est.err = inf_distance(half2.y1, coarse.y1) / (std::ldexp(1.0, tableau.order) - 1.0);
  est.y_fine = std::move(half2.y1);
  est.increment.resize(half1.increment.size());
  for (std::size_t i = 0; i < est.increment.size(); ++i)
    est.increment[i] = half1.increment[i] + half2.increment[i];
  return est;
}

double propose_stepsize(double h, double err, double tol, int order, double safety,
                        double facmax, double h_max) {
  const double cap = std::min(h_max, facmax * h);
  if (err <= 0.0) return cap;
  const double proposal = safety * h * std::pow(tol / err, 1.0 / (order + 1.0));
  return std::min(proposal, cap);
}

Trajectory integrate_adaptive(const ButcherTableau& tableau, const OdeSystem& system,
                              const State& y0, double t_end, const AdaptiveConfig& config,
                              double t0) {
  config.validate();
  if (!(t_end > t0)) throw ValidationError("integrate_adaptive: t_end must exceed t0");
  const int order = config.order.value_or(tableau.order);

  Trajectory traj;
  record(traj, system, t0, y0);
  State y = y0;
  State carry(y0.size(), 0.0);
  double t = t0;
  double h = config.h_init;
  while (t < t_end) {
    const bool last = h >= t_end - t;
    const double h_try = last ? t_end - t : h;

    LocalErrorEstimate est;
    try {
      est = estimate_local_error(tableau, system, y, h_try, config.stage);
    } catch (const DivergenceError&) {
      est.converged = false;
    }
    if (!est.converged) {
      traj.rejected.push_back({t, h_try, est.iterations, false, 0.0});
      h = 0.5 * h_try;
      if (h < config.h_min) throw StepsizeUnderflowError(t, h);
      continue;
    }

    const double h_new =
        propose_stepsize(h_try, est.err, config.tol, order, config.safety, config.facmax,
                         config.h_max);
    if (est.err <= config.tol) {
      t = last ? t_end : t + h_try;
      compensated_add(y, carry, est.increment);
      record(traj, system, t, y);
      traj.steps.push_back({traj.times[traj.times.size() - 2], h_try, est.iterations, true, est.err});
    } else {
      traj.rejected.push_back({t, h_try, est.iterations, false, est.err});
    }
    if (t >= t_end) {
      traj.next_stepsize = std::max(h, h_new);
      break;
    }
    if (h_new < config.h_min) {
      throw StepsizeUnderflowError(t, h_new);
    }
    h = h_new;
  }
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t m = traj.states.empty() ? 0 : traj.states.front().size();
  const bool with_energy = !traj.energies.empty();
  os << 't';
  for (std::size_t i = 1; i <= m; ++i) os << ",y_" << i;
  if (with_energy) os << ",H";
  os << ",V,h,err,accepted\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    os << buf;
  };
  for (std::size_t n = 0; n < traj.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[n]);
    os << buf;
    for (double v : traj.states[n]) put(v);
    if (with_energy) put(traj.energies[n]);
    put(traj.lyapunov[n]);
    const StepStat* s = n > 0 ? &traj.steps[n - 1] : nullptr;
    put(s ? s->h : 0.0);
    put(s ? s->err : 0.0);
    os << ',' << 1 << '\n';
  }
}

}  // namespace hbvm
