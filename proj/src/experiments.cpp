#include "hbvm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

#include "hbvm/basis.hpp"
#include "hbvm/errors.hpp"

namespace hbvm {
namespace {

double inf_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

nlohmann::ordered_json tableau_parameters(const ButcherTableau& t) {
  return {{"k", t.stages}, {"r", t.truncation}, {"q", t.rule_order}, {"p", t.order},
          {"rule", t.rule_name}};
}

std::vector<std::string> trajectory_columns(std::size_t m, bool with_energy) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 1; i <= m; ++i) cols.push_back("y_" + std::to_string(i));
  if (with_energy) cols.push_back("H");
  for (const char* c : {"V", "h", "err", "accepted"}) cols.emplace_back(c);
  return cols;
}

// Appends grid rows of `traj` to `table`, skipping the first row when `skip_first`.
void append_trajectory(Table& table, const Trajectory& traj, bool skip_first) {
  for (std::size_t n = skip_first ? 1 : 0; n < traj.size(); ++n) {
    std::vector<double> row{traj.times[n]};
    row.insert(row.end(), traj.states[n].begin(), traj.states[n].end());
    if (!traj.energies.empty()) row.push_back(traj.energies[n]);
    row.push_back(traj.lyapunov[n]);
    const StepStat* s = n > 0 ? &traj.steps[n - 1] : nullptr;
    row.push_back(s ? s->h : 0.0);
    row.push_back(s ? s->err : 0.0);
    row.push_back(1.0);
    table.add_row(std::move(row));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ConvergeOptions default_kepler_convergence(const MethodSpec& method) {
  ConvergeOptions o;
  o.method = method;
  o.problem = ProblemSpec{ProblemKind::Kepler, 0.6, -1.0, 0.0};
  for (int n = 100; n <= 1600; n *= 2) o.stepsizes.push_back(kKeplerPeriod / n);
  o.t_end = kKeplerPeriod;
  return o;
}

ExperimentReport run_converge(const ConvergeOptions& o) {
  if (o.stepsizes.size() < 3) throw ValidationError("converge needs at least 3 stepsizes");
  for (std::size_t i = 1; i < o.stepsizes.size(); ++i) {
    if (std::abs(o.stepsizes[i] - 0.5 * o.stepsizes[i - 1]) > 1e-12 * o.stepsizes[i - 1]) {
      throw ValidationError("converge stepsizes must halve successively");
    }
  }
  const ButcherTableau tab = make_tableau(o.method);
  const OdeSystem sys = o.problem.system();
  const State y0 = o.problem.initial_state();

  ExperimentReport rep;
  rep.name = "converge";
  rep.parameters["method"] = o.method.label();
  rep.parameters["tableau"] = tableau_parameters(tab);
  rep.parameters["problem"] = o.problem.label();
  rep.parameters["t_end"] = o.t_end;
  rep.parameters["error_norm"] = "inf";

  State reference;
  if (auto exact = o.problem.exact(o.t_end)) {
    reference = *exact;
    rep.parameters["reference"] = "closed form";
  } else {
    const double h_ref = o.stepsizes.back() / 8.0;
    const int n_ref = static_cast<int>(std::lround(o.t_end / h_ref));
    reference = integrate_fixed(build_hbvm(15, 3), sys, y0, o.t_end / n_ref, n_ref, o.stage).back();
    rep.parameters["reference"] = "hbvm:k=15,r=3 at h_min/8";
  }

  Table table{"converge", {"h", "steps", "error", "mean_iterations"}, {}};
  for (double h : o.stepsizes) {
    const int n = static_cast<int>(std::lround(o.t_end / h));
    if (n < 1 || std::abs(n * h - o.t_end) > 1e-9 * o.t_end) {
      throw ValidationError("t_end is not a multiple of h = " + std::to_string(h));
    }
    const Trajectory traj = integrate_fixed(tab, sys, y0, o.t_end / n, n, o.stage);
    double iters = 0.0;
    for (const auto& s : traj.steps) iters += s.iterations;
    table.add_row({h, static_cast<double>(n), inf_distance(traj.back(), reference),
                   iters / traj.steps.size()});
  }
  const LineFit fit = log_log_fit(table.column("h"), table.column("error"));
  rep.fits.push_back({"order", fit});
  rep.tables.push_back(std::move(table));
  const double expected = o.expected_order.value_or(tab.order);
  rep.verdicts.push_back(within("order", fit.slope, expected, o.slope_tolerance));
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_drift(const DriftOptions& o) {
  if (o.periods < 2) throw ValidationError("drift needs at least 2 periods");
  const KeplerProblem kepler{o.eccentricity};
  const OdeSystem sys = kepler.system();
  const State y0 = kepler.initial_state();
  const double h0 = kepler_energy(y0);
  const ButcherTableau tab = make_tableau(o.method);

  ExperimentReport rep;
  rep.name = "drift";
  rep.parameters["method"] = o.method.label();
  rep.parameters["tableau"] = tableau_parameters(tab);
  rep.parameters["problem"] = "kepler:e=" + std::to_string(o.eccentricity);
  rep.parameters["mode"] = o.mode == StepMode::Adaptive ? "adaptive" : "fixed";
  rep.parameters["periods"] = o.periods;
  rep.parameters["error_norm"] = "inf";

  Table periods{"periods",
                {"period", "t", "energy_error", "signed_energy_error", "solution_error", "steps",
                 "rejected"},
                {}};
  Table trajectory{"trajectory", trajectory_columns(4, true), {}};
  std::size_t total_steps = 0, total_rejected = 0;

  auto add_period = [&](int n, const State& y, std::size_t steps, std::size_t rejected) {
    const double t = n * kKeplerPeriod;
    const double dh = kepler_energy(y) - h0;
    periods.add_row({static_cast<double>(n), t, std::abs(dh), dh,
                     inf_distance(y, kepler.exact(t)), static_cast<double>(steps),
                     static_cast<double>(rejected)});
  };

  bool completed = true;
  try {
    if (o.mode == StepMode::Fixed) {
      const int per_period = std::max(1, static_cast<int>(std::lround(kKeplerPeriod / o.h)));
      const double h = kKeplerPeriod / per_period;
      rep.parameters["h"] = h;
      const Trajectory traj = integrate_fixed(tab, sys, y0, h, per_period * o.periods);
      append_trajectory(trajectory, traj, false);
      total_steps = traj.steps.size();
      for (int n = 1; n <= o.periods; ++n) {
        add_period(n, traj.states[static_cast<std::size_t>(n) * per_period], per_period, 0);
      }
    } else {
      AdaptiveConfig cfg = o.adaptive;
      cfg.tol = o.tol;
      rep.parameters["tol"] = o.tol;
      rep.parameters["safety"] = cfg.safety;
      rep.parameters["facmax"] = cfg.facmax;
      rep.parameters["h_init"] = cfg.h_init;
      rep.parameters["h_max"] = cfg.h_max;
      rep.parameters["local_error"] = "step doubling with local extrapolation";
      State y = y0;
      for (int n = 1; n <= o.periods; ++n) {
        const Trajectory traj =
            integrate_adaptive(tab, sys, y, n * kKeplerPeriod, cfg, (n - 1) * kKeplerPeriod);
        append_trajectory(trajectory, traj, n > 1);
        y = traj.back();
        cfg.h_init = std::clamp(traj.next_stepsize, cfg.h_min, cfg.h_max);
        total_steps += traj.steps.size();
        total_rejected += traj.rejected.size();
        add_period(n, y, traj.steps.size(), traj.rejected.size());
      }
    }
  } catch (const std::exception& e) {
    completed = false;
    rep.notes.push_back(std::string("integration failed: ") + e.what());
  }
  rep.verdicts.push_back(at_least("completed", completed ? 1.0 : 0.0, 1.0));
  rep.parameters["total_steps"] = total_steps;
  rep.parameters["total_rejected"] = total_rejected;

  if (periods.rows.size() >= 2) {
    const LineFit drift = least_squares(periods.column("period"), periods.column("energy_error"));
    rep.fits.push_back({"energy_drift_per_period", drift});
    const auto err = periods.column("solution_error");
    const bool positive = std::all_of(err.begin(), err.end(), [](double v) { return v > 0.0; });
    if (positive) {
      const LineFit growth = log_log_fit(periods.column("t"), err);
      rep.fits.push_back({"error_growth_exponent", growth});
      if (o.expected_exponent) {
        rep.verdicts.push_back(
            within("error_growth_exponent", growth.slope, *o.expected_exponent, o.exponent_tolerance));
      }
    }
    if (o.max_drift_slope) {
      rep.verdicts.push_back(at_most("energy_drift_per_period", drift.slope, *o.max_drift_slope));
    }
    if (o.max_energy_error) {
      const auto e = periods.column("energy_error");
      rep.verdicts.push_back(
          at_most("max_energy_error", *std::max_element(e.begin(), e.end()), *o.max_energy_error));
    }
  }
  rep.tables.push_back(std::move(periods));
  rep.tables.push_back(std::move(trajectory));
  return rep;
}

// ---------------------------------------------------------------------------

ExperimentReport run_stability(const StabilityOptions& o) {
  const ButcherTableau tab = make_tableau(o.method);
  const bool theorem_applies = tab.rule_order >= 2 * tab.truncation;

  ExperimentReport rep;
  rep.name = "stability";
  rep.parameters["method"] = o.method.label();
  rep.parameters["tableau"] = tableau_parameters(tab);
  rep.parameters["grid"] = {{"re", {o.re_min, o.re_max}}, {"im", {o.im_min, o.im_max}},
                            {"nx", o.nx}, {"ny", o.ny}};
  rep.parameters["q_ge_2r"] = theorem_applies;

  Table grid{"grid", {"re", "im", "abs_R"}, {}};
  double max_abs = 0.0;
  int poles = 0;
  for (int i = 0; i < o.nx; ++i) {
    const double re = o.nx > 1 ? o.re_min + i * (o.re_max - o.re_min) / (o.nx - 1) : o.re_min;
    for (int j = 0; j < o.ny; ++j) {
      const double im = o.ny > 1 ? o.im_min + j * (o.im_max - o.im_min) / (o.ny - 1) : o.im_min;
      const auto r = stability_value(tab, {re, im});
      if (!r) {
        ++poles;
        continue;
      }
      grid.add_row({re, im, std::abs(*r)});
      max_abs = std::max(max_abs, std::abs(*r));
    }
  }
  rep.parameters["poles_on_grid"] = poles;

  Table axis{"imaginary_axis", {"y", "abs_R_minus_1"}, {}};
  double max_axis = 0.0;
  for (double y : o.imaginary_samples) {
    const auto r = stability_value(tab, {0.0, y});
    const double dev = r ? std::abs(std::abs(*r) - 1.0) : INFINITY;
    axis.add_row({y, dev});
    max_axis = std::max(max_axis, dev);
  }

  Table lyap{"lyapunov", {"alpha", "h", "steps", "max_relative_change", "increases"}, {}};
  StageOptions newton;
  newton.solver = StageSolver::Newton;
  for (double alpha : {-1.0, 0.0}) {
    const LinearTestProblem prob{alpha, o.beta};
    for (double h : o.stepsizes) {
      const int steps = alpha < 0.0 ? o.steps_dissipative : o.steps_conservative;
      const Trajectory traj = integrate_fixed(tab, prob.system(), {1.0, 0.0}, h, steps, newton);
      const double v0 = traj.lyapunov.front();
      double max_change = 0.0;
      int increases = 0;
      for (std::size_t n = 1; n < traj.size(); ++n) {
        max_change = std::max(max_change, std::abs(traj.lyapunov[n] - v0) / v0);
        if (!(traj.lyapunov[n] < traj.lyapunov[n - 1])) ++increases;
      }
      lyap.add_row({alpha, h, static_cast<double>(steps), max_change, static_cast<double>(increases)});
      if (!theorem_applies) continue;
      char tag[32];
      std::snprintf(tag, sizeof tag, "h=%g", h);
      if (alpha < 0.0) {
        rep.verdicts.push_back(at_most(std::string("lyapunov_decrease_violations(alpha=-1,") + tag + ")",
                                       increases, 0.0));
      } else {
        rep.verdicts.push_back(at_most(std::string("lyapunov_conservation(alpha=0,") + tag + ")", max_change,
                                       o.lyapunov_tolerance));
      }
    }
  }

  if (theorem_applies) {
    rep.verdicts.push_back(at_most("max_abs_R_left_half_plane", max_abs, 1.0 + o.bound_tolerance));
    rep.verdicts.push_back(at_most("imaginary_axis_deviation", max_axis, o.bound_tolerance));
  } else {
    rep.notes.push_back("q < 2r: perfect A-stability is not claimed for this method");
  }
  rep.tables.push_back(std::move(grid));
  rep.tables.push_back(std::move(axis));
  rep.tables.push_back(std::move(lyap));
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<double> gamma_magnitudes(const ButcherTableau& tab, const OdeSystem& sys,
                                     const State& y0, double h, int max_index,
                                     int quadrature_points, const StageOptions& stage) {
  const StageSolution sol = solve_stages(tab, sys, y0, h, stage);
  if (!sol.converged) throw DivergenceError("gamma: stage equations did not converge");
  const std::vector<double> coeffs = step_polynomial_coefficients(tab, sys, sol);
  const QuadratureRule quad = gauss_rule(quadrature_points);
  const std::size_t m = sys.dimension;

  std::vector<double> gamma(static_cast<std::size_t>(max_index + 1) * m, 0.0);
  std::vector<double> p(max_index + 1);
  State f(m);
  for (int i = 0; i < quad.size(); ++i) {
    const State u = eval_step_polynomial(y0, h, coeffs, tab.truncation, quad.nodes[i]);
    sys.rhs(u, f);
    legendre_eval_all(quad.nodes[i], p);
    for (int j = 0; j <= max_index; ++j)
      for (std::size_t d = 0; d < m; ++d) gamma[j * m + d] += quad.weights[i] * p[j] * f[d];
  }
  std::vector<double> out(max_index + 1, 0.0);
  for (int j = 0; j <= max_index; ++j)
    for (std::size_t d = 0; d < m; ++d) out[j] = std::max(out[j], std::abs(gamma[j * m + d]));
  return out;
}

ExperimentReport run_gamma_decay(const GammaOptions& o) {
  if (o.stepsizes.size() < 2) throw ValidationError("gamma needs at least 2 stepsizes");
  const ButcherTableau tab = make_tableau(o.method);
  const int jmax = o.max_index >= 0 ? o.max_index : tab.truncation - 1;
  const OdeSystem sys = o.problem.system();
  const State y0 = o.problem.initial_state();

  ExperimentReport rep;
  rep.name = "gamma";
  rep.parameters["method"] = o.method.label();
  rep.parameters["problem"] = o.problem.label();
  rep.parameters["max_index"] = jmax;
  rep.parameters["quadrature_points"] = o.quadrature_points;

  Table table{"gamma", {"h"}, {}};
  for (int j = 0; j <= jmax; ++j) table.columns.push_back("gamma_" + std::to_string(j));
  for (double h : o.stepsizes) {
    std::vector<double> row{h};
    const auto g = gamma_magnitudes(tab, sys, y0, h, jmax, o.quadrature_points);
    row.insert(row.end(), g.begin(), g.end());
    table.add_row(std::move(row));
  }
  const auto hs = table.column("h");
  for (int j = 0; j <= jmax; ++j) {
    const std::string col = "gamma_" + std::to_string(j);
    const auto g = table.column(col);
    if (*std::max_element(g.begin(), g.end()) <= 1e-300) {
      rep.notes.push_back(col + " vanishes identically");
      continue;
    }
    const LineFit fit = log_log_fit(hs, g);
    rep.fits.push_back({col, fit});
    rep.verdicts.push_back(within(col + "_slope", fit.slope, j,
                                  j == 0 ? o.zero_slope_tolerance : o.slope_tolerance));
  }
  rep.tables.push_back(std::move(table));
  return rep;
}

// ---------------------------------------------------------------------------

ButcherTableau published_gauss_tableau(int r) {
  ButcherTableau t;
  t.stages = r;
  t.truncation = r;
  t.rule_order = 2 * r;
  t.order = 2 * r;
  t.rule_name = "gauss";
  t.A = SquareMatrix(r);
  switch (r) {
    case 1:
      t.A(0, 0) = 0.5;
      t.b = {1.0};
      t.c = {0.5};
      break;
    case 2: {
      const double s = std::sqrt(3.0) / 6.0;
      t.A(0, 0) = 0.25;
      t.A(0, 1) = 0.25 - s;
      t.A(1, 0) = 0.25 + s;
      t.A(1, 1) = 0.25;
      t.b = {0.5, 0.5};
      t.c = {0.5 - s, 0.5 + s};
      break;
    }
    case 3: {
      const double s = std::sqrt(15.0);
      const double a[3][3] = {{5.0 / 36.0, 2.0 / 9.0 - s / 15.0, 5.0 / 36.0 - s / 30.0},
                              {5.0 / 36.0 + s / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s / 24.0},
                              {5.0 / 36.0 + s / 30.0, 2.0 / 9.0 + s / 15.0, 5.0 / 36.0}};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t.A(i, j) = a[i][j];
      t.b = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
      t.c = {0.5 - s / 10.0, 0.5, 0.5 + s / 10.0};
      break;
    }
    default:
      throw ValidationError("published Gauss tableau only for r = 1, 2, 3");
  }
  return t;
}

double tableau_distance(const ButcherTableau& a, const ButcherTableau& b) {
  if (a.stages != b.stages) return INFINITY;
  double d = 0.0;
  for (int i = 0; i < a.stages; ++i) {
    d = std::max({d, std::abs(a.b[i] - b.b[i]), std::abs(a.c[i] - b.c[i])});
    for (int j = 0; j < a.stages; ++j) d = std::max(d, std::abs(a.A(i, j) - b.A(i, j)));
  }
  return d;
}

ExperimentReport verify_tableau(const MethodSpec& method, const ButcherTableau& tab) {
  ExperimentReport rep;
  rep.name = "tableau";
  rep.parameters["method"] = method.label();
  rep.parameters["tableau"] = tableau_parameters(tab);

  rep.verdicts.push_back(at_most("row_sum", tab.row_sum_defect(), 1e-13));
  if (method.rule == RuleKind::Gauss) {
    rep.verdicts.push_back(at_most("factorization", verify_factorization(tab.stages, tab.truncation), 1e-12));
    if (tab.stages == tab.truncation) {
      double defect = 0.0;
      if (tab.stages <= 3) {
        defect = tableau_distance(tab, published_gauss_tableau(tab.stages));
      } else {
        // Collocation conditions sum_j a_ij c_j^(l-1) = c_i^l / l, l = 1..k.
        for (int i = 0; i < tab.stages; ++i)
          for (int l = 1; l <= tab.stages; ++l) {
            double s = 0.0;
            for (int j = 0; j < tab.stages; ++j) s += tab.A(i, j) * std::pow(tab.c[j], l - 1);
            defect = std::max(defect, std::abs(s - std::pow(tab.c[i], l) / l));
          }
      }
      rep.verdicts.push_back(at_most("gauss_coincidence", defect, 1e-12));
    }
  }
  return rep;
}

}  // namespace hbvm
