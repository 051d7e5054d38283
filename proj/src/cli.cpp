#include "hbvm/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbvm/errors.hpp"
#include "hbvm/experiments.hpp"

namespace hbvm::cli {
namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct CommonFlags {
  std::vector<std::string> methods;
  std::string rule_file;
  std::string problem;
  std::string out;
  std::string format = "csv";
  double tol = 1e-10;
  double h = 0.0;
  int periods = 100;
  bool long_run = false;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("bad number in list: '" + item + "'");
    }
  }
  return out;
}

MethodSpec method_from(const std::string& text, const std::string& rule_file) {
  MethodSpec spec = parse_method(text);
  if (spec.rule == RuleKind::File) {
    if (rule_file.empty()) throw ValidationError("rule=file needs --rule-file");
    spec.rule_file = rule_file;
  }
  return spec;
}

std::vector<MethodSpec> methods_from(const CommonFlags& f, const std::string& fallback) {
  std::vector<MethodSpec> out;
  if (f.methods.empty()) out.push_back(method_from(fallback, f.rule_file));
  for (const auto& m : f.methods) out.push_back(method_from(m, f.rule_file));
  return out;
}

// Combine per-method reports under "<slug>_" prefixes when there are several.
ExperimentReport combine(const std::string& name, std::vector<std::pair<MethodSpec, ExperimentReport>> runs) {
  if (runs.size() == 1) return std::move(runs.front().second);
  ExperimentReport all;
  all.name = name;
  auto& list = all.parameters["runs"] = nlohmann::ordered_json::array();
  for (auto& [spec, rep] : runs) {
    list.push_back({{"prefix", spec.slug() + "_"}, {"parameters", rep.parameters}});
    all.merge(rep, spec.slug() + "_");
  }
  return all;
}

int finish(const ExperimentReport& rep, const CommonFlags& f) {
  if (f.format != "csv" && f.format != "json") throw ValidationError("--format must be csv or json");
  if (!f.out.empty()) {
    rep.write(f.out, f.format == "csv");
  } else if (f.format == "json") {
    // Stdout stays a single JSON document; verdicts are inside it.
    std::cout << rep.to_json(true).dump(2) << '\n';
    return rep.passed() ? kExitPass : kExitFail;
  }
  std::cout << format_verdicts(rep);
  for (const auto& n : rep.notes) std::cout << "note: " << n << '\n';
  for (const auto& fit : rep.fits) {
    std::cout << "fit " << fit.name << ": slope=" << fit.fit.slope << '\n';
  }
  return rep.passed() ? kExitPass : kExitFail;
}

void add_common(CLI::App* sub, CommonFlags& f, bool multi_method) {
  if (multi_method) {
    sub->add_option("--method", f.methods, "hbvm:k=K,r=R[,rule=gauss|lobatto|file] (repeatable)");
  } else {
    sub->add_option("--method", f.methods, "hbvm:k=K,r=R[,rule=gauss|lobatto|file]")->expected(1);
  }
  sub->add_option("--rule-file", f.rule_file, "JSON file with nodes/weights for rule=file");
  sub->add_option("--out", f.out, "output directory for CSV/JSON/plot script");
  sub->add_option("--format", f.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"HBVM(k,r) Runge-Kutta methods: tableaus, integration and property checks"};
  // "--h" is the stepsize, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  CommonFlags f;

  // tableau
  auto* tab_cmd = app.add_subcommand("tableau", "print the Butcher tableau as JSON");
  int k = 1, r = 1;
  std::string rule = "gauss";
  bool verify = false;
  tab_cmd->add_option("-k", k, "stages");
  tab_cmd->add_option("-r", r, "truncation index");
  tab_cmd->add_option("--rule", rule, "gauss|lobatto|file")->check(CLI::IsMember({"gauss", "lobatto", "file"}));
  tab_cmd->add_flag("--verify", verify, "check row sums, factorization and Gauss coincidence");
  add_common(tab_cmd, f, false);

  // integrate
  auto* int_cmd = app.add_subcommand("integrate", "integrate a problem and write the trajectory");
  std::string mode = "fixed";
  double t_end = 0.0;
  int steps = 0;
  add_common(int_cmd, f, false);
  int_cmd->add_option("--problem", f.problem, "kepler:e=E | test:alpha=A,beta=B | quartic")->required();
  int_cmd->add_option("--mode", mode, "fixed|adaptive")->check(CLI::IsMember({"fixed", "adaptive"}));
  int_cmd->add_option("--h", f.h, "stepsize (fixed) or initial stepsize (adaptive)");
  int_cmd->add_option("--steps", steps, "number of fixed steps");
  int_cmd->add_option("--t-end", t_end, "final time");
  int_cmd->add_option("--tol", f.tol, "adaptive tolerance");

  // converge
  auto* conv_cmd = app.add_subcommand("converge", "observed order from stepsize halvings");
  std::string h_list;
  double expect_order = NAN;
  double slope_tol = 0.3;
  add_common(conv_cmd, f, true);
  conv_cmd->add_option("--problem", f.problem, "problem spec (default kepler:e=0.6)");
  conv_cmd->add_option("--h-list", h_list, "comma-separated halving stepsizes");
  conv_cmd->add_option("--t-end", t_end, "final time (default one Kepler period / 1)");
  conv_cmd->add_option("--expect-order", expect_order, "expected slope (default min(q,2r))");
  conv_cmd->add_option("--slope-tol", slope_tol, "allowed |slope - expected|");

  // drift
  auto* drift_cmd = app.add_subcommand("drift", "long-time Hamiltonian and solution error on Kepler");
  double max_drift = NAN, expect_exponent = NAN, exponent_tol = 0.3, max_energy = NAN;
  add_common(drift_cmd, f, true);
  drift_cmd->add_option("--problem", f.problem, "kepler:e=E (default kepler:e=0.99)");
  std::string drift_mode = "adaptive";
  drift_cmd->add_option("--mode", drift_mode, "fixed|adaptive (default adaptive)")->check(CLI::IsMember({"fixed", "adaptive"}));
  drift_cmd->add_option("--tol", f.tol, "adaptive tolerance");
  drift_cmd->add_option("--h", f.h, "fixed stepsize");
  drift_cmd->add_option("--periods", f.periods, "number of periods (default 100)");
  drift_cmd->add_flag("--long-run", f.long_run, "1000 periods");
  drift_cmd->add_option("--max-drift", max_drift, "bound on the |dH| slope per period");
  drift_cmd->add_option("--expect-exponent", expect_exponent, "expected error-growth exponent");
  drift_cmd->add_option("--exponent-tol", exponent_tol, "allowed |exponent - expected|");
  drift_cmd->add_option("--max-energy-error", max_energy, "bound on max |dH|");

  // stability
  auto* stab_cmd = app.add_subcommand("stability", "|R(z)| scan and Lyapunov check");
  std::string grid = "-50:0:-50:50:60:60";
  add_common(stab_cmd, f, false);
  stab_cmd->add_option("--grid", grid, "re_min:re_max:im_min:im_max:nx:ny");

  // gamma
  auto* gamma_cmd = app.add_subcommand("gamma", "decay of the expansion coefficients gamma_j");
  int max_index = -1;
  add_common(gamma_cmd, f, false);
  gamma_cmd->add_option("--problem", f.problem, "problem spec (default kepler:e=0.6)");
  gamma_cmd->add_option("--h-list", h_list, "comma-separated stepsizes");
  gamma_cmd->add_option("--max-index", max_index, "highest j (default r-1)");
  gamma_cmd->add_option("--slope-tol", slope_tol, "allowed |slope - j|");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  try {
    if (tab_cmd->parsed()) {
      MethodSpec spec;
      if (!f.methods.empty()) {
        spec = method_from(f.methods.front(), f.rule_file);
      } else {
        spec.k = k;
        spec.r = r;
        spec.rule = rule == "lobatto" ? RuleKind::Lobatto : rule == "file" ? RuleKind::File : RuleKind::Gauss;
        spec.rule_file = f.rule_file;
        if (spec.rule == RuleKind::File && spec.rule_file.empty()) {
          throw ValidationError("--rule file needs --rule-file");
        }
      }
      const ButcherTableau t = make_tableau(spec);
      const std::string json = tableau_to_json(t);
      std::cout << json;
      if (!f.out.empty()) {
        std::filesystem::create_directories(f.out);
        std::ofstream(std::filesystem::path(f.out) / "tableau.json") << json;
      }
      if (!verify) return kExitPass;
      const ExperimentReport rep = verify_tableau(spec, t);
      for (const auto& v : rep.verdicts) {
        std::cout << v.name << ": " << (v.passed ? "PASS" : "FAIL") << " (" << v.value
                  << " <= " << v.tolerance << ")\n";
      }
      return rep.passed() ? kExitPass : kExitFail;
    }

    if (int_cmd->parsed()) {
      const MethodSpec spec = methods_from(f, "hbvm:k=3,r=3").front();
      const ButcherTableau t = make_tableau(spec);
      const ProblemSpec prob = parse_problem(f.problem);
      Trajectory traj;
      if (mode == "fixed") {
        if (!(f.h > 0.0)) throw ValidationError("fixed mode needs --h");
        int n = steps;
        if (n <= 0) {
          if (!(t_end > 0.0)) throw ValidationError("fixed mode needs --steps or --t-end");
          n = static_cast<int>(std::lround(t_end / f.h));
        }
        traj = integrate_fixed(t, prob.system(), prob.initial_state(), f.h, n);
      } else {
        if (!(t_end > 0.0)) throw ValidationError("adaptive mode needs --t-end");
        AdaptiveConfig cfg;
        cfg.tol = f.tol;
        if (f.h > 0.0) cfg.h_init = f.h;
        cfg.h_max = std::max(cfg.h_max, cfg.h_init);
        traj = integrate_adaptive(t, prob.system(), prob.initial_state(), t_end, cfg);
      }
      if (f.out.empty()) {
        write_trajectory_csv(std::cout, traj);
      } else {
        std::filesystem::create_directories(f.out);
        std::ofstream os(std::filesystem::path(f.out) / "trajectory.csv");
        write_trajectory_csv(os, traj);
      }
      return kExitPass;
    }

    if (conv_cmd->parsed()) {
      std::vector<std::pair<MethodSpec, ExperimentReport>> runs;
      for (const auto& spec : methods_from(f, "hbvm:k=3,r=3")) {
        ConvergeOptions o = default_kepler_convergence(spec);
        if (!f.problem.empty()) o.problem = parse_problem(f.problem);
        if (o.problem.kind != ProblemKind::Kepler) {
          o.t_end = 1.0;
          o.stepsizes = {0.1, 0.05, 0.025, 0.0125, 0.00625};
        }
        if (t_end > 0.0) o.t_end = t_end;
        if (!h_list.empty()) o.stepsizes = parse_list(h_list);
        if (!std::isnan(expect_order)) o.expected_order = expect_order;
        o.slope_tolerance = slope_tol;
        runs.emplace_back(spec, run_converge(o));
      }
      return finish(combine("converge", std::move(runs)), f);
    }

    if (drift_cmd->parsed()) {
      std::vector<std::pair<MethodSpec, ExperimentReport>> runs;
      const ProblemSpec prob = parse_problem(f.problem.empty() ? "kepler:e=0.99" : f.problem);
      if (prob.kind != ProblemKind::Kepler) throw ValidationError("drift runs on kepler problems only");
      for (const auto& spec : methods_from(f, "hbvm:k=15,r=3")) {
        DriftOptions o;
        o.method = spec;
        o.eccentricity = prob.eccentricity;
        o.mode = drift_mode == "fixed" ? StepMode::Fixed : StepMode::Adaptive;
        o.tol = f.tol;
        if (f.h > 0.0) o.h = f.h;
        o.periods = f.long_run ? 1000 : f.periods;
        if (!std::isnan(max_drift)) o.max_drift_slope = max_drift;
        if (!std::isnan(expect_exponent)) o.expected_exponent = expect_exponent;
        o.exponent_tolerance = exponent_tol;
        if (!std::isnan(max_energy)) o.max_energy_error = max_energy;
        runs.emplace_back(spec, run_drift(o));
      }
      return finish(combine("drift", std::move(runs)), f);
    }

    if (stab_cmd->parsed()) {
      StabilityOptions o;
      o.method = methods_from(f, "hbvm:k=4,r=3").front();
      const auto g = parse_list([&] {
        std::string s = grid;
        for (char& ch : s)
          if (ch == ':') ch = ',';
        return s;
      }());
      if (g.size() != 6) throw ValidationError("--grid needs re_min:re_max:im_min:im_max:nx:ny");
      o.re_min = g[0];
      o.re_max = g[1];
      o.im_min = g[2];
      o.im_max = g[3];
      o.nx = static_cast<int>(g[4]);
      o.ny = static_cast<int>(g[5]);
      return finish(run_stability(o), f);
    }

    if (gamma_cmd->parsed()) {
      GammaOptions o;
      if (!f.methods.empty()) o.method = method_from(f.methods.front(), f.rule_file);
      o.problem = parse_problem(f.problem.empty() ? "kepler:e=0.6" : f.problem);
      if (!h_list.empty()) o.stepsizes = parse_list(h_list);
      o.max_index = max_index;
      o.slope_tolerance = slope_tol;
      return finish(run_gamma_decay(o), f);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace hbvm::cli
