#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hbvm {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square of the fit residuals
  std::size_t points = 0;
};

/// Ordinary least squares y ~ slope * x + intercept. Needs >= 2 points.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Least squares on (log x, log y); the slope is the observed power.
LineFit log_log_fit(std::span<const double> x, std::span<const double> y);

/// Named column-oriented table, written as CSV with 17 significant digits.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) { rows.push_back(std::move(row)); }
  std::vector<double> column(const std::string& col) const;
  void write_csv(std::ostream& os) const;
};

struct NamedFit {
  std::string name;
  LineFit fit;
};

/// A pass/fail judgement. `relation` spells out the test, e.g.
/// "|value - expected| <= tolerance" or "value <= tolerance".
struct Verdict {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string relation;
  bool passed = false;
};

Verdict within(std::string name, double value, double expected, double tolerance);
Verdict at_most(std::string name, double value, double bound);
Verdict at_least(std::string name, double value, double bound);

struct ExperimentReport {
  std::string name;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<Table> tables;
  std::vector<NamedFit> fits;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  bool passed() const;
  const Table* table(const std::string& table_name) const;
  const Verdict* verdict(const std::string& verdict_name) const;

  /// Fits, verdicts and parameters; tables included when `with_tables`.
  nlohmann::ordered_json to_json(bool with_tables) const;

  /// One CSV per table (<name>.csv), report.json and plot_<name>.py in dir.
  void write(const std::filesystem::path& dir, bool csv_tables) const;

  /// Append another report's tables, fits and verdicts, prefixing names.
  void merge(const ExperimentReport& other, const std::string& prefix);
};

/// "PASS name: value (relation, expected, tolerance)" lines.
std::string format_verdicts(const ExperimentReport& report);

}  // namespace hbvm
