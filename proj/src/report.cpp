#include "hbvm/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hbvm/errors.hpp"

namespace hbvm {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_plot_script(const std::filesystem::path& dir, const ExperimentReport& report) {
  std::ofstream py(dir / ("plot_" + report.name + ".py"));
  py << "# Plots the CSV tables written next to this script.\n"
        "import csv\n"
        "import os\n"
        "import matplotlib\n"
        "matplotlib.use('Agg')\n"
        "import matplotlib.pyplot as plt\n\n"
        "HERE = os.path.dirname(os.path.abspath(__file__))\n\n"
        "def load(name):\n"
        "    with open(os.path.join(HERE, name + '.csv')) as f:\n"
        "        rows = list(csv.DictReader(f))\n"
        "    return {k: [float(r[k]) for r in rows] for k in rows[0]} if rows else {}\n\n";
  for (const auto& t : report.tables) {
    if (t.columns.size() < 2) continue;
    const bool loglog = report.name == "converge" || report.name == "gamma";
    py << "data = load('" << t.name << "')\n";
    py << "if data:\n";
    py << "    fig, ax = plt.subplots()\n";
    for (std::size_t c = 1; c < t.columns.size(); ++c) {
      py << "    ax.plot(data['" << t.columns[0] << "'], [abs(v) for v in data['" << t.columns[c]
         << "']], label='" << t.columns[c] << "')\n";
    }
    if (loglog) py << "    ax.set_xscale('log')\n";
    py << "    ax.set_yscale('log')\n";
    py << "    ax.set_xlabel('" << t.columns[0] << "')\n";
    py << "    ax.set_title('" << t.name << "')\n";
    py << "    ax.legend()\n";
    py << "    fig.savefig(os.path.join(HERE, '" << t.name << ".png'), dpi=120)\n\n";
  }
}

}  // namespace

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ValidationError("least_squares needs >= 2 matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("least_squares: all abscissae equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

LineFit log_log_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) throw ValidationError("log_log_fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly);
}

std::vector<double> Table::column(const std::string& col) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] != col) continue;
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
  throw ValidationError("table " + name + " has no column " + col);
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << fmt17(r[c]);
    os << '\n';
  }
}

Verdict within(std::string name, double value, double expected, double tolerance) {
  return {std::move(name), value, expected, tolerance, "|value - expected| <= tolerance",
          std::abs(value - expected) <= tolerance};
}

Verdict at_most(std::string name, double value, double bound) {
  return {std::move(name), value, bound, bound, "value <= tolerance", value <= bound};
}

Verdict at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, bound, "value >= tolerance", value >= bound};
}

bool ExperimentReport::passed() const {
  for (const auto& v : verdicts)
    if (!v.passed) return false;
  return true;
}

const Table* ExperimentReport::table(const std::string& table_name) const {
  for (const auto& t : tables)
    if (t.name == table_name) return &t;
  return nullptr;
}

const Verdict* ExperimentReport::verdict(const std::string& verdict_name) const {
  for (const auto& v : verdicts)
    if (v.name == verdict_name) return &v;
  return nullptr;
}

nlohmann::ordered_json ExperimentReport::to_json(bool with_tables) const {
  nlohmann::ordered_json j;
  j["experiment"] = name;
  j["parameters"] = parameters;
  j["passed"] = passed();
  auto& fs = j["fits"] = nlohmann::ordered_json::array();
  for (const auto& f : fits) {
    fs.push_back({{"name", f.name},
                  {"slope", f.fit.slope},
                  {"intercept", f.fit.intercept},
                  {"residual", f.fit.residual},
                  {"points", f.fit.points}});
  }
  auto& vs = j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    vs.push_back({{"name", v.name},
                  {"passed", v.passed},
                  {"value", v.value},
                  {"expected", v.expected},
                  {"tolerance", v.tolerance},
                  {"relation", v.relation}});
  }
  if (!notes.empty()) j["notes"] = notes;
  if (with_tables) {
    auto& ts = j["tables"] = nlohmann::ordered_json::object();
    for (const auto& t : tables) ts[t.name] = {{"columns", t.columns}, {"rows", t.rows}};
  } else {
    auto& ts = j["tables"] = nlohmann::ordered_json::array();
    for (const auto& t : tables) ts.push_back(t.name + ".csv");
  }
  return j;
}

void ExperimentReport::write(const std::filesystem::path& dir, bool csv_tables) const {
  std::filesystem::create_directories(dir);
  if (csv_tables) {
    for (const auto& t : tables) {
      std::ofstream os(dir / (t.name + ".csv"));
      t.write_csv(os);
    }
    write_plot_script(dir, *this);
  }
  std::ofstream js(dir / "report.json");
  js << to_json(!csv_tables).dump(2) << '\n';
}

void ExperimentReport::merge(const ExperimentReport& other, const std::string& prefix) {
  for (auto t : other.tables) {
    t.name = prefix + t.name;
    tables.push_back(std::move(t));
  }
  for (auto f : other.fits) {
    f.name = prefix + f.name;
    fits.push_back(std::move(f));
  }
  for (auto v : other.verdicts) {
    v.name = prefix + v.name;
    verdicts.push_back(std::move(v));
  }
  for (const auto& n : other.notes) notes.push_back(prefix + n);
}

std::string format_verdicts(const ExperimentReport& report) {
  std::ostringstream os;
  for (const auto& v : report.verdicts) {
    os << (v.passed ? "PASS " : "FAIL ") << v.name << ": value=" << fmt_short(v.value) << " ("
       << v.relation << ", expected=" << fmt_short(v.expected)
       << ", tolerance=" << fmt_short(v.tolerance) << ")\n";
  }
  return os.str();
}

}  // namespace hbvm
