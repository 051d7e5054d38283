#include "hbvm/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hbvm/basis.hpp"
#include "hbvm/errors.hpp"

namespace hbvm {
namespace {

// log10 of the pole threshold on |det(I - zA)| / prod(row norms).
constexpr double kLogPoleThreshold = -300.0;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_array(std::ostringstream& os, const double* first, std::size_t n) {
  os << '[';
  for (std::size_t i = 0; i < n; ++i) {
    if (i) os << ", ";
    os << format_real(first[i]);
  }
  os << ']';
}

}  // namespace

double ButcherTableau::row_sum_defect() const {
  double worst = 0.0;
  for (int i = 0; i < stages; ++i) {
    double sum = 0.0;
    for (int j = 0; j < stages; ++j) sum += A(i, j);
    worst = std::max(worst, std::abs(sum - c[i]));
  }
  return worst;
}

ButcherTableau build_hbvm(int k, int r, const QuadratureRule& rule) {
  if (r < 1) throw ValidationError("HBVM needs r >= 1, got r=" + std::to_string(r));
  if (k < r) {
    throw ValidationError("HBVM needs k >= r, got k=" + std::to_string(k) +
                          ", r=" + std::to_string(r));
  }
  if (rule.size() != k) {
    throw ValidationError("HBVM(" + std::to_string(k) + "," + std::to_string(r) + ") needs a " +
                          std::to_string(k) + "-node rule, got " + std::to_string(rule.size()));
  }
  if (rule.order < k) {
    throw ValidationError("quadrature order " + std::to_string(rule.order) +
                          " is below the stage count " + std::to_string(k));
  }

  ButcherTableau t;
  t.stages = k;
  t.truncation = r;
  t.rule_order = rule.order;
  t.order = std::min(rule.order, 2 * r);
  t.rule_name = rule.name;
  t.b = rule.weights;
  t.c = rule.nodes;
  t.A = SquareMatrix(k);

  // basis[j][l] = P_l(c_j), integral[i][l] = int_0^{c_i} P_l.
  std::vector<std::vector<double>> basis(k, std::vector<double>(r));
  std::vector<std::vector<double>> integral(k, std::vector<double>(r));
  for (int i = 0; i < k; ++i) {
    legendre_eval_all(t.c[i], basis[i]);
    for (int l = 0; l < r; ++l) integral[i][l] = legendre_antiderivative(l, t.c[i]);
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int l = 0; l < r; ++l) s += basis[j][l] * integral[i][l];
      t.A(i, j) = t.b[j] * s;
    }
  }
  return t;
}

ButcherTableau build_hbvm(int k, int r) { return build_hbvm(k, r, gauss_rule(k)); }

double verify_factorization(int k, int r) {
  const QuadratureRule rule = gauss_rule(k);
  const ButcherTableau hbvm = build_hbvm(k, r, rule);
  const ButcherTableau gauss = build_hbvm(k, k, rule);

  // M = P P^T Omega, then compare A against G M.
  std::vector<std::vector<double>> p(k, std::vector<double>(r));
  for (int i = 0; i < k; ++i) legendre_eval_all(rule.nodes[i], p[i]);
  SquareMatrix m(k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int l = 0; l < r; ++l) s += p[i][l] * p[j][l];
      m(i, j) = s * rule.weights[j];
    }

  double worst = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int l = 0; l < k; ++l) s += gauss.A(i, l) * m(l, j);
      worst = std::max(worst, std::abs(hbvm.A(i, j) - s));
    }
  return worst;
}

std::optional<std::complex<double>> stability_value(const ButcherTableau& tableau,
                                                    std::complex<double> z) {
  using cplx = std::complex<double>;
  const int k = tableau.stages;
  std::vector<cplx> m(static_cast<std::size_t>(k) * k);
  std::vector<cplx> rhs(k, cplx(1.0, 0.0));
  auto at = [&](int i, int j) -> cplx& { return m[static_cast<std::size_t>(i) * k + j]; };

  double log_row_norms = 0.0;
  for (int i = 0; i < k; ++i) {
    double row = 0.0;
    for (int j = 0; j < k; ++j) {
      at(i, j) = (i == j ? 1.0 : 0.0) - z * tableau.A(i, j);
      row += std::abs(at(i, j));
    }
    log_row_norms += std::log10(row);
  }

  // LU with partial pivoting, applied to the right-hand side as we go.
  double log_det = 0.0;
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int i = col + 1; i < k; ++i)
      if (std::abs(at(i, col)) > std::abs(at(pivot, col))) pivot = i;
    const double pivot_abs = std::abs(at(pivot, col));
    if (pivot_abs == 0.0) return std::nullopt;
    log_det += std::log10(pivot_abs);
    if (pivot != col) {
      for (int j = 0; j < k; ++j) std::swap(at(col, j), at(pivot, j));
      std::swap(rhs[col], rhs[pivot]);
    }
    for (int i = col + 1; i < k; ++i) {
      const cplx factor = at(i, col) / at(col, col);
      if (factor == cplx(0.0, 0.0)) continue;
      for (int j = col; j < k; ++j) at(i, j) -= factor * at(col, j);
      rhs[i] -= factor * rhs[col];
    }
  }
  if (log_det - log_row_norms < kLogPoleThreshold) return std::nullopt;

  for (int i = k - 1; i >= 0; --i) {
    cplx s = rhs[i];
    for (int j = i + 1; j < k; ++j) s -= at(i, j) * rhs[j];
    rhs[i] = s / at(i, i);
  }
  cplx dot(0.0, 0.0);
  for (int i = 0; i < k; ++i) dot += tableau.b[i] * rhs[i];
  const cplx value = 1.0 + z * dot;
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) return std::nullopt;
  return value;
}

std::string tableau_to_json(const ButcherTableau& t) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"k\": " << t.stages << ",\n";
  os << "  \"r\": " << t.truncation << ",\n";
  os << "  \"p\": " << t.order << ",\n";
  os << "  \"rule_order\": " << t.rule_order << ",\n";
  os << "  \"rule\": \"" << t.rule_name << "\",\n";
  os << "  \"c\": ";
  append_array(os, t.c.data(), t.c.size());
  os << ",\n  \"b\": ";
  append_array(os, t.b.data(), t.b.size());
  os << ",\n  \"A\": [";
  for (int i = 0; i < t.stages; ++i) {
    os << (i ? ",\n    " : "\n    ");
    append_array(os, &t.A.data()[static_cast<std::size_t>(i) * t.stages], t.stages);
  }
  os << "\n  ]\n}\n";
  return os.str();
}

ButcherTableau tableau_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    ButcherTableau t;
    t.stages = j.at("k").get<int>();
    t.truncation = j.at("r").get<int>();
    t.order = j.at("p").get<int>();
    t.rule_order = j.at("rule_order").get<int>();
    t.rule_name = j.value("rule", std::string("custom"));
    t.c = j.at("c").get<std::vector<double>>();
    t.b = j.at("b").get<std::vector<double>>();
    const auto rows = j.at("A").get<std::vector<std::vector<double>>>();
    const auto k = static_cast<std::size_t>(t.stages);
    if (t.c.size() != k || t.b.size() != k || rows.size() != k) {
      throw ValidationError("tableau JSON: inconsistent dimensions");
    }
    t.A = SquareMatrix(t.stages);
    for (std::size_t i = 0; i < k; ++i) {
      if (rows[i].size() != k) throw ValidationError("tableau JSON: ragged A");
      for (std::size_t jj = 0; jj < k; ++jj) t.A(static_cast<int>(i), static_cast<int>(jj)) = rows[i][jj];
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("tableau JSON: ") + e.what());
  }
}

}  // namespace hbvm
