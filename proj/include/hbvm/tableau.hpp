#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "hbvm/quadrature.hpp"

namespace hbvm {

/// Dense row-major k x k matrix. Only what the tableau code needs.
class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n, double fill = 0.0)
      : n_(n), data_(static_cast<std::size_t>(n) * n, fill) {}

  int size() const noexcept { return n_; }
  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<double>& data() const noexcept { return data_; }

private:
  int n_ = 0;
  std::vector<double> data_;
};

/// Runge-Kutta coefficients of HBVM(k,r):
///   a_ij = b_j sum_{l<r} P_l(c_j) int_0^{c_i} P_l,
/// with (b, c) the quadrature weights and nodes. `order` is min(q, 2r).
struct ButcherTableau {
  SquareMatrix A;
  std::vector<double> b;
  std::vector<double> c;
  int stages = 0;          // k
  int truncation = 0;      // r
  int order = 0;           // p = min(q, 2r)
  int rule_order = 0;      // q
  std::string rule_name;

  /// Largest |sum_j a_ij - c_i|.
  double row_sum_defect() const;
};

/// Build HBVM(k,r) on the given rule. Throws ValidationError if r < 1,
/// k < r, the rule does not have k nodes, or its order is below k.
ButcherTableau build_hbvm(int k, int r, const QuadratureRule& rule);

/// Shorthand for build_hbvm(k, r, gauss_rule(k)).
ButcherTableau build_hbvm(int k, int r);

/// max |A - G P P^T diag(b)| where A is HBVM(k,r) on Gauss nodes, G the
/// k-stage Gauss collocation matrix and P_{ij} = P_j(c_i), j < r.
double verify_factorization(int k, int r);

/// R(z) = 1 + z b^T (I - zA)^{-1} 1. Returns std::nullopt when I - zA is
/// numerically singular (z at a pole of R).
std::optional<std::complex<double>> stability_value(const ButcherTableau& tableau,
                                                    std::complex<double> z);

/// Callable wrapper over stability_value for a fixed tableau.
class StabilityFunction {
public:
  explicit StabilityFunction(ButcherTableau tableau) : tableau_(std::move(tableau)) {}

  std::optional<std::complex<double>> operator()(std::complex<double> z) const {
    return stability_value(tableau_, z);
  }
  const ButcherTableau& tableau() const noexcept { return tableau_; }

private:
  ButcherTableau tableau_;
};

/// JSON object with fields k, r, p, rule_order, c, b, A (row-major);
/// every real printed with 17 significant digits.
std::string tableau_to_json(const ButcherTableau& tableau);

/// Inverse of tableau_to_json. Throws ValidationError on malformed input.
ButcherTableau tableau_from_json(const std::string& text);

}  // namespace hbvm
