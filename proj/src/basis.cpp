#include "hbvm/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hbvm {
namespace {

void check_args(int j, double x, int max_degree) {
  if (j < 0 || j > max_degree) {
    throw std::domain_error("Legendre degree " + std::to_string(j) +
                            " outside [0, " + std::to_string(max_degree) + "]");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("Legendre argument outside [0,1]: " + std::to_string(x));
  }
}

// Unshifted Legendre P_n(t) and P_{n-1}(t), t in [-1,1].
struct LegendrePair {
  double current;
  double previous;
};

LegendrePair legendre_pair(int n, double t) {
  double prev = 1.0;
  double cur = t;
  if (n == 0) return {1.0, 0.0};
  for (int m = 1; m < n; ++m) {
    const double next = ((2.0 * m + 1.0) * t * cur - m * prev) / (m + 1.0);
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

double eval_unchecked(int j, double x) {
  const double t = 2.0 * x - 1.0;
  return std::sqrt(2.0 * j + 1.0) * legendre_pair(j, t).current;
}

double antiderivative_unchecked(int j, double c) {
  if (j == 0) return c;
  const double t = 2.0 * c - 1.0;
  // Run the recurrence up to degree j+1, keeping P_{j-1}.
  double p_before = 0.0;
  double prev = 1.0;
  double cur = t;
  for (int m = 1; m <= j; ++m) {
    if (m == j) p_before = prev;
    const double next = ((2.0 * m + 1.0) * t * cur - m * prev) / (m + 1.0);
    prev = cur;
    cur = next;
  }
  // The bracket vanishes at t = -1, so only the upper limit contributes.
  return std::sqrt(2.0 * j + 1.0) * (cur - p_before) / (2.0 * (2.0 * j + 1.0));
}

}  // namespace

double legendre_eval(int j, double x) {
  check_args(j, x, kMaxLegendreDegree);
  return eval_unchecked(j, x);
}

double legendre_antiderivative(int j, double c) {
  check_args(j, c, kMaxLegendreDegree);
  return antiderivative_unchecked(j, c);
}

void legendre_eval_all(double x, std::span<double> out) {
  if (out.empty()) return;
  check_args(static_cast<int>(out.size()) - 1, x, kMaxLegendreDegree);
  const double t = 2.0 * x - 1.0;
  double prev = 1.0;
  double cur = t;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = std::sqrt(3.0) * t;
  for (std::size_t m = 1; m + 1 < out.size(); ++m) {
    const double md = static_cast<double>(m);
    const double next = ((2.0 * md + 1.0) * t * cur - md * prev) / (md + 1.0);
    prev = cur;
    cur = next;
    out[m + 1] = std::sqrt(2.0 * md + 3.0) * cur;
  }
}

OrthonormalBasis::OrthonormalBasis(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0 || max_degree > kMaxLegendreDegree) {
    throw std::domain_error("unsupported basis size " + std::to_string(max_degree));
  }
}

void OrthonormalBasis::check_degree(int j) const {
  if (j < 0 || j > max_degree_) {
    throw std::domain_error("Legendre degree " + std::to_string(j) +
                            " outside [0, " + std::to_string(max_degree_) + "]");
  }
}

double OrthonormalBasis::eval(int j, double x) const {
  check_degree(j);
  return legendre_eval(j, x);
}

double OrthonormalBasis::antiderivative(int j, double c) const {
  check_degree(j);
  return legendre_antiderivative(j, c);
}

std::vector<double> OrthonormalBasis::eval_all(double x) const {
  std::vector<double> out(static_cast<std::size_t>(max_degree_) + 1);
  legendre_eval_all(x, out);
  return out;
}

}  // namespace hbvm
