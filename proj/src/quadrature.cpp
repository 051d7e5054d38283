#include "hbvm/quadrature.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hbvm/errors.hpp"

namespace hbvm {
namespace {

constexpr int kMaxNewtonIterations = 100;
constexpr double kRootTolerance = 1e-15;

// Unshifted Legendre P_n(t) and its derivative.
struct LegendreValue {
  double p;
  double dp;
  double p_prev;
};

LegendreValue legendre_with_derivative(int n, double t) {
  double prev = 1.0;
  double cur = t;
  if (n == 0) return {1.0, 0.0, 0.0};
  for (int m = 1; m < n; ++m) {
    const double next = ((2.0 * m + 1.0) * t * cur - m * prev) / (m + 1.0);
    prev = cur;
    cur = next;
  }
  const double dp = n * (t * cur - prev) / (t * t - 1.0);
  return {cur, dp, prev};
}

int detect_order(const std::vector<double>& nodes, const std::vector<double>& weights) {
  const int cap = 4 * static_cast<int>(nodes.size()) + 4;
  int q = 0;
  for (int d = 0; d < cap; ++d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * std::pow(nodes[i], d);
    if (std::abs(sum - 1.0 / (d + 1.0)) > kOrderDetectionTolerance) break;
    q = d + 1;
  }
  return q;
}

}  // namespace

QuadratureRule gauss_rule(int k) {
  if (k < 1) throw ValidationError("gauss_rule needs k >= 1, got " + std::to_string(k));
  QuadratureRule rule;
  rule.nodes.assign(k, 0.0);
  rule.weights.assign(k, 0.0);
  rule.order = 2 * k;
  rule.name = "gauss";

  // Roots come in pairs +-t on [-1,1]; solve for the nonnegative ones only.
  const int half = (k + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    bool converged = false;
    LegendreValue v{};
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      v = legendre_with_derivative(k, t);
      const double dt = v.p / v.dp;
      t -= dt;
      if (std::abs(dt) <= kRootTolerance) {
        converged = true;
        break;
      }
    }
    // Newton on P_k from these guesses converges quadratically for k <= 50.
    assert(converged);
    if (!converged) throw std::runtime_error("gauss_rule: Newton did not converge");
    v = legendre_with_derivative(k, t);
    const double w = 1.0 / ((1.0 - t * t) * v.dp * v.dp);  // half of 2/((1-t^2)P'^2)
    const int lo = i;
    const int hi = k - 1 - i;
    rule.nodes[lo] = 0.5 * (1.0 - t);
    rule.nodes[hi] = 0.5 * (1.0 + t);
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (k % 2 == 1) rule.nodes[k / 2] = 0.5;
  return rule;
}

QuadratureRule lobatto_rule(int k) {
  if (k < 2) throw ValidationError("lobatto_rule needs k >= 2, got " + std::to_string(k));
  const int n = k - 1;  // interior nodes are roots of P'_n
  std::vector<double> nodes(k, 0.0);
  std::vector<double> weights(k, 0.0);
  const double end_weight = 1.0 / (k * (k - 1.0));
  nodes.front() = 0.0;
  nodes.back() = 1.0;
  weights.front() = end_weight;
  weights.back() = end_weight;

  const int interior = k - 2;
  for (int i = 0; i < (interior + 1) / 2; ++i) {
    double t = std::cos(std::numbers::pi * (i + 1.0) / n);
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
      // Newton on P'_n using (1-t^2)P''_n = 2tP'_n - n(n+1)P_n.
      const auto v = legendre_with_derivative(n, t);
      const double ddp = (2.0 * t * v.dp - n * (n + 1.0) * v.p) / (1.0 - t * t);
      const double dt = v.dp / ddp;
      t -= dt;
      if (std::abs(dt) <= kRootTolerance) break;
    }
    const auto v = legendre_with_derivative(n, t);
    const double w = end_weight / (v.p * v.p);
    const int lo = 1 + i;
    const int hi = k - 2 - i;
    nodes[lo] = 0.5 * (1.0 - t);
    nodes[hi] = 0.5 * (1.0 + t);
    weights[lo] = w;
    weights[hi] = w;
  }
  if (interior % 2 == 1) nodes[k / 2] = 0.5;
  QuadratureRule rule = custom_rule(std::move(nodes), std::move(weights), "lobatto");
  // The monomial test overshoots once the first inexact moment drops below the
  // detection threshold (from about 10 points on); the order is known exactly.
  rule.order = 2 * k - 2;
  return rule;
}

QuadratureRule custom_rule(std::vector<double> nodes, std::vector<double> weights,
                           std::string name) {
  if (nodes.empty()) throw ValidationError("quadrature rule needs at least one node");
  if (nodes.size() != weights.size()) {
    throw ValidationError("quadrature rule: " + std::to_string(nodes.size()) + " nodes but " +
                          std::to_string(weights.size()) + " weights");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i] >= 0.0 && nodes[i] <= 1.0)) {
      throw ValidationError("quadrature node outside [0,1]: " + std::to_string(nodes[i]));
    }
    if (i > 0 && !(nodes[i] > nodes[i - 1])) {
      throw ValidationError("quadrature nodes must be strictly increasing");
    }
    if (!(weights[i] > 0.0)) {
      throw ValidationError("quadrature weights must be positive");
    }
  }
  QuadratureRule rule;
  rule.order = detect_order(nodes, weights);
  rule.nodes = std::move(nodes);
  rule.weights = std::move(weights);
  rule.name = std::move(name);
  return rule;
}

}  // namespace hbvm
