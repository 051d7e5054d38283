#pragma once

#include <string>
#include <vector>

namespace hbvm {

/// Quadrature rule on [0,1]: sum_i weights[i] * g(nodes[i]) ~ int_0^1 g.
/// `order` is q: the rule is exact for every polynomial of degree < q.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
  std::string name;

  int size() const noexcept { return static_cast<int>(nodes.size()); }

  template <typename F>
  double integrate(F&& g) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * g(nodes[i]);
    return sum;
  }
};

/// k-point Gauss-Legendre rule on [0,1], order 2k. Nodes are the roots of
/// P_k found by Newton iteration from Chebyshev-type guesses.
QuadratureRule gauss_rule(int k);

/// k-point Gauss-Lobatto rule on [0,1] (endpoints included), order 2k-2.
QuadratureRule lobatto_rule(int k);

/// User-supplied rule; nodes strictly increasing in [0,1], weights positive.
/// The order is detected as the largest q with |sum b_i c_i^d - 1/(d+1)| <= 1e-10
/// for all d < q. Throws ValidationError on malformed input.
QuadratureRule custom_rule(std::vector<double> nodes, std::vector<double> weights,
                           std::string name = "custom");

/// Tolerance used by custom_rule to decide exactness on x^d.
inline constexpr double kOrderDetectionTolerance = 1e-10;

}  // namespace hbvm
