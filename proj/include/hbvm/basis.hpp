#pragma once

// Shifted Legendre polynomials on [0,1], normalized so that
//   int_0^1 P_i(x) P_j(x) dx = delta_ij,   P_j(1) = sqrt(2j+1).

#include <span>
#include <vector>

namespace hbvm {

/// Largest degree accepted by the free functions below.
inline constexpr int kMaxLegendreDegree = 256;

/// Value of the orthonormal shifted Legendre polynomial of degree j at x.
/// Throws std::domain_error if j is outside [0, kMaxLegendreDegree] or x is outside [0,1].
double legendre_eval(int j, double x);

/// int_0^c P_j(x) dx, from the identity
///   int P_n(t) dt = (P_{n+1}(t) - P_{n-1}(t)) / (2n+1)
/// on the unshifted polynomials. No quadrature involved.
double legendre_antiderivative(int j, double c);

/// Values of P_0..P_n at x, written to out (out.size() == n + 1).
void legendre_eval_all(double x, std::span<double> out);

/// Orthonormal basis truncated at a fixed degree. Queries outside
/// [0, max_degree] throw std::domain_error.
class OrthonormalBasis {
public:
  explicit OrthonormalBasis(int max_degree);

  int max_degree() const noexcept { return max_degree_; }

  double eval(int j, double x) const;
  double antiderivative(int j, double c) const;

  /// P_0(x)..P_{max_degree}(x).
  std::vector<double> eval_all(double x) const;

private:
  void check_degree(int j) const;

  int max_degree_;
};

}  // namespace hbvm
