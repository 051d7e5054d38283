#pragma once

#include <array>
#include <span>
#include <vector>

#include "hbvm/stepper.hpp"

namespace hbvm {

// ---------------------------------------------------------------------------
// Kepler two-body problem, state ordered (q1, q2, p1, p2):
//   H = (p1^2 + p2^2)/2 - 1/|q|.
// Started at pericenter the orbit has semi-major axis 1 and period 2*pi.
// ---------------------------------------------------------------------------

/// Positions closer to the origin than this are treated as a collision.
inline constexpr double kCollisionRadius = 1e-8;

/// Throws std::domain_error for e outside [0,1).
State kepler_initial(double eccentricity);

/// Throws std::domain_error when |q| < kCollisionRadius.
double kepler_energy(std::span<const double> state);

struct KeplerProblem {
  double eccentricity = 0.0;

  State initial_state() const { return kepler_initial(eccentricity); }
  HamiltonianSystem hamiltonian() const;
  OdeSystem system() const { return hamiltonian().ode(); }

  /// Closed-form state at time t, via Newton on Kepler's equation
  /// E - e sin E = t for the eccentric anomaly (tolerance 1e-14).
  State exact(double t) const;
};

inline constexpr double kKeplerPeriod = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Scalar test equation y' = (alpha + i beta) y written on x = (Re y, Im y):
//   x' = [[alpha, -beta], [beta, alpha]] x.
// ---------------------------------------------------------------------------
struct LinearTestProblem {
  double alpha = -1.0;
  double beta = 0.0;

  OdeSystem system() const;
  State exact(std::span<const double> x0, double t) const;
};

/// V(x) = x^T x / 2.
double lyapunov(std::span<const double> x);

// ---------------------------------------------------------------------------
// Polynomial Hamiltonian in one degree of freedom, H(q,p) = sum c_ab q^a p^b.
// ---------------------------------------------------------------------------
class PolynomialHamiltonian {
public:
  struct Term {
    double coefficient;
    int q_power;
    int p_power;
  };

  explicit PolynomialHamiltonian(std::vector<Term> terms);

  /// Total degree nu.
  int degree() const noexcept { return degree_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }

  double value(double q, double p) const;
  /// (dH/dq, dH/dp).
  std::array<double, 2> gradient(double q, double p) const;

  HamiltonianSystem hamiltonian() const;
  OdeSystem system() const { return hamiltonian().ode(); }

private:
  std::vector<Term> terms_;
  int degree_ = 0;
};

/// H = p^2/2 + q^4/4 (nu = 4).
PolynomialHamiltonian quartic_oscillator();

}  // namespace hbvm
