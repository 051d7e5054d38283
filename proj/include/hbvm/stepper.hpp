#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hbvm/tableau.hpp"

namespace hbvm {

using State = std::vector<double>;

/// y -> out, both of length `dimension`.
using VectorField = std::function<void(std::span<const double> y, std::span<double> out)>;
using ScalarField = std::function<double(std::span<const double> y)>;

/// Autonomous system y' = f(y). Non-autonomous problems are handled by
/// appending t' = 1 as an extra component.
struct OdeSystem {
  std::size_t dimension = 0;
  VectorField rhs;
  /// Optional row-major Jacobian df/dy (dimension^2 entries). When empty,
  /// the Newton stage solver falls back to central differences.
  VectorField jacobian;
  /// Optional first integral recorded along trajectories (H for Hamiltonian systems).
  ScalarField energy;

  State eval(std::span<const double> y) const;
};

/// Canonical Hamiltonian system y' = J grad H(y), y = (q, p) in R^{2m},
/// J = [[0, I], [-I, 0]].
struct HamiltonianSystem {
  std::size_t degrees_of_freedom = 0;  // m
  ScalarField hamiltonian;
  VectorField gradient;  // (dH/dq, dH/dp)
  VectorField hessian;   // optional, row-major (2m)^2

  std::size_t dimension() const noexcept { return 2 * degrees_of_freedom; }
  OdeSystem ode() const;
};

enum class StageSolver { FixedPoint, Newton };

struct StageOptions {
  double tol = 1e-13;
  int max_iter = 100;
  StageSolver solver = StageSolver::FixedPoint;
};

/// Converged (or abandoned) stage values u_1..u_k, stored stage-major.
struct StageSolution {
  std::vector<double> stages;  // k * m
  std::size_t dimension = 0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;

  std::span<const double> stage(int i) const {
    return {stages.data() + static_cast<std::size_t>(i) * dimension, dimension};
  }
};

struct StepResult : StageSolution {
  State y1;
  State increment;  // h sum_l b_l f(u_l), so y1 = y0 + increment up to rounding
};

/// Solve u_i = y0 + h sum_j a_ij f(u_j) starting from u_i = y0.
/// Convergence: max_i |u_i^{new} - u_i|_inf <= tol (1 + |y0|_inf); `residual`
/// is that last increment. Hitting max_iter returns converged = false.
/// Throws DivergenceError if an iterate is not finite.
StageSolution solve_stages(const ButcherTableau& tableau, const OdeSystem& system,
                           std::span<const double> y0, double h,
                           const StageOptions& options = {});

/// One step: solve_stages, then y1 = y0 + h sum_l b_l f(u_l).
StepResult step(const ButcherTableau& tableau, const OdeSystem& system,
                std::span<const double> y0, double h, const StageOptions& options = {});

/// Coefficients gamma_j = sum_l b_l P_j(c_l) f(u_l), j < r, of the step
/// polynomial u(t0 + ch) = y0 + h sum_j gamma_j int_0^c P_j (row-major r x m).
std::vector<double> step_polynomial_coefficients(const ButcherTableau& tableau,
                                                 const OdeSystem& system,
                                                 const StageSolution& stages);

/// Evaluate the step polynomial at t0 + ch, c in [0,1].
State eval_step_polynomial(std::span<const double> y0, double h,
                           std::span<const double> coefficients, int r, double c);

}  // namespace hbvm
