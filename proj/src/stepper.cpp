#include "hbvm/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hbvm/basis.hpp"
#include "hbvm/errors.hpp"

namespace hbvm {
namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_finite(std::span<const double> v, int iteration) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw DivergenceError("stage iteration diverged (non-finite value at iteration " +
                            std::to_string(iteration) + ")");
    }
  }
}

void eval_stage_rhs(const OdeSystem& system, std::span<const double> stages, int k,
                    std::span<double> out) {
  const std::size_t m = system.dimension;
  for (int i = 0; i < k; ++i) {
    system.rhs(stages.subspan(i * m, m), out.subspan(i * m, m));
  }
}

// Dense LU with partial pivoting, in place. Returns false if singular.
class DenseLu {
public:
  explicit DenseLu(std::size_t n) : n_(n), lu_(n * n), perm_(n) {}

  double& operator()(std::size_t i, std::size_t j) { return lu_[i * n_ + j]; }

  bool factor() {
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
    for (std::size_t col = 0; col < n_; ++col) {
      std::size_t pivot = col;
      for (std::size_t i = col + 1; i < n_; ++i)
        if (std::abs((*this)(i, col)) > std::abs((*this)(pivot, col))) pivot = i;
      if ((*this)(pivot, col) == 0.0) return false;
      if (pivot != col) {
        for (std::size_t j = 0; j < n_; ++j) std::swap((*this)(col, j), (*this)(pivot, j));
        std::swap(perm_[col], perm_[pivot]);
      }
      for (std::size_t i = col + 1; i < n_; ++i) {
        const double f = (*this)(i, col) / (*this)(col, col);
        (*this)(i, col) = f;
        for (std::size_t j = col + 1; j < n_; ++j) (*this)(i, j) -= f * (*this)(col, j);
      }
    }
    return true;
  }

  void solve(std::span<double> x) const {
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = x[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) s -= lu_[i * n_ + j] * y[j];
      y[i] = s;
    }
    for (std::size_t i = n_; i-- > 0;) {
      double s = y[i];
      for (std::size_t j = i + 1; j < n_; ++j) s -= lu_[i * n_ + j] * y[j];
      y[i] = s / lu_[i * n_ + i];
    }
    std::copy(y.begin(), y.end(), x.begin());
  }

private:
  std::size_t n_;
  std::vector<double> lu_;
  std::vector<std::size_t> perm_;
};

std::vector<double> jacobian_at(const OdeSystem& system, std::span<const double> y) {
  const std::size_t m = system.dimension;
  std::vector<double> jac(m * m);
  if (system.jacobian) {
    system.jacobian(y, jac);
    return jac;
  }
  State yp(y.begin(), y.end());
  State fp(m), fm(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double delta = 1e-6 * (1.0 + std::abs(y[j]));
    yp[j] = y[j] + delta;
    system.rhs(yp, fp);
    yp[j] = y[j] - delta;
    system.rhs(yp, fm);
    yp[j] = y[j];
    for (std::size_t i = 0; i < m; ++i) jac[i * m + j] = (fp[i] - fm[i]) / (2.0 * delta);
  }
  return jac;
}

StageSolution solve_fixed_point(const ButcherTableau& tab, const OdeSystem& system,
                                std::span<const double> y0, double h,
                                const StageOptions& options) {
  const int k = tab.stages;
  const std::size_t m = system.dimension;
  StageSolution sol;
  sol.dimension = m;
  sol.stages.resize(k * m);
  for (int i = 0; i < k; ++i) std::copy(y0.begin(), y0.end(), sol.stages.begin() + i * m);

  const double threshold = options.tol * (1.0 + inf_norm(y0));
  std::vector<double> f(k * m);
  std::vector<double> next(k * m);
  for (int it = 1; it <= options.max_iter; ++it) {
    eval_stage_rhs(system, sol.stages, k, f);
    double increment = 0.0;
    for (int i = 0; i < k; ++i) {
      double* row = next.data() + i * m;
      std::copy(y0.begin(), y0.end(), row);
      for (int j = 0; j < k; ++j) {
        const double ha = h * tab.A(i, j);
        const double* fj = f.data() + j * m;
        for (std::size_t d = 0; d < m; ++d) row[d] += ha * fj[d];
      }
      for (std::size_t d = 0; d < m; ++d)
        increment = std::max(increment, std::abs(row[d] - sol.stages[i * m + d]));
    }
    check_finite(next, it);
    sol.stages.swap(next);
    sol.iterations = it;
    sol.residual = increment;
    if (increment <= threshold) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

// Simplified Newton: the iteration matrix I - h A (x) J(y0) is factored once.
StageSolution solve_newton(const ButcherTableau& tab, const OdeSystem& system,
                           std::span<const double> y0, double h, const StageOptions& options) {
  const int k = tab.stages;
  const std::size_t m = system.dimension;
  const std::size_t n = k * m;
  StageSolution sol;
  sol.dimension = m;
  sol.stages.resize(n);
  for (int i = 0; i < k; ++i) std::copy(y0.begin(), y0.end(), sol.stages.begin() + i * m);

  const std::vector<double> jac = jacobian_at(system, y0);
  DenseLu lu(n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          const double identity = (i == j && a == b) ? 1.0 : 0.0;
          lu(i * m + a, j * m + b) = identity - h * tab.A(i, j) * jac[a * m + b];
        }
  if (!lu.factor()) throw DivergenceError("singular Newton iteration matrix");

  const double threshold = options.tol * (1.0 + inf_norm(y0));
  std::vector<double> f(n);
  std::vector<double> residual(n);
  for (int it = 1; it <= options.max_iter; ++it) {
    eval_stage_rhs(system, sol.stages, k, f);
    // residual = -(U - y0 - h (A (x) I) F)
    for (int i = 0; i < k; ++i)
      for (std::size_t d = 0; d < m; ++d) {
        double s = y0[d] - sol.stages[i * m + d];
        for (int j = 0; j < k; ++j) s += h * tab.A(i, j) * f[j * m + d];
        residual[i * m + d] = s;
      }
    lu.solve(residual);
    for (std::size_t x = 0; x < n; ++x) sol.stages[x] += residual[x];
    check_finite(sol.stages, it);
    const double increment = inf_norm(residual);
    sol.iterations = it;
    sol.residual = increment;
    if (increment <= threshold) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

}  // namespace

State OdeSystem::eval(std::span<const double> y) const {
  State out(dimension);
  rhs(y, out);
  return out;
}

OdeSystem HamiltonianSystem::ode() const {
  OdeSystem sys;
  const std::size_t m = degrees_of_freedom;
  sys.dimension = 2 * m;
  sys.energy = hamiltonian;
  auto grad = gradient;
  sys.rhs = [grad, m](std::span<const double> y, std::span<double> out) {
    grad(y, out);
    // (dH/dq, dH/dp) -> (dH/dp, -dH/dq)
    for (std::size_t i = 0; i < m; ++i) {
      const double dq = out[i];
      out[i] = out[m + i];
      out[m + i] = -dq;
    }
  };
  if (hessian) {
    auto hess = hessian;
    sys.jacobian = [hess, m](std::span<const double> y, std::span<double> out) {
      const std::size_t n = 2 * m;
      std::vector<double> h(n * n);
      hess(y, h);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          out[i * n + j] = h[(m + i) * n + j];
          out[(m + i) * n + j] = -h[i * n + j];
        }
    };
  }
  return sys;
}

StageSolution solve_stages(const ButcherTableau& tableau, const OdeSystem& system,
                           std::span<const double> y0, double h, const StageOptions& options) {
  if (!(h > 0.0)) throw ValidationError("step size must be positive");
  if (!(options.tol > 0.0)) throw ValidationError("stage tolerance must be positive");
  if (y0.size() != system.dimension) throw ValidationError("state dimension mismatch");
  return options.solver == StageSolver::Newton ? solve_newton(tableau, system, y0, h, options)
                                               : solve_fixed_point(tableau, system, y0, h, options);
}

StepResult step(const ButcherTableau& tableau, const OdeSystem& system,
                std::span<const double> y0, double h, const StageOptions& options) {
  StepResult result;
  static_cast<StageSolution&>(result) = solve_stages(tableau, system, y0, h, options);
  const int k = tableau.stages;
  const std::size_t m = system.dimension;
  std::vector<double> f(k * m);
  eval_stage_rhs(system, result.stages, k, f);
  result.increment.assign(m, 0.0);
  for (int l = 0; l < k; ++l) {
    const double hb = h * tableau.b[l];
    for (std::size_t d = 0; d < m; ++d) result.increment[d] += hb * f[l * m + d];
  }
  result.y1.resize(m);
  for (std::size_t d = 0; d < m; ++d) result.y1[d] = y0[d] + result.increment[d];
  check_finite(result.y1, result.iterations);
  return result;
}

std::vector<double> step_polynomial_coefficients(const ButcherTableau& tableau,
                                                 const OdeSystem& system,
                                                 const StageSolution& stages) {
  const int k = tableau.stages;
  const int r = tableau.truncation;
  const std::size_t m = system.dimension;
  std::vector<double> f(k * m);
  eval_stage_rhs(system, stages.stages, k, f);
  std::vector<double> gamma(r * m, 0.0);
  std::vector<double> p(r);
  for (int l = 0; l < k; ++l) {
    legendre_eval_all(tableau.c[l], p);
    for (int j = 0; j < r; ++j)
      for (std::size_t d = 0; d < m; ++d) gamma[j * m + d] += tableau.b[l] * p[j] * f[l * m + d];
  }
  return gamma;
}

State eval_step_polynomial(std::span<const double> y0, double h,
                           std::span<const double> coefficients, int r, double c) {
  const std::size_t m = y0.size();
  State u(y0.begin(), y0.end());
  for (int j = 0; j < r; ++j) {
    const double w = h * legendre_antiderivative(j, c);
    for (std::size_t d = 0; d < m; ++d) u[d] += w * coefficients[j * m + d];
  }
  return u;
}

}  // namespace hbvm
