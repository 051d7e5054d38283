#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hbvm {

/// Bad arguments to a constructor or builder (inconsistent sizes, k < r, ...).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A stage iterate became NaN or Inf.
class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The adaptive controller asked for a step below h_min.
class StepsizeUnderflowError : public std::runtime_error {
public:
  StepsizeUnderflowError(double t, double h)
      : std::runtime_error("stepsize underflow at t=" + std::to_string(t) +
                           " (h=" + std::to_string(h) + ")"),
        t_(t), h_(h) {}

  double time() const noexcept { return t_; }
  double stepsize() const noexcept { return h_; }

private:
  double t_;
  double h_;
};

}  // namespace hbvm
