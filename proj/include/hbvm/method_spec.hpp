#pragma once

// Parsing of the CLI method and problem strings:
//   hbvm:k=4,r=3[,rule=gauss|lobatto|file]
//   kepler:e=0.6 | test:alpha=-1,beta=10 | quartic

#include <optional>
#include <string>

#include "hbvm/problems.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

enum class RuleKind { Gauss, Lobatto, File };

struct MethodSpec {
  int k = 3;
  int r = 3;
  RuleKind rule = RuleKind::Gauss;
  std::string rule_file;  // JSON {"nodes": [...], "weights": [...]} when rule == File

  std::string label() const;
  /// Filesystem-safe form of label(), e.g. "hbvm_k4_r3".
  std::string slug() const;
};

/// Throws ValidationError on malformed specs.
MethodSpec parse_method(const std::string& text);

/// Reads nodes/weights for RuleKind::File and passes them through custom_rule.
QuadratureRule load_rule_file(const std::string& path);

QuadratureRule make_rule(const MethodSpec& spec);
ButcherTableau make_tableau(const MethodSpec& spec);

enum class ProblemKind { Kepler, LinearTest, Quartic };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::Kepler;
  double eccentricity = 0.6;
  double alpha = -1.0;
  double beta = 0.0;

  std::string label() const;
  OdeSystem system() const;
  State initial_state() const;
  /// Closed-form solution from initial_state(), when one exists.
  std::optional<State> exact(double t) const;
};

ProblemSpec parse_problem(const std::string& text);

}  // namespace hbvm
