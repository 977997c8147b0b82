#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hybrid/grid.hpp"
#include "hybrid/operators.hpp"
#include "hybrid/problem.hpp"

namespace hybrid {

enum class Initialization { Zero, Upper, Custom };

std::string_view to_string(Initialization i);
Initialization parse_initialization(std::string_view s);

struct SolverConfig {
  std::optional<double> dt;  // default_time_step() when empty
  double tolerance = 1e-10;
  int max_iterations = 100000;
  Initialization init = Initialization::Zero;
  std::optional<ValueField> custom_init;
  HamiltonianVariant variant = HamiltonianVariant::Plus;
  int threads = 1;
};

struct SolveResult {
  ValueField value;
  double dt = 0.0;
  int iterations = 0;
  std::vector<double> history;  // sup-norm change per iteration
  bool converged = false;
  bool monotone = false;  // nondecreasing from zero / nonincreasing from upper
  double upper_bound = 0.0;  // sup k / lambda
  std::vector<std::string> warnings;

  double final_change() const { return history.empty() ? 0.0 : history.back(); }
};

/// Sup-norm estimate of |f| over grid nodes, controls and mode pairs.
double dynamics_sup(const ProblemSpec& spec, const GridSpec& grid);

/// 0.5 * min(h) / max(1, sup|f|).
double default_time_step(const ProblemSpec& spec, const GridSpec& grid);

/// Iterates V <- T[V] until the sup-norm change falls below
/// tolerance * (1 - exp(-lambda dt)), which bounds the distance to the fixed
/// point by `tolerance` whenever T contracts with the discount factor.
SolveResult solve(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config);
SolveResult solve(const BellmanOperator& op, const SolverConfig& config);

}  // namespace hybrid
