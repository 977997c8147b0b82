#include "hybrid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybrid {

std::string_view to_string(Initialization i) {
  switch (i) {
    case Initialization::Zero: return "zero";
    case Initialization::Upper: return "upper";
    case Initialization::Custom: return "custom";
  }
  return "?";
}

Initialization parse_initialization(std::string_view s) {
  if (s == "zero") return Initialization::Zero;
  if (s == "upper") return Initialization::Upper;
  if (s == "custom") return Initialization::Custom;
  throw std::invalid_argument("unknown initialization '" + std::string(s) + "' (expected zero, upper or custom)");
}

double dynamics_sup(const ProblemSpec& spec, const GridSpec& grid) {
  Model model(spec);
  Vector x(spec.dimension), f(spec.dimension);
  double sup = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    grid.point(p, x.data());
    for (int pair = 0; pair < spec.pair_count(); ++pair)
      for (double u1 : spec.u1_levels)
        for (double u2 : spec.u2_levels) {
          model.dynamics(pair, x.data(), u1, u2, f.data());
          sup = std::max(sup, f.norm());
        }
  }
  return sup;
}

double default_time_step(const ProblemSpec& spec, const GridSpec& grid) {
  return 0.5 * grid.min_spacing() / std::max(1.0, dynamics_sup(spec, grid));
}

SolveResult solve(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config) {
  double dt = config.dt ? *config.dt : default_time_step(spec, grid);
  BellmanOperator op(spec, grid, dt, config.variant);
  SolveResult r = solve(op, config);

  double box_diameter = 0.0;
  for (const auto& iv : spec.box) box_diameter += (iv.high - iv.low) * (iv.high - iv.low);
  box_diameter = std::sqrt(box_diameter);
  double fsup = dynamics_sup(spec, grid);
  if (fsup > 0.0 && dt > box_diameter / fsup)
    r.warnings.push_back("time step exceeds box diameter / sup|f|; characteristics leave the box in one step");
  return r;
}

SolveResult solve(const BellmanOperator& op, const SolverConfig& config) {
  const ProblemSpec& spec = op.spec();
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (config.max_iterations < 0) throw std::invalid_argument("max_iterations must be nonnegative");

  SolveResult r;
  r.dt = op.dt();
  r.upper_bound = std::max(0.0, op.running_cost_sup()) / spec.discount;

  ValueField current(op.grid(), spec.m1(), spec.m2(), 0.0);
  switch (config.init) {
    case Initialization::Zero: break;
    case Initialization::Upper: std::fill(current.data().begin(), current.data().end(), r.upper_bound); break;
    case Initialization::Custom:
      if (!config.custom_init || !config.custom_init->same_shape(current))
        throw std::invalid_argument("custom initialization requires a field matching the grid and modes");
      current = *config.custom_init;
      break;
  }

  const double stop = config.tolerance * (1.0 - op.discount_factor());
  bool up = true, down = true;
  ValueField next(op.grid(), spec.m1(), spec.m2());
  for (int it = 0; it < config.max_iterations; ++it) {
    op.apply(current, next, config.threads);
    double change = 0.0;
    const auto& a = current.data();
    const auto& b = next.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
      change = std::max(change, std::abs(b[i] - a[i]));
      up = up && b[i] >= a[i];
      down = down && b[i] <= a[i];
    }
    std::swap(current, next);
    r.history.push_back(change);
    r.iterations = it + 1;
    if (!current.all_finite()) {
      r.warnings.push_back("value field became non-finite");
      break;
    }
    if (change <= stop) {
      r.converged = true;
      break;
    }
  }
  switch (config.init) {
    case Initialization::Zero: r.monotone = up; break;
    case Initialization::Upper: r.monotone = down; break;
    case Initialization::Custom: r.monotone = up || down; break;
  }
  r.value = std::move(current);
  return r;
}

}  // namespace hybrid
