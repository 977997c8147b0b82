#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hybrid/grid.hpp"
#include "hybrid/operators.hpp"
#include "hybrid/problem.hpp"

namespace hybrid {

/// Raised when the feedback policy asks for a second event of the same kind
/// within one time step (usually action_tol is too loose).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicyDecision {
  enum class Kind { Continue, SwitchPlayer1, SwitchPlayer2, Impulse };
  Kind kind = Kind::Continue;
  int u1 = 0;      // control level indices for Continue
  int u2 = 0;
  int target = -1;  // new mode index, or impulse index
};

std::string_view to_string(PolicyDecision::Kind k);

struct SwitchEvent {
  double time = 0.0;
  int from = 0;
  int to = 0;
  double cost = 0.0;
};

struct ImpulseEvent {
  double time = 0.0;
  int index = 0;
  Vector jump;
  double cost = 0.0;
};

struct TrajectorySample {
  double time = 0.0;
  Vector state;
  ModePair modes;
  double u1 = 0.0;
  double u2 = 0.0;
  double running_cost = 0.0;  // undiscounted k at the sample
  std::string events;         // events applied at this instant, ';'-separated
};

struct HybridTrajectory {
  double dt = 0.0;
  double discount = 0.0;
  std::vector<TrajectorySample> samples;
  std::vector<SwitchEvent> player1_switches;
  std::vector<SwitchEvent> player2_switches;
  std::vector<ImpulseEvent> impulses;

  // Discounted accumulators maintained during the rollout.
  double running_total = 0.0;
  double switch1_total = 0.0;  // enters the payoff with a minus sign
  double switch2_total = 0.0;
  double impulse_total = 0.0;

  double accumulated_cost() const { return running_total - switch1_total + switch2_total + impulse_total; }
};

struct SimulationOptions {
  double horizon = 10.0;
  double dt = 0.05;
  double action_tol = 1e-9;
  HamiltonianVariant variant = HamiltonianVariant::Plus;
};

/// Feedback decision at state x. Priority: impulse, player-2 switch,
/// player-1 switch, then the saddle controls of the continuation value.
PolicyDecision decide(const Model& model, const ValueField& V, const Vector& x, ModePair modes, double dt,
                      double action_tol, HamiltonianVariant variant);
PolicyDecision decide(const ProblemSpec& spec, const ValueField& V, const Vector& x, ModePair modes, double dt,
                      double action_tol, HamiltonianVariant variant = HamiltonianVariant::Plus);

HybridTrajectory simulate(const ProblemSpec& spec, const ValueField& V, const Vector& x0, ModePair start,
                          const SimulationOptions& options);

/// Payoff recomputed from the recorded samples and events.
double evaluate_cost(const HybridTrajectory& traj, double discount);

struct RolloutGap {
  Vector start;
  ModePair modes;
  double cost = 0.0;
  double value = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
};

struct RolloutReport {
  std::vector<RolloutGap> rows;
  double max_gap = 0.0;
  double max_relative_gap = 0.0;
};

RolloutReport rollout_value_gap(const ProblemSpec& spec, const ValueField& V,
                                const std::vector<std::pair<Vector, ModePair>>& starts,
                                const SimulationOptions& options);

/// One CSV row per sample: time, state, modes, controls, event flags and
/// cumulative discounted cost terms.
std::string trajectory_csv(const ProblemSpec& spec, const HybridTrajectory& traj);

}  // namespace hybrid
