#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hybrid/grid.hpp"
#include "hybrid/operators.hpp"
#include "hybrid/problem.hpp"
#include "hybrid/solver.hpp"

namespace hybrid {

enum class VerifyStatus { Pass, Fail, NotApplicable, Skipped };
std::string_view to_string(VerifyStatus s);

struct CheckResult {
  std::string name;
  std::string property;  // the structural property being exercised
  VerifyStatus status = VerifyStatus::Pass;
  std::map<std::string, double> measured;
  std::map<std::string, double> tolerances;
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::uint64_t seed = 0;

  /// True iff every check passed, was not applicable, or was skipped.
  bool passed() const;
  const CheckResult* find(std::string_view name) const;
  std::string to_text() const;
  /// Sorted `key = value` lines, floats as %.16e.
  std::string to_kv() const;
};

/// M+[V] - tol <= V <= min(M-[V], N[V]) + tol at every node and mode pair.
CheckResult obstacle_chain_check(const ValueField& V, const ProblemSpec& spec, double tol);

/// Where the impulse obstacle binds, the post-impulse state must keep a gap
/// of at least the subadditivity margin below its own impulse obstacle.
CheckResult post_impulse_strictness(const ValueField& V, const ProblemSpec& spec, double tol);

/// Plus and Minus solves agree to 1e-12 when the sampled Isaacs gap vanishes.
CheckResult isaacs_value_equality(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config,
                                  int costate_samples = 16);

/// Fixed points reached from zero and from sup k / lambda agree within 10 * tolerance.
CheckResult two_sided_uniqueness(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config);

/// Random monotonicity / nonexpansiveness / shift probes of T.
CheckResult operator_probes(const ProblemSpec& spec, const GridSpec& grid, double dt, HamiltonianVariant variant,
                            int trials, std::uint64_t seed);

/// ||T^m V - V|| <= m * ||T V - V|| + tol.
CheckResult dpp_consistency(const ValueField& V, const ProblemSpec& spec, double dt, HamiltonianVariant variant,
                            int m, double tol);

struct VerifyOptions {
  std::set<std::string> suites;  // empty = all; names: obstacle, impulse, isaacs, uniqueness, probes, dpp
  std::uint64_t seed = 20070501;
  int probe_trials = 100;
  std::vector<int> probe_points;  // grid for the probes; default 5 per dimension
  std::optional<ValueField> field;  // externally supplied field for the field checks
};

/// Runs the selected checks, solving the problem first when no field is supplied.
VerificationReport verify_all(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config,
                              const VerifyOptions& options);

}  // namespace hybrid
