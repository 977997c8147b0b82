#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybrid/config.hpp"
#include "hybrid/expr.hpp"

namespace hybrid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid or inconsistent problem definition (missing mode pair, dimension
/// mismatch, undeclared variable, ...).
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

struct Impulse {
  Vector jump;
  double cost = 0.0;
};

/// Mode pair (player-1 mode index, player-2 mode index).
struct ModePair {
  int d1 = 0;
  int d2 = 0;
  friend bool operator==(const ModePair&, const ModePair&) = default;
};

struct ProblemSpec {
  int dimension = 1;
  Matrix generator;  // A; the linear part of the dynamics is -A x
  double discount = 1.0;
  std::vector<double> u1_levels{0.0};
  std::vector<double> u2_levels{0.0};
  std::vector<std::string> d1_labels{"1"};
  std::vector<std::string> d2_labels{"1"};
  // Indexed by pair_index(); each dynamics entry has `dimension` components.
  std::vector<std::vector<expr::Expr>> dynamics;
  std::vector<expr::Expr> running_cost;
  Matrix switch_cost_1;  // m1 x m1, diagonal unused
  Matrix switch_cost_2;  // m2 x m2, diagonal unused
  std::vector<Impulse> impulses;
  std::vector<Interval> box;

  int m1() const { return static_cast<int>(d1_labels.size()); }
  int m2() const { return static_cast<int>(d2_labels.size()); }
  int pair_count() const { return m1() * m2(); }
  int pair_index(int d1, int d2) const { return d1 * m2() + d2; }
  int pair_index(ModePair p) const { return pair_index(p.d1, p.d2); }
  std::string pair_key(int d1, int d2) const { return d1_labels[d1] + "," + d2_labels[d2]; }

  /// Names usable inside expressions: x0..x{n-1}, u1, u2.
  std::vector<std::string> variable_names() const;

  Vector clamp(const Vector& x) const;
};

/// Expressions of a ProblemSpec compiled for repeated evaluation. Immutable
/// and safe to share across threads.
class Model {
 public:
  explicit Model(const ProblemSpec& spec);

  const ProblemSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }

  /// f(x, u1, d1, u2, d2) written into out (size n).
  void dynamics(int pair, const double* x, double u1, double u2, double* out) const;
  double running_cost(int pair, const double* x, double u1, double u2) const;

  Vector dynamics(ModePair p, const Vector& x, double u1, double u2) const;
  double running_cost(ModePair p, const Vector& x, double u1, double u2) const;

 private:
  ProblemSpec spec_;
  std::vector<std::vector<expr::BoundExpr>> f_;
  std::vector<expr::BoundExpr> k_;
};

ProblemSpec spec_from_document(const config::Document& doc);
ProblemSpec load_spec(const std::string& path);
/// Canonical config text; load(save(s)) reproduces s and save is idempotent.
std::string save_spec(const ProblemSpec& spec);

enum class CheckStatus { Pass, Fail, NotApplicable };
std::string_view to_string(CheckStatus s);

struct ValidationCheck {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  bool mandatory = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
  int samples = 0;
  double lipschitz_f = 0.0;
  double lipschitz_k = 0.0;
  double c1_min = 0.0;  // +inf when player 1 has a single mode
  double c2_min = 0.0;
  double l_min = 0.0;  // +inf with no impulses
  double k_sup = 0.0;
  double f_sup = 0.0;
  std::optional<double> l_gap;  // min over in-list pairs of l(a)+l(b)-l(a+b)

  bool blocking() const;
  const ValidationCheck* find(std::string_view name) const;
  std::string to_text() const;
  std::string to_kv() const;
};

/// Checks the nonnegativity, positivity and subadditivity requirements on the
/// cost data. Sampling uses a fixed seed so verdicts are reproducible.
ValidationReport validate_a2(const ProblemSpec& spec, int samples, std::uint64_t seed = 20070501);

/// Sampled estimate of the Lipschitz constant of f in x (same controls and modes).
double lipschitz_probe(const ProblemSpec& spec, int samples, std::uint64_t seed = 20070501);

struct YongConditions {
  double c2_min = 0.0;
  double l_min = 0.0;
  bool cheaper_switching = false;  // c2_min < l_min

  bool nonzero_loop = true;
  bool exhaustive = true;  // false if the enumeration budget was exhausted
  std::size_t loops_enumerated = 0;
  bool loops_with_player1_switch = false;
  std::vector<ModePair> balanced_loop;  // witness with zero net switching cost

  std::string to_text(const ProblemSpec& spec) const;
};

/// Evaluates the cheaper-switching and nonzero-loop conditions. Informational.
YongConditions check_y1_y2(const ProblemSpec& spec);

/// Visits every distinct closed walk of mode pairs with length <= max_length
/// in which each step changes exactly one player's mode. Walks are reported
/// once per rotation class, in their lexicographically smallest rotation.
/// Returns false if `budget` DFS steps were exhausted first.
bool for_each_switch_loop(int m1, int m2, int max_length, std::size_t budget,
                          const std::function<void(const std::vector<ModePair>&)>& visit);

}  // namespace hybrid
