#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "hybrid/grid.hpp"
#include "hybrid/problem.hpp"

namespace hybrid {

/// Plus: min over u1 of max over u2 in the Hamiltonian, i.e. the discrete
/// continuation value is max over u1 of min over u2. Minus swaps the order.
enum class HamiltonianVariant { Plus, Minus };

std::string_view to_string(HamiltonianVariant v);
HamiltonianVariant parse_variant(std::string_view s);

/// Hamiltonian H(x, p) of the mode pair, by enumeration of the control grids.
double hamiltonian(const Model& model, HamiltonianVariant variant, ModePair modes, const Vector& x,
                   const Vector& p);
double hamiltonian(const ProblemSpec& spec, HamiltonianVariant variant, ModePair modes, const Vector& x,
                   const Vector& p);

/// Deterministic costate set: 0, +-e_i, +-e_i scaled, and `random_count`
/// seeded draws from [-scale, scale]^n.
std::vector<Vector> sample_costates(int dimension, int random_count, double scale = 5.0,
                                    std::uint64_t seed = 20070501);

/// max |H_plus - H_minus| over grid nodes, mode pairs and the given costates.
double isaacs_gap(const ProblemSpec& spec, const GridSpec& grid, std::span<const Vector> costates);
/// Costates from the unit cube, so the gap reads per unit |p|.
double isaacs_gap(const ProblemSpec& spec, const GridSpec& grid, int costate_samples);

/// Player-2 switching obstacle min_{e != d2} V^{d1,e} + c2(d2, e) at node p; +inf if m2 == 1.
double switch_obstacle_lower(const ValueField& V, const ProblemSpec& spec, std::size_t p, int d1, int d2);
/// Player-1 switching obstacle max_{e != d1} V^{e,d2} - c1(d1, e) at node p; -inf if m1 == 1.
double switch_obstacle_upper(const ValueField& V, const ProblemSpec& spec, std::size_t p, int d1, int d2);

/// Same obstacles at an arbitrary state by interpolation.
double switch_obstacle_lower_at(const ValueField& V, const ProblemSpec& spec, const Vector& x, int d1, int d2,
                                int* argmin = nullptr);
double switch_obstacle_upper_at(const ValueField& V, const ProblemSpec& spec, const Vector& x, int d1, int d2,
                                int* argmax = nullptr);

/// Impulse obstacle min over impulses of V^{d1,d2}(clamp(x + xi)) + l(xi); +inf if none.
double impulse_obstacle(const ValueField& V, const ProblemSpec& spec, const Vector& x, int d1, int d2,
                        int* argmin = nullptr);

/// One-step state map S(dt) x + dt f.
void propagate(const Matrix& semigroup, const double* x, const double* f, double dt, int n, double* out);

/// Running-cost quadrature weight (1 - exp(-lambda dt)) / lambda.
double quadrature_weight(double discount, double dt);

struct SaddleChoice {
  int u1 = 0;  // indices into the control level lists
  int u2 = 0;
  double value = 0.0;
};

/// Saddle value of a row-major (u1 rows, u2 columns) payoff table under the
/// variant's order. Ties go to the lowest index.
SaddleChoice saddle(std::span<const double> table, int n1, int n2, HamiltonianVariant variant);

/// The discrete dynamic-programming operator
///   T[V] = max(M+[V], min(M-[V], N[V], C[V]))
/// with the semi-Lagrangian continuation
///   C[V](x) = opt_u1 opt_u2 [ w k(x,u) + e^{-lambda dt} V(clamp(S(dt) x + dt f(x,u))) ].
/// Feet of characteristics, impulse targets and running costs are tabulated
/// once at construction.
class BellmanOperator {
 public:
  BellmanOperator(const ProblemSpec& spec, const GridSpec& grid, double dt, HamiltonianVariant variant);

  const ProblemSpec& spec() const { return model_.spec(); }
  const Model& model() const { return model_; }
  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }
  HamiltonianVariant variant() const { return variant_; }
  double discount_factor() const { return decay_; }
  double weight() const { return weight_; }
  const Matrix& semigroup() const { return semigroup_; }
  /// max over nodes, controls and mode pairs of k; exact bound for the scheme.
  double running_cost_sup() const { return k_sup_; }
  double running_cost_inf() const { return k_inf_; }

  void apply(const ValueField& in, ValueField& out, int threads = 1) const;
  ValueField apply(const ValueField& in, int threads = 1) const;

  /// Continuation value and its saddle controls at node p.
  SaddleChoice continuation(const ValueField& V, int pair, std::size_t p) const;
  /// Continuation branch only; obstacles ignored.
  void apply_continuation(const ValueField& in, ValueField& out, int threads = 1) const;
  double impulse_obstacle(const ValueField& V, int pair, std::size_t p) const;

 private:
  std::size_t table_index(int pair, std::size_t p) const;

  Model model_;
  GridSpec grid_;
  double dt_;
  HamiltonianVariant variant_;
  double decay_;
  double weight_;
  Matrix semigroup_;
  int n1_, n2_;
  double k_sup_ = 0.0;
  double k_inf_ = 0.0;
  std::vector<double> weighted_cost_;  // [pair][point][u1][u2]
  std::vector<Stencil> feet_;          // same layout
  std::vector<Stencil> impulse_targets_;  // [point][impulse]
};

/// Convenience wrapper building a BellmanOperator for one application.
ValueField bellman_update(const ValueField& V, const ProblemSpec& spec, double dt, HamiltonianVariant variant);

struct ResidualField {
  GridSpec grid;
  int pairs = 0;
  // All arrays indexed [pair * points + p].
  std::vector<double> pde;             // lambda V + <Ax, DV> + H(x, DV)
  std::vector<double> upper_gap;       // V - M+[V]   (>= 0 at a solution)
  std::vector<double> lower_gap;       // M-[V] - V   (>= 0)
  std::vector<double> impulse_gap;     // N[V] - V    (>= 0)
  std::vector<double> hji1;            // min{max(pde, V-M-, V-N), V-M+}
  std::vector<double> hji2;            // max{min(pde, V-M+), V-M-, V-N}
  std::vector<double> fixed_point;     // |T[V] - V|
  std::vector<char> interior;          // per point

  double max_abs(const std::vector<double>& field, bool interior_only) const;
};

ResidualField sqvi_residual(const ValueField& V, const ProblemSpec& spec, double dt, HamiltonianVariant variant,
                            int threads = 1);

}  // namespace hybrid
