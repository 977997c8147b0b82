#include "hybrid/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "hybrid/parallel.hpp"

namespace hybrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view to_string(HamiltonianVariant v) { return v == HamiltonianVariant::Plus ? "plus" : "minus"; }

HamiltonianVariant parse_variant(std::string_view s) {
  if (s == "plus") return HamiltonianVariant::Plus;
  if (s == "minus") return HamiltonianVariant::Minus;
  throw std::invalid_argument("unknown Hamiltonian variant '" + std::string(s) + "' (expected plus or minus)");
}

SaddleChoice saddle(std::span<const double> table, int n1, int n2, HamiltonianVariant variant) {
  SaddleChoice best;
  if (variant == HamiltonianVariant::Plus) {
    best.value = -kInf;
    for (int i = 0; i < n1; ++i) {
      int arg = 0;
      double inner = table[i * n2];
      for (int j = 1; j < n2; ++j)
        if (table[i * n2 + j] < inner) inner = table[i * n2 + j], arg = j;
      if (inner > best.value) best = {i, arg, inner};
    }
  } else {
    best.value = kInf;
    for (int j = 0; j < n2; ++j) {
      int arg = 0;
      double inner = table[j];
      for (int i = 1; i < n1; ++i)
        if (table[i * n2 + j] > inner) inner = table[i * n2 + j], arg = i;
      if (inner < best.value) best = {arg, j, inner};
    }
  }
  return best;
}

double hamiltonian(const Model& model, HamiltonianVariant variant, ModePair modes, const Vector& x,
                   const Vector& p) {
  const auto& s = model.spec();
  const int n1 = static_cast<int>(s.u1_levels.size()), n2 = static_cast<int>(s.u2_levels.size());
  const int pair = s.pair_index(modes);
  std::vector<double> table(static_cast<std::size_t>(n1) * n2);
  Vector f(s.dimension);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      model.dynamics(pair, x.data(), s.u1_levels[i], s.u2_levels[j], f.data());
      double k = model.running_cost(pair, x.data(), s.u1_levels[i], s.u2_levels[j]);
      table[i * n2 + j] = -p.dot(f) - k;
    }
  }
  // Plus = min_u1 max_u2, the negated saddle of the negated table under Plus.
  for (auto& v : table) v = -v;
  return -saddle(table, n1, n2, variant).value;
}

double hamiltonian(const ProblemSpec& spec, HamiltonianVariant variant, ModePair modes, const Vector& x,
                   const Vector& p) {
  return hamiltonian(Model(spec), variant, modes, x, p);
}

std::vector<Vector> sample_costates(int dimension, int random_count, double scale, std::uint64_t seed) {
  std::vector<Vector> out;
  out.push_back(Vector::Zero(dimension));
  for (int d = 0; d < dimension; ++d) {
    for (double m : {1.0, -1.0, scale, -scale}) {
      Vector e = Vector::Zero(dimension);
      e[d] = m;
      out.push_back(e);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (int i = 0; i < random_count; ++i) {
    Vector p(dimension);
    for (int d = 0; d < dimension; ++d) p[d] = dist(rng);
    out.push_back(p);
  }
  return out;
}

double isaacs_gap(const ProblemSpec& spec, const GridSpec& grid, std::span<const Vector> costates) {
  Model model(spec);
  double gap = 0.0;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    Vector x = grid.point(q);
    for (int a = 0; a < spec.m1(); ++a)
      for (int b = 0; b < spec.m2(); ++b)
        for (const auto& p : costates) {
          double hp = hamiltonian(model, HamiltonianVariant::Plus, {a, b}, x, p);
          double hm = hamiltonian(model, HamiltonianVariant::Minus, {a, b}, x, p);
          gap = std::max(gap, std::abs(hp - hm));
        }
  }
  return gap;
}

double isaacs_gap(const ProblemSpec& spec, const GridSpec& grid, int costate_samples) {
  auto ps = sample_costates(spec.dimension, costate_samples, 1.0);
  return isaacs_gap(spec, grid, ps);
}

double switch_obstacle_lower(const ValueField& V, const ProblemSpec& spec, std::size_t p, int d1, int d2) {
  double best = kInf;
  for (int e = 0; e < spec.m2(); ++e)
    if (e != d2) best = std::min(best, V.at(d1, e, p) + spec.switch_cost_2(d2, e));
  return best;
}

double switch_obstacle_upper(const ValueField& V, const ProblemSpec& spec, std::size_t p, int d1, int d2) {
  double best = -kInf;
  for (int e = 0; e < spec.m1(); ++e)
    if (e != d1) best = std::max(best, V.at(e, d2, p) - spec.switch_cost_1(d1, e));
  return best;
}

double switch_obstacle_lower_at(const ValueField& V, const ProblemSpec& spec, const Vector& x, int d1, int d2,
                                int* argmin) {
  double best = kInf;
  int arg = -1;
  for (int e = 0; e < spec.m2(); ++e) {
    if (e == d2) continue;
    double v = V.interpolate(d1, e, x) + spec.switch_cost_2(d2, e);
    if (v < best) best = v, arg = e;
  }
  if (argmin) *argmin = arg;
  return best;
}

double switch_obstacle_upper_at(const ValueField& V, const ProblemSpec& spec, const Vector& x, int d1, int d2,
                                int* argmax) {
  double best = -kInf;
  int arg = -1;
  for (int e = 0; e < spec.m1(); ++e) {
    if (e == d1) continue;
    double v = V.interpolate(e, d2, x) - spec.switch_cost_1(d1, e);
    if (v > best) best = v, arg = e;
  }
  if (argmax) *argmax = arg;
  return best;
}

double impulse_obstacle(const ValueField& V, const ProblemSpec& spec, const Vector& x, int d1, int d2,
                        int* argmin) {
  double best = kInf;
  int arg = -1;
  for (std::size_t i = 0; i < spec.impulses.size(); ++i) {
    double v = V.interpolate(d1, d2, x + spec.impulses[i].jump) + spec.impulses[i].cost;
    if (v < best) best = v, arg = static_cast<int>(i);
  }
  if (argmin) *argmin = arg;
  return best;
}

void propagate(const Matrix& semigroup, const double* x, const double* f, double dt, int n, double* out) {
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += semigroup(i, j) * x[j];
    out[i] = acc + dt * f[i];
  }
}

double quadrature_weight(double discount, double dt) { return -std::expm1(-discount * dt) / discount; }

BellmanOperator::BellmanOperator(const ProblemSpec& spec, const GridSpec& grid, double dt,
                                 HamiltonianVariant variant)
    : model_(spec),
      grid_(grid),
      dt_(dt),
      variant_(variant),
      decay_(std::exp(-spec.discount * dt)),
      weight_(quadrature_weight(spec.discount, dt)),
      semigroup_(semigroup_step(spec.generator, dt)),
      n1_(static_cast<int>(spec.u1_levels.size())),
      n2_(static_cast<int>(spec.u2_levels.size())) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (grid.dimension() != spec.dimension) throw SpecError("grid dimension does not match the problem dimension");
  const int n = spec.dimension;
  const std::size_t points = grid_.size();
  const std::size_t controls = static_cast<std::size_t>(n1_) * n2_;
  weighted_cost_.resize(spec.pair_count() * points * controls);
  feet_.resize(weighted_cost_.size());

  k_sup_ = -kInf;
  k_inf_ = kInf;
  std::vector<double> x(n), f(n), foot(n);
  for (int pair = 0; pair < spec.pair_count(); ++pair) {
    for (std::size_t p = 0; p < points; ++p) {
      grid_.point(p, x.data());
      std::size_t base = table_index(pair, p);
      for (int i = 0; i < n1_; ++i) {
        for (int j = 0; j < n2_; ++j) {
          const double u1 = spec.u1_levels[i], u2 = spec.u2_levels[j];
          double k = model_.running_cost(pair, x.data(), u1, u2);
          model_.dynamics(pair, x.data(), u1, u2, f.data());
          propagate(semigroup_, x.data(), f.data(), dt_, n, foot.data());
          k_sup_ = std::max(k_sup_, k);
          k_inf_ = std::min(k_inf_, k);
          weighted_cost_[base + i * n2_ + j] = weight_ * k;
          feet_[base + i * n2_ + j] = locate(grid_, foot.data());
        }
      }
    }
  }

  const std::size_t ni = spec.impulses.size();
  impulse_targets_.resize(points * ni);
  for (std::size_t p = 0; p < points; ++p) {
    grid_.point(p, x.data());
    for (std::size_t m = 0; m < ni; ++m) {
      for (int d = 0; d < n; ++d) foot[d] = x[d] + spec.impulses[m].jump[d];
      impulse_targets_[p * ni + m] = locate(grid_, foot.data());
    }
  }
}

std::size_t BellmanOperator::table_index(int pair, std::size_t p) const {
  return (static_cast<std::size_t>(pair) * grid_.size() + p) * static_cast<std::size_t>(n1_) * n2_;
}

SaddleChoice BellmanOperator::continuation(const ValueField& V, int pair, std::size_t p) const {
  const std::size_t controls = static_cast<std::size_t>(n1_) * n2_;
  const std::size_t base = table_index(pair, p);
  const auto slice = V.slice(pair);
  double stack_table[64];
  std::vector<double> heap;
  double* table = stack_table;
  if (controls > 64) {
    heap.resize(controls);
    table = heap.data();
  }
  for (std::size_t c = 0; c < controls; ++c)
    table[c] = weighted_cost_[base + c] + decay_ * evaluate(grid_, slice, feet_[base + c]);
  return saddle({table, controls}, n1_, n2_, variant_);
}

double BellmanOperator::impulse_obstacle(const ValueField& V, int pair, std::size_t p) const {
  const auto& imps = model_.spec().impulses;
  const auto slice = V.slice(pair);
  double best = kInf;
  for (std::size_t m = 0; m < imps.size(); ++m)
    best = std::min(best, evaluate(grid_, slice, impulse_targets_[p * imps.size() + m]) + imps[m].cost);
  return best;
}

void BellmanOperator::apply(const ValueField& in, ValueField& out, int threads) const {
  const auto& s = model_.spec();
  if (in.grid().size() != grid_.size() || in.m1() != s.m1() || in.m2() != s.m2())
    throw std::invalid_argument("value field does not match the operator's grid and modes");
  if (!out.same_shape(in)) out = ValueField(in.grid(), in.m1(), in.m2());
  parallel_for(grid_.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (int a = 0; a < s.m1(); ++a) {
      for (int b = 0; b < s.m2(); ++b) {
        const int pair = s.pair_index(a, b);
        for (std::size_t p = begin; p < end; ++p) {
          double cont = continuation(in, pair, p).value;
          double upper = switch_obstacle_upper(in, s, p, a, b);
          double lower = switch_obstacle_lower(in, s, p, a, b);
          double jump = impulse_obstacle(in, pair, p);
          out.at(a, b, p) = std::max(upper, std::min({lower, jump, cont}));
        }
      }
    }
  });
}

ValueField BellmanOperator::apply(const ValueField& in, int threads) const {
  ValueField out(in.grid(), in.m1(), in.m2());
  apply(in, out, threads);
  return out;
}

void BellmanOperator::apply_continuation(const ValueField& in, ValueField& out, int threads) const {
  if (!out.same_shape(in)) out = ValueField(in.grid(), in.m1(), in.m2());
  parallel_for(grid_.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (int pair = 0; pair < in.pair_count(); ++pair)
      for (std::size_t p = begin; p < end; ++p) out.slice(pair)[p] = continuation(in, pair, p).value;
  });
}

ValueField bellman_update(const ValueField& V, const ProblemSpec& spec, double dt, HamiltonianVariant variant) {
  return BellmanOperator(spec, V.grid(), dt, variant).apply(V);
}

double ResidualField::max_abs(const std::vector<double>& field, bool interior_only) const {
  const std::size_t points = grid.size();
  double m = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (interior_only && !interior[i % points]) continue;
    m = std::max(m, std::abs(field[i]));
  }
  return m;
}

ResidualField sqvi_residual(const ValueField& V, const ProblemSpec& spec, double dt, HamiltonianVariant variant,
                            int threads) {
  BellmanOperator op(spec, V.grid(), dt, variant);
  ValueField TV = op.apply(V, threads);
  const GridSpec& g = V.grid();
  const int n = g.dimension();
  const std::size_t points = g.size();
  const std::size_t total = points * V.pair_count();

  ResidualField r;
  r.grid = g;
  r.pairs = V.pair_count();
  for (auto* f : {&r.pde, &r.upper_gap, &r.lower_gap, &r.impulse_gap, &r.hji1, &r.hji2, &r.fixed_point})
    f->assign(total, 0.0);
  r.interior.assign(points, 1);
  for (std::size_t p = 0; p < points; ++p) {
    auto idx = g.multi_index(p);
    for (int d = 0; d < n; ++d)
      if (idx[d] == 0 || idx[d] == g.counts()[d] - 1) r.interior[p] = 0;
  }

  const Model& model = op.model();
  parallel_for(points, threads, [&](std::size_t begin, std::size_t end) {
    Vector x(n), grad(n);
    for (int a = 0; a < spec.m1(); ++a) {
      for (int b = 0; b < spec.m2(); ++b) {
        const int pair = spec.pair_index(a, b);
        const auto slice = V.slice(pair);
        for (std::size_t p = begin; p < end; ++p) {
          g.point(p, x.data());
          auto idx = g.multi_index(p);
          for (int d = 0; d < n; ++d) {
            const std::size_t st = g.stride(d);
            const double h = g.spacing(d);
            const int last = g.counts()[d] - 1;
            if (idx[d] == 0) grad[d] = (slice[p + st] - slice[p]) / h;
            else if (idx[d] == last) grad[d] = (slice[p] - slice[p - st]) / h;
            else grad[d] = (slice[p + st] - slice[p - st]) / (2.0 * h);
          }
          const double v = slice[p];
          const double pde = spec.discount * v + (spec.generator * x).dot(grad) +
                             hamiltonian(model, variant, {a, b}, x, grad);
          const double mp = switch_obstacle_upper(V, spec, p, a, b);
          const double mm = switch_obstacle_lower(V, spec, p, a, b);
          const double nn = op.impulse_obstacle(V, pair, p);
          const std::size_t i = pair * points + p;
          r.pde[i] = pde;
          r.upper_gap[i] = v - mp;
          r.lower_gap[i] = mm - v;
          r.impulse_gap[i] = nn - v;
          r.hji1[i] = std::min(std::max({pde, v - mm, v - nn}), v - mp);
          r.hji2[i] = std::max({std::min(pde, v - mp), v - mm, v - nn});
          r.fixed_point[i] = std::abs(TV.slice(pair)[p] - v);
        }
      }
    }
  });
  return r;
}

}  // namespace hybrid
