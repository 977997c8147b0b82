#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hybrid/problem.hpp"

namespace hybrid {

/// Uniform tensor grid over the problem box. Flat indices are row-major with
/// the last coordinate varying fastest.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(std::vector<int> counts, std::vector<Interval> box);

  int dimension() const { return static_cast<int>(counts_.size()); }
  std::size_t size() const { return size_; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<Interval>& box() const { return box_; }
  double spacing(int d) const { return spacing_[d]; }
  double min_spacing() const;
  std::size_t stride(int d) const { return strides_[d]; }

  /// Coordinate `low + i*h` along dimension d.
  double coordinate(int d, int i) const { return box_[d].low + i * spacing_[d]; }
  std::array<int, 6> multi_index(std::size_t flat) const;
  Vector point(std::size_t flat) const;
  void point(std::size_t flat, double* out) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b);

 private:
  std::vector<int> counts_;
  std::vector<Interval> box_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Cell of the multilinear interpolant: lower-corner flat index plus the
/// fractional position inside the cell along each dimension.
struct Stencil {
  std::size_t base = 0;
  std::array<double, 6> frac{};
};

/// Locates clamp(x, box). Points within 1e-12 cells of a node snap onto it so
/// nodal queries reproduce stored values exactly.
Stencil locate(const GridSpec& grid, const double* x);
double evaluate(const GridSpec& grid, std::span<const double> values, const Stencil& s);

/// Multilinear interpolation of nodal values at clamp(x, box).
double interpolate(const GridSpec& grid, std::span<const double> values, const Vector& x);

/// Value functions V^{d1,d2} for all mode pairs, sampled on a grid.
class ValueField {
 public:
  ValueField() = default;
  ValueField(GridSpec grid, int m1, int m2, double fill = 0.0);

  const GridSpec& grid() const { return grid_; }
  int m1() const { return m1_; }
  int m2() const { return m2_; }
  int pair_count() const { return m1_ * m2_; }
  std::size_t points() const { return grid_.size(); }

  double& at(int d1, int d2, std::size_t p) { return data_[(d1 * m2_ + d2) * grid_.size() + p]; }
  double at(int d1, int d2, std::size_t p) const { return data_[(d1 * m2_ + d2) * grid_.size() + p]; }

  std::span<double> slice(int pair) { return {data_.data() + pair * grid_.size(), grid_.size()}; }
  std::span<const double> slice(int pair) const { return {data_.data() + pair * grid_.size(), grid_.size()}; }
  std::span<const double> slice(int d1, int d2) const { return slice(d1 * m2_ + d2); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double interpolate(int d1, int d2, const Vector& x) const;

  bool all_finite() const;
  bool same_shape(const ValueField& other) const;

 private:
  GridSpec grid_;
  int m1_ = 0;
  int m2_ = 0;
  std::vector<double> data_;
};

/// max |a - b| over every mode pair and node.
double sup_distance(const ValueField& a, const ValueField& b);

/// Matrix exponential exp(-dt * A) by scaling and squaring of a truncated
/// Taylor series. Throws std::overflow_error if the result is not finite.
Matrix semigroup_step(const Matrix& generator, double dt);

}  // namespace hybrid
