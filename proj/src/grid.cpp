#include "hybrid/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hybrid {

GridSpec::GridSpec(std::vector<int> counts, std::vector<Interval> box)
    : counts_(std::move(counts)), box_(std::move(box)) {
  if (counts_.size() != box_.size())
    throw SpecError("grid has " + std::to_string(counts_.size()) + " point counts for a " +
                    std::to_string(box_.size()) + "-dimensional box");
  if (counts_.empty() || counts_.size() > 6) throw SpecError("grid dimension must be between 1 and 6");
  size_ = 1;
  strides_.assign(counts_.size(), 1);
  for (std::size_t d = counts_.size(); d-- > 0;) {
    if (counts_[d] < 2) throw SpecError("grid needs at least 2 points per dimension");
    if (!(box_[d].low < box_[d].high)) throw SpecError("grid box interval is empty");
    strides_[d] = size_;
    size_ *= static_cast<std::size_t>(counts_[d]);
  }
  for (std::size_t d = 0; d < counts_.size(); ++d)
    spacing_.push_back((box_[d].high - box_[d].low) / (counts_[d] - 1));
}

double GridSpec::min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }

std::array<int, 6> GridSpec::multi_index(std::size_t flat) const {
  std::array<int, 6> idx{};
  for (int d = 0; d < dimension(); ++d) {
    idx[d] = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
  }
  return idx;
}

Vector GridSpec::point(std::size_t flat) const {
  Vector x(dimension());
  point(flat, x.data());
  return x;
}

void GridSpec::point(std::size_t flat, double* out) const {
  auto idx = multi_index(flat);
  for (int d = 0; d < dimension(); ++d) out[d] = coordinate(d, idx[d]);
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  if (a.counts_ != b.counts_) return false;
  for (std::size_t d = 0; d < a.box_.size(); ++d)
    if (a.box_[d].low != b.box_[d].low || a.box_[d].high != b.box_[d].high) return false;
  return true;
}

Stencil locate(const GridSpec& grid, const double* x) {
  Stencil s;
  for (int d = 0; d < grid.dimension(); ++d) {
    const Interval& iv = grid.box()[d];
    const int cells = grid.counts()[d] - 1;
    double xc = std::clamp(x[d], iv.low, iv.high);
    double t = (xc - iv.low) / grid.spacing(d);
    double r = std::round(t);
    if (std::abs(t - r) <= 1e-12) t = r;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, cells - 1);
    s.frac[d] = std::clamp(t - i, 0.0, 1.0);
    s.base += static_cast<std::size_t>(i) * grid.stride(d);
  }
  return s;
}

double evaluate(const GridSpec& grid, std::span<const double> values, const Stencil& s) {
  const int n = grid.dimension();
  double total = 0.0;
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    double w = 1.0;
    std::size_t idx = s.base;
    for (int d = 0; d < n; ++d) {
      if (corner & (1u << d)) {
        w *= s.frac[d];
        idx += grid.stride(d);
      } else {
        w *= 1.0 - s.frac[d];
      }
    }
    // zero weights also skip corners that would lie past the last node
    if (w != 0.0) total += w * values[idx];
  }
  return total;
}

double interpolate(const GridSpec& grid, std::span<const double> values, const Vector& x) {
  return evaluate(grid, values, locate(grid, x.data()));
}

ValueField::ValueField(GridSpec grid, int m1, int m2, double fill)
    : grid_(std::move(grid)), m1_(m1), m2_(m2), data_(static_cast<std::size_t>(m1) * m2 * grid_.size(), fill) {}

double ValueField::interpolate(int d1, int d2, const Vector& x) const {
  return hybrid::interpolate(grid_, slice(d1, d2), x);
}

bool ValueField::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool ValueField::same_shape(const ValueField& o) const {
  return m1_ == o.m1_ && m2_ == o.m2_ && grid_ == o.grid_;
}

double sup_distance(const ValueField& a, const ValueField& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("sup_distance: value fields have different shapes");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

Matrix semigroup_step(const Matrix& generator, double dt) {
  if (generator.rows() != generator.cols()) throw std::invalid_argument("semigroup_step: generator must be square");
  if (!(dt > 0.0)) throw std::invalid_argument("semigroup_step: dt must be positive");
  const Eigen::Index n = generator.rows();
  Matrix m = -dt * generator;
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
  if (!std::isfinite(norm)) throw std::overflow_error("semigroup_step: generator has non-finite entries");

  // Scale so that ||M / 2^s|| <= 1/2; 20 Taylor terms then reach well below
  // double rounding (0.5^21 / 21! ~ 1e-26).
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  m /= std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = term * m / static_cast<double>(k);
    result += term;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  if (!result.allFinite()) throw std::overflow_error("semigroup_step: matrix exponential overflowed");
  return result;
}

}  // namespace hybrid
