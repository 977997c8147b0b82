#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

#include "hybrid/grid.hpp"

using namespace hybrid;

TEST_CASE("grid geometry") {
  GridSpec g({3, 5}, {{0.0, 1.0}, {-2.0, 2.0}});
  CHECK(g.size() == 15);
  CHECK(g.spacing(0) == 0.5);
  CHECK(g.spacing(1) == 1.0);
  CHECK(g.stride(1) == 1);
  CHECK(g.stride(0) == 5);
  Vector x = g.point(7);  // (1, 2)
  CHECK(x[0] == 0.5);
  CHECK(x[1] == 0.0);
  auto mi = g.multi_index(14);
  CHECK(mi[0] == 2);
  CHECK(mi[1] == 4);
  CHECK(g.min_spacing() == 0.5);
  CHECK_THROWS(GridSpec({1}, {{0.0, 1.0}}));
}

TEST_CASE("linear interpolation examples") {
  GridSpec g({2}, {{0.0, 1.0}});
  std::vector<double> v{0.0, 10.0};
  CHECK(interpolate(g, v, Vector::Constant(1, 0.25)) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(interpolate(g, v, Vector::Constant(1, -1.0)) == 0.0);
  CHECK(interpolate(g, v, Vector::Constant(1, 7.0)) == 10.0);
}

TEST_CASE("nodal queries reproduce stored values exactly") {
  GridSpec g({7, 4, 3}, {{-1.3, 2.9}, {0.1, 0.7}, {-5.0, 5.0}});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> v(g.size());
  for (auto& e : v) e = u(rng);
  for (std::size_t p = 0; p < g.size(); ++p) CHECK(interpolate(g, v, g.point(p)) == v[p]);
}

TEST_CASE("multilinear interpolation reproduces affine functions") {
  GridSpec g({4, 6}, {{-1.0, 2.0}, {0.0, 5.0}});
  std::vector<double> v(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    Vector x = g.point(p);
    v[p] = 3.0 * x[0] - 2.0 * x[1] + 1.0;
  }
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> a(-1.0, 2.0), b(0.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    Vector x(2);
    x << a(rng), b(rng);
    CHECK(interpolate(g, v, x) == doctest::Approx(3.0 * x[0] - 2.0 * x[1] + 1.0).epsilon(1e-12));
  }
}

TEST_CASE("value field layout") {
  GridSpec g({5}, {{0.0, 1.0}});
  ValueField V(g, 2, 3, 1.5);
  CHECK(V.data().size() == 30);
  V.at(1, 2, 4) = 9.0;
  CHECK(V.slice(1, 2)[4] == 9.0);
  CHECK(V.data().back() == 9.0);
  CHECK(V.interpolate(1, 2, Vector::Constant(1, 1.0)) == 9.0);
  ValueField W(g, 2, 3, 1.5);
  CHECK(sup_distance(V, W) == 7.5);
  CHECK(V.same_shape(W));
  CHECK_FALSE(V.same_shape(ValueField(g, 3, 2)));
  V.at(0, 0, 0) = std::nan("");
  CHECK_FALSE(V.all_finite());
}

TEST_CASE("semigroup step examples") {
  CHECK(semigroup_step(Matrix::Zero(2, 2), 0.3).isIdentity(0.0));
  Matrix a(1, 1);
  a << 0.5;
  CHECK(semigroup_step(a, 0.1)(0, 0) == doctest::Approx(std::exp(-0.05)).epsilon(1e-15));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  Matrix s = semigroup_step(d, 1.0);
  CHECK(s(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(s(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(std::abs(s(0, 1)) < 1e-300);
}

TEST_CASE("semigroup step agrees with an independent matrix exponential") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const int dim = 1 + t % 4;
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = n(rng);
    const double dt = 0.05 * (1 + t % 7);
    Matrix ref = (-dt * a).exp();
    Matrix got = semigroup_step(a, dt);
    CHECK((got - ref).lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + ref.lpNorm<Eigen::Infinity>()));
  }
}
