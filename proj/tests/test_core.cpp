#include <doctest.h>

#include <Eigen/Dense>

#include "fudos/correlation.hpp"
#include "fudos/dataset.hpp"
#include "fudos/pipeline.hpp"
#include "fudos/rng.hpp"
#include "test_util.hpp"

using namespace fudos;
namespace ft = fudos::testing;

namespace {

Dataset1D tiny_dataset(int n, int p, std::uint64_t seed) {
  Dataset1D data;
  data.grid = Grid1D::regular(p);
  Rng rng(seed);
  data.X.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) data.X(i, j) = rng.normal();
  }
  data.Y.resize(n);
  for (int i = 0; i < n; ++i) data.Y(i) = rng.normal();
  return data;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid1D::make({0.0, 0.5, 1.0}), ConfigError);         // too short
  CHECK_THROWS_AS(Grid1D::make({0.0, 0.5, 0.4, 1.0}), ConfigError);    // not increasing
  CHECK_THROWS_AS(Grid1D::make({0.0, 0.1, 0.5, 1.0}), ConfigError);    // non-uniform
  const Grid1D g = Grid1D::make({900.0, 1100.0, 1300.0, 1500.0, 1700.0});
  CHECK(g.points.front() == doctest::Approx(0.0));
  CHECK(g.points.back() == doctest::Approx(1.0));
}

TEST_CASE("centering: definition, idempotence, recovery") {
  Dataset1D data;
  data.grid = Grid1D::regular(4);
  data.X.resize(2, 4);
  data.X << 1, 0, 5, -2,
            3, 0, 7,  2;
  data.Y.resize(2);
  data.Y << 1.0, 3.0;
  const Eigen::MatrixXd X_orig = data.X;
  const Eigen::VectorXd Y_orig = data.Y;

  center(data);
  CHECK(data.X(0, 0) == doctest::Approx(-1.0));
  CHECK(data.X(1, 0) == doctest::Approx(1.0));
  CHECK(data.col_means(0) == doctest::Approx(2.0));
  CHECK(data.y_mean == doctest::Approx(2.0));

  // Idempotence.
  const Eigen::MatrixXd once = data.X;
  center(data);
  CHECK((data.X - once).cwiseAbs().maxCoeff() < 1e-12);

  // Adding the stored means back recovers the input.
  Eigen::MatrixXd restored = data.X;
  restored.rowwise() += data.col_means.transpose();
  CHECK((restored - X_orig).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(((data.Y.array() + data.y_mean).matrix() - Y_orig).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("centering an ARMA sample zeroes every column mean") {
  Dataset1D data = sim_arma(50, 64, 11);
  center(data);
  for (int j = 0; j < data.p(); ++j) {
    CHECK(std::abs(data.X.col(j).mean()) < 1e-12);
  }
  CHECK(std::abs(data.Y.mean()) < 1e-12);
}

TEST_CASE("centering rejects non-finite input with location") {
  Dataset1D data = tiny_dataset(12, 6, 3);
  data.X(4, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(center(data), doctest::Contains("sample 4"), ConfigError);
}

TEST_CASE("abs_correlation: hand-checked two-point case") {
  // Point a values (1,-1), point b values (2,-2), two extra points so the
  // grid is valid; all centered already.
  Dataset1D data;
  data.grid = Grid1D::regular(4);
  data.X.resize(2, 4);
  data.X << 1, 2, 1, -1,
           -1, -2, -1, 1;
  data.Y = Eigen::VectorXd::Zero(2);
  data.centered = true;
  const CorrMatrix corr = abs_correlation(data);
  CHECK(corr.C(0, 1) == doctest::Approx(1.0));
  CHECK(corr.C(0, 3) == doctest::Approx(1.0));  // anti-correlated, absolute value
  CHECK(corr.C(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("abs_correlation flags zero-variance points and zeroes their rows") {
  Dataset1D data = tiny_dataset(20, 6, 5);
  center(data);
  data.X.col(3).setZero();
  const CorrMatrix corr = abs_correlation(data);
  CHECK_FALSE(corr.valid[3]);
  CHECK(corr.valid[0]);
  CHECK(corr.C.row(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(corr.C.col(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("abs_correlation: all points invalid is degenerate") {
  Dataset1D data;
  data.grid = Grid1D::regular(4);
  data.X = Eigen::MatrixXd::Zero(10, 4);
  data.Y = Eigen::VectorXd::Zero(10);
  data.centered = true;
  CHECK_THROWS_AS(abs_correlation(data), NumericError);
}

TEST_CASE("abs_correlation matches the naive double-loop oracle") {
  Eigen::MatrixXd X = ft::ar1_sample(200, 24, 0.6, 17);
  X.rowwise() -= X.colwise().mean();
  const CorrMatrix corr = abs_correlation(X);
  const Eigen::MatrixXd oracle = ft::naive_abs_corr(X);
  CHECK((corr.C - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("CorrMatrix invariants: symmetry, unit diagonal, range") {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd X = ft::ar1_sample(50, 16, 0.2 + 0.15 * trial, 100 + trial);
    X.rowwise() -= X.colwise().mean();
    const CorrMatrix corr = abs_correlation(X);
    CHECK((corr.C - corr.C.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    for (int j = 0; j < corr.size(); ++j) {
      CHECK(corr.C(j, j) == doctest::Approx(1.0));
    }
    CHECK(corr.C.minCoeff() >= 0.0);
    CHECK(corr.C.maxCoeff() <= 1.0);
  }
}

TEST_CASE("integral table: constant matrix and single point") {
  const int p = 16;
  CorrMatrix corr;
  corr.valid.assign(p, true);
  corr.C = Eigen::MatrixXd::Ones(p, p);
  const IntegralTable table(corr);
  CHECK(table.full() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table.block(3, 3) == doctest::Approx(1.0 / (p * p)).epsilon(1e-12));
  CHECK_THROWS_AS(table.block(-1, 3), ConfigError);
  CHECK_THROWS_AS(table.block(3, p), ConfigError);
}

TEST_CASE("integral table matches direct double sums on random blocks") {
  const int p = 40;
  Rng rng(7);
  CorrMatrix corr;
  corr.valid.assign(p, true);
  corr.C.resize(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k <= j; ++k) {
      const double v = rng.uniform();
      corr.C(j, k) = v;
      corr.C(k, j) = v;
    }
  }
  const IntegralTable table(corr);
  for (int trial = 0; trial < 1000; ++trial) {
    const int a = static_cast<int>(rng.below(p));
    const int b = a + static_cast<int>(rng.below(p - a));
    const double direct = ft::naive_block_integral(corr.C, a, b);
    CHECK(table.block(a, b) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("riemann_ip: constants, zero, length mismatch") {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(128);
  CHECK(riemann_ip(ones, ones) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(riemann_ip(ones, Eigen::VectorXd::Zero(128)) == 0.0);
  CHECK_THROWS_AS(riemann_ip(ones, Eigen::VectorXd::Ones(64)), ConfigError);
}

TEST_CASE("riemann_ip matches high-precision summation on case-1 data") {
  const Dataset1D data = sim_arma(1, 128, 21);
  const Eigen::VectorXd beta = beta_1d(128);
  const Eigen::VectorXd x = data.X.row(0);
  CHECK(riemann_ip(x, beta) == doctest::Approx(ft::highprec_riemann_ip(x, beta)).epsilon(1e-12));
}

TEST_CASE("marginal covariances: singleton axes reduce to the 1D covariance") {
  const int H = 8, n = 30;
  Dataset3D data;
  data.dims = {H, 1, 1};
  data.mask.assign(H, 1);
  Rng rng(31);
  data.X.resize(n, H);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < H; ++j) data.X(i, j) = rng.normal();
  }
  data.Y = Eigen::VectorXd::Zero(n);
  data.X.rowwise() -= data.X.colwise().mean();
  const auto sums = marginal_sums(data);
  const Eigen::MatrixXd direct = data.X.transpose() * data.X / n;
  CHECK((sums[0] - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("marginal covariances are symmetric") {
  Dataset3D data = sim_field3d(40, {6, 5, 4}, {0.5, 0.4, 0.3}, 13);
  center(data);
  const auto sums = marginal_sums(data);
  for (const auto& G : sums) {
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("marginal correlation recovers separable axis factors") {
  const std::array<double, 3> corr{0.7, 0.5, 0.3};
  Dataset3D data = sim_field3d(500, {10, 8, 6}, corr, 41);
  center(data);
  const auto marginals = marginal_covariances(data);
  for (int axis = 0; axis < 3; ++axis) {
    const int p = marginals[axis].size();
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k < p; ++k) {
        const double expected = std::pow(corr[axis], std::abs(j - k));
        CHECK(std::abs(marginals[axis].C(j, k) - expected) < 0.1);
      }
    }
  }
}

TEST_CASE("marginal covariances reject a fully masked axis") {
  Dataset3D data = sim_field3d(20, {4, 4, 4}, {0.2, 0.2, 0.2}, 5);
  for (int z = 0; z < 4; ++z) {
    for (int v = 0; v < 4; ++v) {
      for (int h = 0; h < 4; ++h) data.mask[data.dims.flat(h, v, z)] = 0;
    }
  }
  data.apply_mask();
  data.centered = true;
  CHECK_THROWS_AS(marginal_covariances(data), NumericError);
}

TEST_CASE("masked voxels stay exactly zero through centering") {
  Dataset3D data = sim_field3d(25, {4, 4, 3}, {0.4, 0.4, 0.4}, 77);
  data.mask[data.dims.flat(1, 2, 0)] = 0;
  data.mask[data.dims.flat(3, 0, 2)] = 0;
  data.apply_mask();
  center(data);
  CHECK(data.X.col(data.dims.flat(1, 2, 0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(data.X.col(data.dims.flat(3, 0, 2)).cwiseAbs().maxCoeff() == 0.0);
}
