#pragma once

// Shared helpers and independent oracles for the test suites. Oracles here
// deliberately avoid the library's fast paths (prefix tables, cached Grams,
// eigen-path solvers) so they check the implementation, not mirror it.

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "fudos/correlation.hpp"
#include "fudos/dataset.hpp"
#include "fudos/rng.hpp"

namespace fudos::testing {

/// |corr| by a plain O(n p^2) double loop.
inline Eigen::MatrixXd naive_abs_corr(const Eigen::MatrixXd& Xc) {
  const int n = static_cast<int>(Xc.rows());
  const int p = static_cast<int>(Xc.cols());
  Eigen::MatrixXd C(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      double sjk = 0.0, sjj = 0.0, skk = 0.0;
      for (int i = 0; i < n; ++i) {
        sjk += Xc(i, j) * Xc(i, k);
        sjj += Xc(i, j) * Xc(i, j);
        skk += Xc(i, k) * Xc(i, k);
      }
      C(j, k) = std::abs(sjk) / std::sqrt(sjj * skk);
    }
  }
  return C;
}

/// Direct double sum over an inclusive index block with the 1/p^2 weight.
inline double naive_block_integral(const Eigen::MatrixXd& C, int a, int b) {
  const double p = static_cast<double>(C.rows());
  double acc = 0.0;
  for (int j = a; j <= b; ++j) {
    for (int k = a; k <= b; ++k) acc += C(j, k);
  }
  return acc / (p * p);
}

/// Inner product with long double accumulation.
inline double highprec_riemann_ip(const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  long double acc = 0.0L;
  for (int j = 0; j < x.size(); ++j) {
    acc += static_cast<long double>(x(j)) * static_cast<long double>(b(j));
  }
  return static_cast<double>(acc / static_cast<long double>(x.size()));
}

/// AR(1) sample paths, for correlation tests.
inline Eigen::MatrixXd ar1_sample(int n, int p, double phi, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    for (int j = 0; j < p; ++j) {
      x = phi * x + rng.normal();
      X(i, j) = x;
    }
  }
  return X;
}

/// Population AR(1) absolute correlation matrix.
inline CorrMatrix ar1_corr(int p, double phi) {
  CorrMatrix corr;
  corr.valid.assign(p, true);
  corr.C.resize(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) corr.C(j, k) = std::pow(std::abs(phi), std::abs(j - k));
  }
  return corr;
}

/// Block-diagonal correlation: ones (or rho_in) within blocks, zero across.
inline CorrMatrix block_corr(const std::vector<int>& block_sizes, double rho_in = 1.0) {
  int p = std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
  CorrMatrix corr;
  corr.valid.assign(p, true);
  corr.C = Eigen::MatrixXd::Zero(p, p);
  int start = 0;
  for (int size : block_sizes) {
    for (int j = start; j < start + size; ++j) {
      for (int k = start; k < start + size; ++k) corr.C(j, k) = j == k ? 1.0 : rho_in;
    }
    start += size;
  }
  return corr;
}

}  // namespace fudos::testing
