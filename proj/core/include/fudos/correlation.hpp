#pragma once

#include <Eigen/Core>
#include <array>
#include <span>
#include <vector>

#include "fudos/dataset.hpp"

namespace fudos {

/// Absolute correlation |corr(X(t_j), X(t_k))| over the sample, with
/// zero-variance points flagged invalid and their rows/columns zeroed so
/// they drop out of every downstream integral.
struct CorrMatrix {
  Eigen::MatrixXd C;        // p x p, entries in [0,1]
  std::vector<bool> valid;  // per grid point

  int size() const { return static_cast<int>(C.rows()); }
};

/// Prefix-sum table over a CorrMatrix with the 1/p^2 Riemann scaling, so any
/// block integral I([a,b]^2) is an O(1) inclusion-exclusion query.
class IntegralTable {
 public:
  explicit IntegralTable(const CorrMatrix& corr);

  /// Integral of C over the index block [a,b] x [a,b], inclusive.
  double block(int a, int b) const;

  /// Integral over the full domain.
  double full() const { return block(0, p_ - 1); }

  int size() const { return p_; }

 private:
  Eigen::MatrixXd S_;  // (p+1) x (p+1) scaled prefix sums
  int p_;
};

/// abs_correlation of a centered dataset. Throws NumericError if every grid
/// point has zero variance ("degenerate dataset").
CorrMatrix abs_correlation(const Dataset1D& data);

/// Correlation from an n x p matrix of centered samples (shared by the 1D
/// path and by callers that already hold a plain matrix).
CorrMatrix abs_correlation(const Eigen::MatrixXd& X);

/// Midpoint-Riemann inner product (1/p) * sum_j x_j * b_j.
double riemann_ip(std::span<const double> x, std::span<const double> b);
double riemann_ip(const Eigen::VectorXd& x, const Eigen::VectorXd& b);

/// Marginal covariances of a centered 3D dataset under separability, one per
/// axis (H, V, Z), each normalized to an absolute correlation matrix.
/// Volume constants cancel in the normalization so raw sums are used.
std::array<CorrMatrix, 3> marginal_covariances(const Dataset3D& data);

/// The raw (un-normalized) marginal sum matrices, exposed for testing the
/// covariance form directly.
std::array<Eigen::MatrixXd, 3> marginal_sums(const Dataset3D& data);

}  // namespace fudos
