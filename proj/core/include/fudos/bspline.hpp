#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace fudos {

/// Clamped cubic B-spline basis on [lo, hi] with equi-spaced interior knots.
class BsplineBasis {
 public:
  BsplineBasis(double lo, double hi, int n_interior);

  int size() const { return n_basis_; }
  double lo() const { return knots_.front(); }
  double hi() const { return knots_.back(); }
  const std::vector<double>& knots() const { return knots_; }

  /// Values of every basis function at t (t clamped to [lo, hi]).
  Eigen::VectorXd eval(double t) const;

  /// Second derivatives of every basis function at t.
  Eigen::VectorXd deriv2(double t) const;

  /// Row k = basis values at ts[k].
  Eigen::MatrixXd eval_matrix(std::span<const double> ts) const;

  /// Roughness penalty Gram: P(j,k) = integral of phi_j'' * phi_k'' over
  /// [lo, hi]. Second derivatives of cubics are piecewise linear, so 2-point
  /// Gauss-Legendre per knot span is exact.
  Eigen::MatrixXd penalty() const;

 private:
  double basis_value(int j, int degree, double t) const;
  double basis_deriv(int j, int degree, double t) const;
  double basis_deriv2(int j, double t) const;

  std::vector<double> knots_;  // clamped: 4x lo, interior, 4x hi
  int n_basis_;
};

}  // namespace fudos
