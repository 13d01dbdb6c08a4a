#include "fudos/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "fudos/common.hpp"

namespace fudos {

namespace {
constexpr int kDegree = 3;
}

BsplineBasis::BsplineBasis(double lo, double hi, int n_interior) {
  if (!(hi > lo)) throw ConfigError("spline interval must have positive length");
  if (n_interior < 0) throw ConfigError("negative interior knot count");
  knots_.reserve(2 * (kDegree + 1) + n_interior);
  for (int i = 0; i <= kDegree; ++i) knots_.push_back(lo);
  for (int i = 1; i <= n_interior; ++i) {
    knots_.push_back(lo + (hi - lo) * i / (n_interior + 1));
  }
  for (int i = 0; i <= kDegree; ++i) knots_.push_back(hi);
  n_basis_ = n_interior + kDegree + 1;
}

double BsplineBasis::basis_value(int j, int degree, double t) const {
  if (degree == 0) {
    // Half-open spans, except the last nonzero span which closes at hi so
    // the basis still sums to one at the right endpoint.
    if (knots_[j] <= t && t < knots_[j + 1]) return 1.0;
    if (t == knots_.back() && knots_[j] < knots_[j + 1] && knots_[j + 1] == knots_.back()) {
      return 1.0;
    }
    return 0.0;
  }
  double acc = 0.0;
  const double d1 = knots_[j + degree] - knots_[j];
  if (d1 > 0.0) acc += (t - knots_[j]) / d1 * basis_value(j, degree - 1, t);
  const double d2 = knots_[j + degree + 1] - knots_[j + 1];
  if (d2 > 0.0) acc += (knots_[j + degree + 1] - t) / d2 * basis_value(j + 1, degree - 1, t);
  return acc;
}

double BsplineBasis::basis_deriv(int j, int degree, double t) const {
  double acc = 0.0;
  const double d1 = knots_[j + degree] - knots_[j];
  if (d1 > 0.0) acc += degree / d1 * basis_value(j, degree - 1, t);
  const double d2 = knots_[j + degree + 1] - knots_[j + 1];
  if (d2 > 0.0) acc -= degree / d2 * basis_value(j + 1, degree - 1, t);
  return acc;
}

double BsplineBasis::basis_deriv2(int j, double t) const {
  double acc = 0.0;
  const double d1 = knots_[j + kDegree] - knots_[j];
  if (d1 > 0.0) acc += kDegree / d1 * basis_deriv(j, kDegree - 1, t);
  const double d2 = knots_[j + kDegree + 1] - knots_[j + 1];
  if (d2 > 0.0) acc -= kDegree / d2 * basis_deriv(j + 1, kDegree - 1, t);
  return acc;
}

Eigen::VectorXd BsplineBasis::eval(double t) const {
  t = std::clamp(t, knots_.front(), knots_.back());
  Eigen::VectorXd out(n_basis_);
  for (int j = 0; j < n_basis_; ++j) out(j) = basis_value(j, kDegree, t);
  return out;
}

Eigen::VectorXd BsplineBasis::deriv2(double t) const {
  t = std::clamp(t, knots_.front(), knots_.back());
  Eigen::VectorXd out(n_basis_);
  for (int j = 0; j < n_basis_; ++j) out(j) = basis_deriv2(j, t);
  return out;
}

Eigen::MatrixXd BsplineBasis::eval_matrix(std::span<const double> ts) const {
  Eigen::MatrixXd out(static_cast<int>(ts.size()), n_basis_);
  for (int k = 0; k < static_cast<int>(ts.size()); ++k) {
    out.row(k) = eval(ts[k]).transpose();
  }
  return out;
}

Eigen::MatrixXd BsplineBasis::penalty() const {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n_basis_, n_basis_);
  const double node = 0.5 / std::sqrt(3.0);
  for (std::size_t s = kDegree; s + kDegree + 1 < knots_.size(); ++s) {
    const double a = knots_[s], b = knots_[s + 1];
    if (!(b > a)) continue;
    const double h = b - a;
    const double mid = 0.5 * (a + b);
    for (const double t : {mid - node * h, mid + node * h}) {
      Eigen::VectorXd d2(n_basis_);
      for (int j = 0; j < n_basis_; ++j) d2(j) = basis_deriv2(j, t);
      P.noalias() += (0.5 * h) * (d2 * d2.transpose());
    }
  }
  return P;
}

}  // namespace fudos
