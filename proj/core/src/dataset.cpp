#include "fudos/dataset.hpp"

#include <cmath>
#include <string>

namespace fudos {

namespace {

void require_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  for (int i = 0; i < X.rows(); ++i) {
    for (int j = 0; j < X.cols(); ++j) {
      if (!std::isfinite(X(i, j))) {
        throw ConfigError("non-finite predictor entry at sample " + std::to_string(i) +
                          ", point " + std::to_string(j));
      }
    }
  }
  for (int i = 0; i < Y.size(); ++i) {
    if (!std::isfinite(Y(i))) {
      throw ConfigError("non-finite response at sample " + std::to_string(i));
    }
  }
}

}  // namespace

Grid1D Grid1D::make(std::vector<double> points) {
  const int p = static_cast<int>(points.size());
  if (p < 4) throw ConfigError("grid needs at least 4 points, got " + std::to_string(p));
  for (int j = 1; j < p; ++j) {
    if (!(points[j] > points[j - 1])) {
      throw ConfigError("grid points must be strictly increasing (violated at index " +
                        std::to_string(j) + ")");
    }
  }
  const double lo = points.front();
  const double span = points.back() - lo;
  if (lo < -1e-12 || points.back() > 1.0 + 1e-12) {
    // Rescale arbitrary input domains onto [0,1].
    for (double& t : points) t = (t - lo) / span;
  }
  const double step = (points.back() - points.front()) / (p - 1);
  for (int j = 1; j < p; ++j) {
    const double d = points[j] - points[j - 1];
    if (std::abs(d - step) > 1e-9 * std::max(std::abs(step), 1.0)) {
      throw ConfigError("non-uniform grid spacing at index " + std::to_string(j) +
                        " (non-uniform grids are not supported)");
    }
  }
  Grid1D g;
  g.points = std::move(points);
  return g;
}

Grid1D Grid1D::regular(int p) {
  std::vector<double> pts(p);
  for (int j = 0; j < p; ++j) pts[j] = static_cast<double>(j + 1) / p;
  return make(std::move(pts));
}

void Dataset1D::validate() const {
  if (X.rows() != Y.size()) throw ConfigError("X row count differs from Y length");
  if (X.cols() != grid.size()) throw ConfigError("X column count differs from grid size");
  if (n() < 10) throw ConfigError("dataset needs n >= 10 samples, got " + std::to_string(n()));
  require_finite(X, Y);
}

Dataset1D Dataset1D::rows(const std::vector<int>& idx) const {
  Dataset1D out;
  out.X.resize(static_cast<int>(idx.size()), X.cols());
  out.Y.resize(static_cast<int>(idx.size()));
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
    out.X.row(i) = X.row(idx[i]);
    out.Y(i) = Y(idx[i]);
  }
  out.grid = grid;
  out.centered = centered;
  out.col_means = col_means;
  out.y_mean = y_mean;
  return out;
}

void Dataset3D::validate() const {
  if (dims.H < 2 || dims.V < 2 || dims.Z < 2) {
    throw ConfigError("3D dims must each be >= 2");
  }
  if (static_cast<int>(mask.size()) != dims.voxels()) {
    throw ConfigError("mask size differs from voxel count");
  }
  if (X.cols() != dims.voxels()) throw ConfigError("X column count differs from voxel count");
  if (X.rows() != Y.size()) throw ConfigError("X row count differs from Y length");
  if (masked_count() == 0) throw ConfigError("mask has no active voxels");
  require_finite(X, Y);
}

void Dataset3D::apply_mask() {
  for (int j = 0; j < static_cast<int>(mask.size()); ++j) {
    if (!mask[j]) X.col(j).setZero();
  }
}

Dataset3D Dataset3D::rows(const std::vector<int>& idx) const {
  Dataset3D out;
  out.X.resize(static_cast<int>(idx.size()), X.cols());
  out.Y.resize(static_cast<int>(idx.size()));
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
    out.X.row(i) = X.row(idx[i]);
    out.Y(i) = Y(idx[i]);
  }
  out.dims = dims;
  out.mask = mask;
  out.centered = centered;
  out.col_means = col_means;
  out.y_mean = y_mean;
  return out;
}

int Dataset3D::masked_count() const {
  int c = 0;
  for (auto m : mask) c += m ? 1 : 0;
  return c;
}

namespace {

template <typename D>
void center_impl(D& data) {
  if (data.centered) return;
  data.col_means = data.X.colwise().mean();
  data.X.rowwise() -= data.col_means.transpose();
  data.y_mean = data.Y.mean();
  data.Y.array() -= data.y_mean;
  data.centered = true;
}

}  // namespace

void center(Dataset1D& data) {
  require_finite(data.X, data.Y);
  center_impl(data);
}

void center(Dataset3D& data) {
  require_finite(data.X, data.Y);
  center_impl(data);
  // Masked voxels have zero mean by construction, so they stay exactly zero;
  // re-apply to squash any -0.0 artifacts.
  data.apply_mask();
}

}  // namespace fudos
