#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "fudos/common.hpp"

namespace fudos {

/// Equi-spaced sampling grid on a domain inside [0,1].
///
/// Non-uniform grids are rejected: all downstream quadrature uses the 1/p
/// Riemann weight, which assumes equal spacing.
struct Grid1D {
  std::vector<double> points;

  int size() const { return static_cast<int>(points.size()); }

  /// Validates ordering, minimum length, [0,1] range and uniform spacing
  /// (1e-9 relative tolerance). Throws ConfigError on violation.
  static Grid1D make(std::vector<double> points);

  /// The grid t_j = j/p, j = 1..p, used by the simulation protocols.
  static Grid1D regular(int p);
};

/// Sampled 1D functional predictors (rows) with scalar responses.
struct Dataset1D {
  Eigen::MatrixXd X;  // n x p
  Eigen::VectorXd Y;  // n
  Grid1D grid;
  bool centered = false;
  Eigen::VectorXd col_means;  // stored by center(); empty otherwise
  double y_mean = 0.0;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }

  /// Validates dimensions and finiteness (n >= 10, no NaN/Inf).
  void validate() const;

  Dataset1D rows(const std::vector<int>& idx) const;
};

/// Voxel volumes flattened in the fixed (z,v,h) layout:
/// flat index = (z*V + v)*H + h, all axes 0-based.
struct Dims3D {
  int H = 0, V = 0, Z = 0;
  int voxels() const { return H * V * Z; }
  int flat(int h, int v, int z) const { return (z * V + v) * H + h; }
  std::array<int, 3> unflat(int idx) const {
    const int h = idx % H;
    const int v = (idx / H) % V;
    const int z = idx / (H * V);
    return {h, v, z};
  }
};

/// Sampled 3D functional predictors. Masked-out voxels are identically zero
/// in every sample; the invariant is enforced at construction and preserved
/// by centering.
struct Dataset3D {
  Eigen::MatrixXd X;  // n x (H*V*Z)
  Eigen::VectorXd Y;  // n
  Dims3D dims;
  std::vector<std::uint8_t> mask;  // 1 = inside, same layout as X columns
  bool centered = false;
  Eigen::VectorXd col_means;
  double y_mean = 0.0;

  int n() const { return static_cast<int>(X.rows()); }

  void validate() const;

  /// Zeroes all masked-out columns. Loaders and generators call this once.
  void apply_mask();

  Dataset3D rows(const std::vector<int>& idx) const;

  int masked_count() const;
};

/// Subtracts per-column means from X and the mean from Y, storing them for
/// prediction-time re-centering. Idempotent: centering centered data is a
/// no-op on the values and keeps the originally stored means.
void center(Dataset1D& data);
void center(Dataset3D& data);

}  // namespace fudos
