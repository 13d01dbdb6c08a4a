#include "fudos/correlation.hpp"

#include <cmath>
#include <string>

namespace fudos {

CorrMatrix abs_correlation(const Eigen::MatrixXd& X) {
  const int p = static_cast<int>(X.cols());
  CorrMatrix out;
  out.valid.assign(p, true);

  // Gram of columns; X is centered so this is n * covariance.
  Eigen::MatrixXd G = X.transpose() * X;
  Eigen::VectorXd sd = G.diagonal().array().sqrt();

  int n_valid = 0;
  for (int j = 0; j < p; ++j) {
    if (!(sd(j) > 0.0)) {
      out.valid[j] = false;
    } else {
      ++n_valid;
    }
  }
  if (n_valid == 0) throw NumericError("degenerate dataset: every grid point has zero variance");

  out.C.resize(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k <= j; ++k) {
      double v = 0.0;
      if (out.valid[j] && out.valid[k]) {
        v = std::abs(G(j, k)) / (sd(j) * sd(k));
        if (v > 1.0) v = 1.0;  // clip rounding overshoot
      }
      out.C(j, k) = v;
      out.C(k, j) = v;
    }
  }
  for (int j = 0; j < p; ++j) out.C(j, j) = out.valid[j] ? 1.0 : 0.0;
  return out;
}

CorrMatrix abs_correlation(const Dataset1D& data) {
  if (!data.centered) throw ConfigError("abs_correlation needs a centered dataset");
  return abs_correlation(data.X);
}

IntegralTable::IntegralTable(const CorrMatrix& corr) : p_(corr.size()) {
  const double scale = 1.0 / (static_cast<double>(p_) * p_);
  S_.setZero(p_ + 1, p_ + 1);
  for (int j = 0; j < p_; ++j) {
    for (int k = 0; k < p_; ++k) {
      S_(j + 1, k + 1) = corr.C(j, k) * scale + S_(j, k + 1) + S_(j + 1, k) - S_(j, k);
    }
  }
}

double IntegralTable::block(int a, int b) const {
  if (a < 0 || b >= p_ || a > b) {
    throw ConfigError("integral block [" + std::to_string(a) + "," + std::to_string(b) +
                      "] outside grid of size " + std::to_string(p_));
  }
  return S_(b + 1, b + 1) - S_(a, b + 1) - S_(b + 1, a) + S_(a, a);
}

double riemann_ip(std::span<const double> x, std::span<const double> b) {
  if (x.size() != b.size()) throw ConfigError("riemann_ip length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += x[j] * b[j];
  return acc / static_cast<double>(x.size());
}

double riemann_ip(const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  return riemann_ip(std::span<const double>(x.data(), x.size()),
                    std::span<const double>(b.data(), b.size()));
}

std::array<Eigen::MatrixXd, 3> marginal_sums(const Dataset3D& data) {
  const auto [H, V, Z] = data.dims;
  const int n = data.n();
  Eigen::MatrixXd GH = Eigen::MatrixXd::Zero(H, H);
  Eigen::MatrixXd GV = Eigen::MatrixXd::Zero(V, V);
  Eigen::MatrixXd GZ = Eigen::MatrixXd::Zero(Z, Z);

  // Each sample, reshaped with the target axis as rows, contributes its own
  // Gram; masked voxels are zero and fall out automatically.
  Eigen::MatrixXd MH(H, V * Z), MV(V, H * Z), MZ(Z, H * V);
  for (int i = 0; i < n; ++i) {
    for (int z = 0; z < Z; ++z) {
      for (int v = 0; v < V; ++v) {
        for (int h = 0; h < H; ++h) {
          const double x = data.X(i, data.dims.flat(h, v, z));
          MH(h, z * V + v) = x;
          MV(v, z * H + h) = x;
          MZ(z, v * H + h) = x;
        }
      }
    }
    GH.noalias() += MH * MH.transpose();
    GV.noalias() += MV * MV.transpose();
    GZ.noalias() += MZ * MZ.transpose();
  }
  GH /= n;
  GV /= n;
  GZ /= n;
  return {GH, GV, GZ};
}

namespace {

CorrMatrix normalize_marginal(const Eigen::MatrixXd& G, char axis) {
  const int p = static_cast<int>(G.rows());
  CorrMatrix out;
  out.valid.assign(p, true);
  Eigen::VectorXd sd = G.diagonal().array().max(0.0).sqrt();
  int n_valid = 0;
  for (int j = 0; j < p; ++j) {
    if (!(sd(j) > 0.0)) {
      out.valid[j] = false;
    } else {
      ++n_valid;
    }
  }
  if (n_valid == 0) {
    throw NumericError(std::string("axis ") + axis + ": all grid points have zero variance");
  }
  out.C.resize(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k <= j; ++k) {
      double v = 0.0;
      if (out.valid[j] && out.valid[k]) {
        v = std::abs(G(j, k)) / (sd(j) * sd(k));
        if (v > 1.0) v = 1.0;
      }
      out.C(j, k) = v;
      out.C(k, j) = v;
    }
  }
  for (int j = 0; j < p; ++j) out.C(j, j) = out.valid[j] ? 1.0 : 0.0;
  return out;
}

}  // namespace

std::array<CorrMatrix, 3> marginal_covariances(const Dataset3D& data) {
  if (!data.centered) throw ConfigError("marginal_covariances needs a centered dataset");
  const auto sums = marginal_sums(data);
  return {normalize_marginal(sums[0], 'H'), normalize_marginal(sums[1], 'V'),
          normalize_marginal(sums[2], 'Z')};
}

}  // namespace fudos
