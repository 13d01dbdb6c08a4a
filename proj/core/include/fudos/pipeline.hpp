#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fudos/clustering.hpp"
#include "fudos/dataset.hpp"
#include "fudos/regression.hpp"
#include "fudos/stability.hpp"

namespace fudos {

// ---------------------------------------------------------------------------
// Simulation generators

/// Disconnected smooth coefficient function on t_j = j/p: a cosine bump on
/// indices 50..56 and a sine bump on 94..100 (1-based, p = 128 reference;
/// other p rescale the index windows proportionally), zero elsewhere.
Eigen::VectorXd beta_1d(int p);

/// True support of beta_1d as 0-based grid indices.
std::vector<int> beta_1d_support(int p);

struct BallSpec {
  double ch = -1, cv = -1, cz = -1;  // negative = scale the reference ball
  double radius = -1;
  double height = 10.0;
};

/// Piecewise-constant ball coefficient. The reference ball sits at
/// (60,30,5) with radius 5 on a 120x120x10 grid; other dims scale the
/// center per axis and the radius by the geometric mean of the axis scales.
Eigen::VectorXd beta_3d_ball(const Dims3D& dims, const BallSpec& spec = {});

std::vector<int> beta_3d_support(const Dims3D& dims, const BallSpec& spec = {});

/// ARMA(2,2) paths: X_j = 0.8 X_{j-1} - 0.1 X_{j-2} + e_j - 0.1 e_{j-1}
/// + 0.9 e_{j-2}, standard normal innovations, 50-step burn-in.
Dataset1D sim_arma(int n, int p, std::uint64_t seed);

/// Random cubic B-spline curves: coefficients ~ N(0,4) on the clamped cubic
/// basis with interior knots at 1/16..15/16.
Dataset1D sim_bspline(int n, int p, std::uint64_t seed);

/// Zero-mean Gaussian 3D fields with exactly separable covariance, AR(1)
/// correlation per axis (full mask).
Dataset3D sim_field3d(int n, const Dims3D& dims, const std::array<double, 3>& axis_corr,
                      std::uint64_t seed);

/// Y_i = <X_i, beta> + noise with variance var(<X,beta>)/snr. Infinite snr
/// means no noise. Throws NumericError when the signal variance is zero.
Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, double ip_scale,
                             const Eigen::VectorXd& beta, double snr, std::uint64_t seed);

struct SimSpec {
  enum class Kind { kArma1d, kBspline1d, kField3d };
  Kind kind = Kind::kArma1d;
  int n = 100;
  int p = 128;                      // 1D
  Dims3D dims{40, 40, 10};          // 3D
  std::array<double, 3> axis_corr{0.9, 0.9, 0.9};
  double snr = 20.0;
  std::uint64_t seed = 0;
  BallSpec ball;                    // 3D coefficient
  bool with_response = true;
};

// ---------------------------------------------------------------------------
// Predictive models

struct ClusterParams {
  double eps = 2.0;
  int min_pts = 3;

  static ClusterParams defaults_1d() { return {2.0, 2}; }
  static ClusterParams defaults_3d() { return {2.0, 3}; }
};

/// Sparse predictive model for one cutoff pi: the stable points, their
/// clustering into segments, and the fitted sparse coefficient (exactly
/// zero off the stable subdomain).
struct PredictiveModel {
  double pi = 0.0;
  Fitter fitter = Fitter::kPwc;
  std::vector<int> stable_points;
  ClusterAssignment clusters;
  Segments segments;  // one per cluster; points are stable members only
  PwcModel pwc;            // used when fitter == kPwc or stable set empty
  PsplineModel pspline;    // used when fitter == kPspline
  bool intercept_only = false;
  Eigen::VectorXd x_center;
  double y_center = 0.0;
  bool is_3d = false;
  Dims3D dims;  // 3D only
};

PredictiveModel build_model(const Dataset1D& data, const FrequencyMap& map, double pi,
                            const ClusterParams& params, Fitter fitter,
                            std::span<const double> lambda_grid = {});
PredictiveModel build_model(const Dataset3D& data, const FrequencyMap& map, double pi,
                            const ClusterParams& params, Fitter fitter);

/// Predictions on the original response scale; accepts raw or centered data.
Eigen::VectorXd predict(const PredictiveModel& model, const Dataset1D& data);
Eigen::VectorXd predict(const PredictiveModel& model, const Dataset3D& data);

// ---------------------------------------------------------------------------
// Metrics and evaluation

/// Coverage of the truth: |truth and est| / |truth|.
double metric_p1(const std::vector<int>& truth, const std::vector<int>& estimate);
/// Jaccard-penalized coverage: |truth and est| / |truth or est|.
double metric_p2(const std::vector<int>& truth, const std::vector<int>& estimate);

double rmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);

struct EvalReport {
  std::vector<double> pi_ladder;
  std::vector<double> p1_mean, p1_sd;
  std::vector<double> p2_mean, p2_sd;
  std::vector<double> rmse_mean, rmse_sd;
  int replicates = 0;
};

/// Default record ladder 0.05, 0.15, ..., 0.95.
std::vector<double> default_pi_ladder();

struct ProtocolConfig {
  SimSpec sim;
  int replicates = 20;
  StabilityConfig stability;
  std::vector<double> pi_ladder;
  ClusterParams cluster;
  Fitter fitter = Fitter::kPwc;
  int test_size = 1000;
  std::uint64_t master_seed = 0;
  int threads = 0;
};

/// Full simulation protocol: per replicate, generate train/test data, run
/// the stability pipeline on the training set, and score P1/P2/RMSE per pi
/// against the known truth. Replicates use derived seeds and may run
/// concurrently.
EvalReport run_protocol(const ProtocolConfig& config);

struct KfoldConfig {
  int folds = 10;
  double pi = 0.3;
  StabilityConfig stability;
  ClusterParams cluster;
  Fitter fitter = Fitter::kPwc;
  std::uint64_t seed = 0;
};

struct KfoldResult {
  double r2 = 0.0;
  double rmse = 0.0;
  Eigen::VectorXd predictions;  // out-of-fold prediction per sample
};

/// K-fold predictive harness: reruns the whole stability pipeline per
/// training fold; test rows never touch segmentation, selection, stability
/// or fitting. R^2 = 1 - sum (Y - Yhat)^2 / sum (Y - Ybar)^2.
KfoldResult kfold_predict(const Dataset1D& data, const KfoldConfig& config);

}  // namespace fudos
