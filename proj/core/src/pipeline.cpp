#include "fudos/pipeline.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "fudos/bspline.hpp"
#include "fudos/parallel.hpp"
#include "fudos/rng.hpp"

namespace fudos {

// ---------------------------------------------------------------------------
// Coefficient functions

Eigen::VectorXd beta_1d(int p) {
  if (p < 8) throw ConfigError("beta_1d needs p >= 8");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const double scale = static_cast<double>(p) / 128.0;
  const auto win = [scale](int lo, int hi) {
    return std::pair<int, int>{static_cast<int>(std::lround(lo * scale)),
                               static_cast<int>(std::lround(hi * scale))};
  };
  const auto [lo1, hi1] = win(50, 56);
  const auto [lo2, hi2] = win(94, 100);
  for (int j = 1; j <= p; ++j) {
    const double t = static_cast<double>(j) / p;
    double v = 0.0;
    if (j >= lo1 && j <= hi1) {
      v = 0.5 * std::cos(40.0 * t - std::numbers::pi) + 2.0 * t;
    } else if (j >= lo2 && j <= hi2) {
      v = 0.5 * std::sin(40.0 * t - std::numbers::pi) + 2.0 * t;
    }
    beta(j - 1) = v;
  }
  return beta;
}

std::vector<int> beta_1d_support(int p) {
  const Eigen::VectorXd beta = beta_1d(p);
  std::vector<int> support;
  for (int i = 0; i < p; ++i) {
    if (beta(i) != 0.0) support.push_back(i);
  }
  return support;
}

namespace {

BallSpec resolve_ball(const Dims3D& dims, BallSpec spec) {
  const double sh = dims.H / 120.0, sv = dims.V / 120.0, sz = dims.Z / 10.0;
  if (spec.ch < 0) spec.ch = 60.0 * sh;
  if (spec.cv < 0) spec.cv = 30.0 * sv;
  if (spec.cz < 0) spec.cz = 5.0 * sz;
  if (spec.radius < 0) spec.radius = 5.0 * std::cbrt(sh * sv * sz);
  return spec;
}

}  // namespace

Eigen::VectorXd beta_3d_ball(const Dims3D& dims, const BallSpec& spec_in) {
  const BallSpec spec = resolve_ball(dims, spec_in);
  const double r2 = spec.radius * spec.radius;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(dims.voxels());
  bool hit = false;
  for (int z = 0; z < dims.Z; ++z) {
    for (int v = 0; v < dims.V; ++v) {
      for (int h = 0; h < dims.H; ++h) {
        const double d2 = (h - spec.ch) * (h - spec.ch) + (v - spec.cv) * (v - spec.cv) +
                          (z - spec.cz) * (z - spec.cz);
        if (d2 <= r2) {
          beta(dims.flat(h, v, z)) = spec.height;
          hit = true;
        }
      }
    }
  }
  if (!hit) throw ConfigError("ball coefficient does not intersect the grid");
  return beta;
}

std::vector<int> beta_3d_support(const Dims3D& dims, const BallSpec& spec) {
  const Eigen::VectorXd beta = beta_3d_ball(dims, spec);
  std::vector<int> support;
  for (int i = 0; i < beta.size(); ++i) {
    if (beta(i) != 0.0) support.push_back(i);
  }
  return support;
}

// ---------------------------------------------------------------------------
// Data generators

Dataset1D sim_arma(int n, int p, std::uint64_t seed) {
  if (p < 3) throw ConfigError("sim_arma needs p >= 3");
  constexpr int kBurnIn = 50;
  Dataset1D data;
  data.grid = Grid1D::regular(p);
  data.X.resize(n, p);
  data.Y = Eigen::VectorXd::Zero(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    double x1 = 0.0, x2 = 0.0, e1 = 0.0, e2 = 0.0;
    for (int j = -kBurnIn; j < p; ++j) {
      const double e = rng.normal();
      const double x = 0.8 * x1 - 0.1 * x2 + e - 0.1 * e1 + 0.9 * e2;
      if (j >= 0) data.X(i, j) = x;
      x2 = x1;
      x1 = x;
      e2 = e1;
      e1 = e;
    }
  }
  return data;
}

Dataset1D sim_bspline(int n, int p, std::uint64_t seed) {
  if (p < 17) throw ConfigError("sim_bspline needs p >= 17");
  Dataset1D data;
  data.grid = Grid1D::regular(p);
  const BsplineBasis basis(0.0, 1.0, 15);  // interior knots 1/16..15/16
  const Eigen::MatrixXd phi = basis.eval_matrix(data.grid.points);
  data.X.resize(n, p);
  data.Y = Eigen::VectorXd::Zero(n);
  Rng rng(seed);
  Eigen::VectorXd coef(basis.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < basis.size(); ++j) coef(j) = 2.0 * rng.normal();  // N(0, 4)
    data.X.row(i) = (phi * coef).transpose();
  }
  return data;
}

Dataset3D sim_field3d(int n, const Dims3D& dims, const std::array<double, 3>& axis_corr,
                      std::uint64_t seed) {
  for (double a : axis_corr) {
    if (a < 0.0 || a >= 1.0) throw ConfigError("axis correlation must lie in [0,1)");
  }
  const auto ar1_chol = [](int p, double a) {
    Eigen::MatrixXd C(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) C(i, j) = std::pow(a, std::abs(i - j));
    }
    return Eigen::MatrixXd(Eigen::LLT<Eigen::MatrixXd>(C).matrixL());
  };
  const Eigen::MatrixXd LH = ar1_chol(dims.H, axis_corr[0]);
  const Eigen::MatrixXd LV = ar1_chol(dims.V, axis_corr[1]);
  const Eigen::MatrixXd LZ = ar1_chol(dims.Z, axis_corr[2]);

  Dataset3D data;
  data.dims = dims;
  data.mask.assign(dims.voxels(), 1);
  data.X.resize(n, dims.voxels());
  data.Y = Eigen::VectorXd::Zero(n);

  Rng rng(seed);
  Eigen::VectorXd buf(dims.voxels());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < buf.size(); ++j) buf(j) = rng.normal();
    // Mode products exploit the (z,v,h) layout: h is fastest.
    Eigen::Map<Eigen::MatrixXd> mh(buf.data(), dims.H, dims.V * dims.Z);
    mh = LH * mh;
    for (int z = 0; z < dims.Z; ++z) {
      Eigen::Map<Eigen::MatrixXd> slab(buf.data() + static_cast<std::ptrdiff_t>(z) * dims.H * dims.V,
                                       dims.H, dims.V);
      slab = slab * LV.transpose();
    }
    Eigen::Map<Eigen::MatrixXd> mz(buf.data(), dims.H * dims.V, dims.Z);
    mz = mz * LZ.transpose();
    data.X.row(i) = buf.transpose();
  }
  return data;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& X, double ip_scale,
                             const Eigen::VectorXd& beta, double snr, std::uint64_t seed) {
  if (X.cols() != beta.size()) throw ConfigError("gen_response: beta length mismatch");
  if (!(snr > 0.0)) throw ConfigError("gen_response: SNR must be positive");
  Eigen::VectorXd signal = (X * beta) * ip_scale;
  if (!std::isfinite(snr)) return signal;
  const int n = static_cast<int>(signal.size());
  const double mean = signal.mean();
  const double var = (signal.array() - mean).square().sum() / std::max(1, n - 1);
  if (!(var > 0.0)) throw NumericError("gen_response: zero signal variance with finite SNR");
  const double sigma = std::sqrt(var / snr);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) signal(i) += sigma * rng.normal();
  return signal;
}

// ---------------------------------------------------------------------------
// Predictive models

namespace {

Segments cluster_segments(const std::vector<int>& stable, const ClusterAssignment& assignment) {
  Segments segments(assignment.k);
  for (std::size_t i = 0; i < stable.size(); ++i) {
    segments[assignment.labels[i]].points.push_back(stable[i]);
  }
  for (auto& seg : segments) std::sort(seg.points.begin(), seg.points.end());
  return segments;
}

std::vector<int> all_indices(std::size_t k) {
  std::vector<int> all(k);
  for (std::size_t i = 0; i < k; ++i) all[i] = static_cast<int>(i);
  return all;
}

}  // namespace

PredictiveModel build_model(const Dataset1D& data, const FrequencyMap& map, double pi,
                            const ClusterParams& params, Fitter fitter,
                            std::span<const double> lambda_grid) {
  if (!data.centered) throw ConfigError("build_model needs a centered dataset");
  PredictiveModel model;
  model.pi = pi;
  model.fitter = fitter;
  model.x_center = data.col_means;
  model.y_center = data.y_mean;
  model.stable_points = stable_subdomain(map, pi).points;

  if (model.stable_points.empty()) {
    model.intercept_only = true;
    model.pwc.intercept = data.Y.mean();
    return model;
  }

  model.clusters = density_cluster_1d(model.stable_points, params.eps, params.min_pts);
  model.segments = cluster_segments(model.stable_points, model.clusters);
  const auto subset = all_indices(model.segments.size());

  if (fitter == Fitter::kPwc) {
    model.pwc = fit_pwc(features(data, model.segments, subset), data.Y);
    model.pwc.x_center = data.col_means;
    model.pwc.y_center = data.y_mean;
  } else {
    model.pspline = fit_pspline(data, model.segments, subset, lambda_grid);
  }
  return model;
}

PredictiveModel build_model(const Dataset3D& data, const FrequencyMap& map, double pi,
                            const ClusterParams& params, Fitter fitter) {
  if (!data.centered) throw ConfigError("build_model needs a centered dataset");
  if (fitter != Fitter::kPwc) {
    throw ConfigError("3D predictive models support the piecewise-constant fitter only");
  }
  PredictiveModel model;
  model.pi = pi;
  model.fitter = fitter;
  model.is_3d = true;
  model.dims = data.dims;
  model.x_center = data.col_means;
  model.y_center = data.y_mean;
  model.stable_points = stable_subdomain(map, pi).points;

  if (model.stable_points.empty()) {
    model.intercept_only = true;
    model.pwc.intercept = data.Y.mean();
    return model;
  }

  std::vector<std::array<double, 3>> coords;
  coords.reserve(model.stable_points.size());
  for (int idx : model.stable_points) {
    const auto [h, v, z] = data.dims.unflat(idx);
    coords.push_back({static_cast<double>(h), static_cast<double>(v), static_cast<double>(z)});
  }
  model.clusters = density_cluster(coords, params.eps, params.min_pts);
  model.segments = cluster_segments(model.stable_points, model.clusters);
  const auto subset = all_indices(model.segments.size());

  model.pwc = fit_pwc(features(data, model.segments, subset), data.Y);
  model.pwc.x_center = data.col_means;
  model.pwc.y_center = data.y_mean;
  return model;
}

namespace {

template <typename D>
Eigen::VectorXd predict_impl(const PredictiveModel& model, const D& data, double ip_scale) {
  if (model.intercept_only) {
    return Eigen::VectorXd::Constant(data.n(), model.pwc.intercept + model.y_center);
  }
  if (model.fitter == Fitter::kPspline) {
    if constexpr (std::is_same_v<D, Dataset1D>) {
      return predict(model.pspline, data);
    } else {
      throw ConfigError("pspline predictive models are 1D only");
    }
  }
  Eigen::MatrixXd X = data.X;
  if (!data.centered) {
    if (model.x_center.size() != X.cols()) {
      throw ConfigError("predict: centering means do not match dataset width");
    }
    X.rowwise() -= model.x_center.transpose();
  }
  const SegmentFeatures feats =
      features(X, ip_scale, model.segments, all_indices(model.segments.size()));
  return (feats.F * model.pwc.coefs).array() + model.pwc.intercept + model.y_center;
}

}  // namespace

Eigen::VectorXd predict(const PredictiveModel& model, const Dataset1D& data) {
  return predict_impl(model, data, 1.0 / data.p());
}

Eigen::VectorXd predict(const PredictiveModel& model, const Dataset3D& data) {
  return predict_impl(model, data, 1.0 / data.dims.voxels());
}

// ---------------------------------------------------------------------------
// Metrics

namespace {

int intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  int count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

double metric_p1(const std::vector<int>& truth, const std::vector<int>& estimate) {
  if (truth.empty()) throw ConfigError("metric_p1: empty truth set");
  return static_cast<double>(intersection_size(truth, estimate)) /
         static_cast<double>(truth.size());
}

double metric_p2(const std::vector<int>& truth, const std::vector<int>& estimate) {
  if (truth.empty()) throw ConfigError("metric_p2: empty truth set");
  const int inter = intersection_size(truth, estimate);
  const int uni = static_cast<int>(truth.size() + estimate.size()) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double rmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  if (truth.size() != pred.size()) throw ConfigError("rmse: length mismatch");
  return std::sqrt((truth - pred).squaredNorm() / truth.size());
}

// ---------------------------------------------------------------------------
// Protocols

std::vector<double> default_pi_ladder() {
  std::vector<double> ladder;
  for (int i = 0; i < 10; ++i) ladder.push_back(0.05 + 0.10 * i);
  return ladder;
}

namespace {

struct ReplicateScores {
  std::vector<double> p1, p2, rmse;
};

void aggregate(const std::vector<ReplicateScores>& rows, EvalReport& report) {
  const int n_pi = static_cast<int>(report.pi_ladder.size());
  const int r = static_cast<int>(rows.size());
  const auto stats = [&](auto getter, std::vector<double>& mean_out,
                         std::vector<double>& sd_out) {
    for (int k = 0; k < n_pi; ++k) {
      double mean = 0.0;
      for (const auto& row : rows) mean += getter(row)[k];
      mean /= r;
      double ss = 0.0;
      for (const auto& row : rows) {
        const double d = getter(row)[k] - mean;
        ss += d * d;
      }
      mean_out.push_back(mean);
      sd_out.push_back(r > 1 ? std::sqrt(ss / (r - 1)) : 0.0);
    }
  };
  stats([](const ReplicateScores& s) -> const std::vector<double>& { return s.p1; },
        report.p1_mean, report.p1_sd);
  stats([](const ReplicateScores& s) -> const std::vector<double>& { return s.p2; },
        report.p2_mean, report.p2_sd);
  stats([](const ReplicateScores& s) -> const std::vector<double>& { return s.rmse; },
        report.rmse_mean, report.rmse_sd);
}

}  // namespace

EvalReport run_protocol(const ProtocolConfig& config) {
  if (config.replicates < 1) throw ConfigError("protocol needs replicates >= 1");
  EvalReport report;
  report.pi_ladder = config.pi_ladder.empty() ? default_pi_ladder() : config.pi_ladder;
  report.replicates = config.replicates;

  const bool is_3d = config.sim.kind == SimSpec::Kind::kField3d;
  std::vector<ReplicateScores> rows(config.replicates);

  parallel_for(config.threads, config.replicates, [&](int rep) {
    const std::uint64_t rep_seed = mix_seed(config.master_seed, static_cast<std::uint64_t>(rep));
    ReplicateScores scores;

    StabilityConfig stab = config.stability;
    stab.master_seed = mix_seed(rep_seed, 5);
    stab.threads = config.replicates > 1 ? 1 : config.threads;

    if (!is_3d) {
      const auto gen = config.sim.kind == SimSpec::Kind::kArma1d ? sim_arma : sim_bspline;
      Dataset1D train = gen(config.sim.n, config.sim.p, mix_seed(rep_seed, 1));
      Dataset1D test = gen(config.test_size, config.sim.p, mix_seed(rep_seed, 2));
      const Eigen::VectorXd beta = beta_1d(config.sim.p);
      const double scale = 1.0 / config.sim.p;
      train.Y = gen_response(train.X, scale, beta, config.sim.snr, mix_seed(rep_seed, 3));
      test.Y = gen_response(test.X, scale, beta, config.sim.snr, mix_seed(rep_seed, 4));
      const std::vector<int> truth = beta_1d_support(config.sim.p);

      center(train);
      const FrequencyMap freq = run_stability(train, stab);
      for (double pi : report.pi_ladder) {
        const auto stable = stable_subdomain(freq, pi).points;
        scores.p1.push_back(metric_p1(truth, stable));
        scores.p2.push_back(metric_p2(truth, stable));
        const PredictiveModel model = build_model(train, freq, pi, config.cluster,
                                                  config.fitter, stab.lambda_grid);
        scores.rmse.push_back(rmse(test.Y, predict(model, test)));
      }
    } else {
      Dataset3D train =
          sim_field3d(config.sim.n, config.sim.dims, config.sim.axis_corr, mix_seed(rep_seed, 1));
      Dataset3D test = sim_field3d(config.test_size, config.sim.dims, config.sim.axis_corr,
                                   mix_seed(rep_seed, 2));
      const Eigen::VectorXd beta = beta_3d_ball(config.sim.dims, config.sim.ball);
      const double scale = 1.0 / config.sim.dims.voxels();
      train.Y = gen_response(train.X, scale, beta, config.sim.snr, mix_seed(rep_seed, 3));
      test.Y = gen_response(test.X, scale, beta, config.sim.snr, mix_seed(rep_seed, 4));
      const std::vector<int> truth = beta_3d_support(config.sim.dims, config.sim.ball);

      center(train);
      const FrequencyMap freq = run_stability(train, stab);
      for (double pi : report.pi_ladder) {
        const auto stable = stable_subdomain(freq, pi).points;
        scores.p1.push_back(metric_p1(truth, stable));
        scores.p2.push_back(metric_p2(truth, stable));
        const PredictiveModel model =
            build_model(train, freq, pi, config.cluster, config.fitter);
        scores.rmse.push_back(rmse(test.Y, predict(model, test)));
      }
    }
    rows[rep] = std::move(scores);
  });

  aggregate(rows, report);
  return report;
}

KfoldResult kfold_predict(const Dataset1D& data, const KfoldConfig& config) {
  if (data.centered) {
    throw ConfigError("kfold_predict expects the raw (uncentered) dataset");
  }
  const int n = data.n();
  const FoldSplit split = FoldSplit::random(n, config.folds, config.seed);
  split.validate(n);

  KfoldResult result;
  result.predictions.resize(n);
  std::vector<int> held_out(n, 0);
  for (int f = 0; f < config.folds; ++f) {
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < n; ++i) {
      (split.assignment[i] == f ? test_rows : train_rows).push_back(i);
    }
    // Leakage guard: no index may sit in both sides, and each sample is
    // held out exactly once across folds.
    for (int i : test_rows) {
      if (std::binary_search(train_rows.begin(), train_rows.end(), i) || held_out[i] != 0) {
        throw NumericError("kfold_predict: fold leakage detected at sample " + std::to_string(i));
      }
      held_out[i] = 1;
    }
    Dataset1D train = data.rows(train_rows);
    center(train);

    StabilityConfig stab = config.stability;
    stab.master_seed = mix_seed(config.seed, static_cast<std::uint64_t>(f) + 1000);
    const FrequencyMap freq = run_stability(train, stab);
    const PredictiveModel model = build_model(train, freq, config.pi, config.cluster,
                                              config.fitter, stab.lambda_grid);

    const Dataset1D test = data.rows(test_rows);
    const Eigen::VectorXd pred = predict(model, test);
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
      result.predictions(test_rows[i]) = pred(static_cast<int>(i));
    }
  }

  for (int i = 0; i < n; ++i) {
    if (held_out[i] != 1) throw NumericError("kfold_predict: sample never held out");
  }

  const double ybar = data.Y.mean();
  const double sse = (data.Y - result.predictions).squaredNorm();
  const double sst = (data.Y.array() - ybar).square().sum();
  result.r2 = 1.0 - sse / sst;
  result.rmse = std::sqrt(sse / n);
  return result;
}

}  // namespace fudos
