#include "fudos/stability.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <string>

#include "fudos/correlation.hpp"
#include "fudos/parallel.hpp"
#include "fudos/rng.hpp"
#include "fudos/segmentation.hpp"

namespace fudos {

std::vector<TuningPair> StabilityConfig::default_grid_1d_smooth() {
  std::vector<TuningPair> grid;
  for (double rho : {0.02, 0.035, 0.04, 0.05, 0.06}) grid.push_back({{rho}, 0.01});
  return grid;
}

std::vector<TuningPair> StabilityConfig::default_grid_1d_rough() {
  std::vector<TuningPair> grid;
  for (double rho : {0.0, 0.03, 0.04, 0.06, 0.08}) grid.push_back({{rho}, 0.01});
  return grid;
}

std::vector<TuningPair> StabilityConfig::default_grid_3d() {
  std::vector<TuningPair> grid;
  for (double rh : {0.01, 0.03}) {
    for (double rv : {0.01, 0.03}) {
      for (double rz : {0.01, 0.03}) grid.push_back({{rh, rv, rz}, 0.01});
    }
  }
  return grid;
}

void FrequencyMap::finalize() {
  freq = counts.cast<double>() / static_cast<double>(reps);
  max_freq = freq.colwise().maxCoeff();
}

FrequencyMap run_stability_custom(int n, int points, const StabilityConfig& config,
                                  const SubdomainSelector& selector) {
  if (n < 4) throw ConfigError("stability needs n >= 4");
  if (config.reps < 1) throw ConfigError("stability needs reps >= 1");
  if (config.grid.empty()) throw ConfigError("stability tuning grid B is empty");

  FrequencyMap map;
  map.grid = config.grid;
  map.reps = config.reps;
  map.counts = Eigen::MatrixXi::Zero(static_cast<int>(config.grid.size()), points);

  const int k = (n + 1) / 2;  // ceil(n/2)
  std::mutex merge_mutex;

  parallel_for(config.threads, config.reps, [&](int rep) {
    const std::uint64_t rep_seed = mix_seed(config.master_seed, static_cast<std::uint64_t>(rep));
    Rng rng(mix_seed(rep_seed, 0));
    const std::vector<int> rows = rng.sample_without_replacement(n, k);
    const auto selected = selector(rows, rep_seed);
    if (selected.size() != config.grid.size()) {
      throw NumericError("stability selector returned a result per-pair count mismatch");
    }
    // Integer adds commute, so merge order cannot change the counts.
    std::lock_guard<std::mutex> lock(merge_mutex);
    for (std::size_t pair = 0; pair < selected.size(); ++pair) {
      for (int pt : selected[pair]) {
        map.counts(static_cast<int>(pair), pt) += 1;
      }
    }
  });

  map.finalize();
  return map;
}

namespace {

/// Seed salt from the pair's values, so frequencies do not depend on where
/// a pair sits in B.
std::uint64_t pair_salt(const TuningPair& pair) {
  std::uint64_t h = 0x51ab7e1d2f3c9b47ULL;
  for (double r : pair.rho) {
    std::uint64_t bits;
    std::memcpy(&bits, &r, sizeof(bits));
    h = mix_seed(h, bits);
  }
  std::uint64_t cbits;
  std::memcpy(&cbits, &pair.c, sizeof(cbits));
  return mix_seed(h, cbits);
}

SelectionConfig make_selection_config(const StabilityConfig& config, const TuningPair& pair,
                                      int default_q, std::uint64_t fold_seed) {
  SelectionConfig sel;
  sel.c = pair.c;
  sel.q = config.q > 0 ? config.q : std::max(1, default_q);
  sel.folds = config.folds;
  sel.fitter = config.fitter;
  sel.seed = fold_seed;
  sel.lambda_grid = config.lambda_grid;
  return sel;
}

}  // namespace

FrequencyMap run_stability(const Dataset1D& data, const StabilityConfig& config) {
  if (!data.centered) throw ConfigError("run_stability needs a centered dataset");
  const int p = data.p();

  SubdomainSelector selector = [&](const std::vector<int>& rows, std::uint64_t rep_seed) {
    Dataset1D sub = data.rows(rows);
    sub.centered = false;  // re-center on the subsample's own means
    center(sub);
    const CorrMatrix corr = abs_correlation(sub);

    std::vector<std::vector<int>> out;
    out.reserve(config.grid.size());
    for (std::size_t pair = 0; pair < config.grid.size(); ++pair) {
      const TuningPair& tp = config.grid[pair];
      if (tp.rho.size() != 1) throw ConfigError("1D stability needs scalar rho per pair");
      SegmentationParams sp;
      sp.rho = tp.rho[0];
      sp.min_seg = config.min_seg;
      sp.max_l = config.max_l;
      const SegmentationResult seg = segment_1d(corr, sp);
      const Segments segments = to_segments(seg, p);

      const auto sel_cfg =
          make_selection_config(config, tp, p / 2, mix_seed(rep_seed, pair_salt(tp)));
      const SelectionTrace trace = select_subset(sub, segments, sel_cfg);

      std::vector<int> pts;
      for (int s : trace.selected) {
        pts.insert(pts.end(), segments[s].points.begin(), segments[s].points.end());
      }
      out.push_back(std::move(pts));
    }
    return out;
  };

  return run_stability_custom(data.n(), p, config, selector);
}

FrequencyMap run_stability(const Dataset3D& data, const StabilityConfig& config) {
  if (!data.centered) throw ConfigError("run_stability needs a centered dataset");
  const int points = data.dims.voxels();

  SubdomainSelector selector = [&](const std::vector<int>& rows, std::uint64_t rep_seed) {
    Dataset3D sub = data.rows(rows);
    sub.centered = false;
    center(sub);
    const auto marginals = marginal_covariances(sub);

    std::vector<std::vector<int>> out;
    out.reserve(config.grid.size());
    for (std::size_t pair = 0; pair < config.grid.size(); ++pair) {
      const TuningPair& tp = config.grid[pair];
      if (tp.rho.size() != 3) throw ConfigError("3D stability needs a rho triple per pair");
      Segmentation3DParams sp;
      sp.rho = {tp.rho[0], tp.rho[1], tp.rho[2]};
      sp.min_seg = config.min_seg_3d;
      const CuboidSegments cubes = segment_3d(marginals, sp, sub.dims, sub.mask);
      const Segments segments = to_segments(cubes);

      const auto sel_cfg = make_selection_config(config, tp,
                                                 static_cast<int>(segments.size()) / 2,
                                                 mix_seed(rep_seed, pair_salt(tp)));
      const SelectionTrace trace = select_subset(sub, segments, sel_cfg);

      std::vector<int> pts;
      for (int s : trace.selected) {
        pts.insert(pts.end(), segments[s].points.begin(), segments[s].points.end());
      }
      out.push_back(std::move(pts));
    }
    return out;
  };

  return run_stability_custom(data.n(), points, config, selector);
}

StableSubdomain stable_subdomain(const FrequencyMap& map, double pi) {
  if (!(pi >= 0.0) || pi >= 1.0) {
    throw ConfigError("stable subdomain cutoff pi must lie in [0,1), got " + std::to_string(pi));
  }
  StableSubdomain out;
  out.pi = pi;
  for (int j = 0; j < map.points(); ++j) {
    if (map.max_freq(j) > pi) out.points.push_back(j);
  }
  return out;
}

}  // namespace fudos
