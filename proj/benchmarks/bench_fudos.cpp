#include <benchmark/benchmark.h>

#include "fudos/clustering.hpp"
#include "fudos/correlation.hpp"
#include "fudos/pipeline.hpp"
#include "fudos/segmentation.hpp"
#include "fudos/selection.hpp"

namespace {

using namespace fudos;

Dataset1D arma_data(int n, int p) {
  Dataset1D data = sim_arma(n, p, 42);
  data.Y = gen_response(data.X, 1.0 / p, beta_1d(p), 20.0, 43);
  center(data);
  return data;
}

void BM_AbsCorrelation(benchmark::State& state) {
  const Dataset1D data = arma_data(static_cast<int>(state.range(0)), 128);
  for (auto _ : state) {
    benchmark::DoNotOptimize(abs_correlation(data));
  }
}
BENCHMARK(BM_AbsCorrelation)->Arg(100)->Arg(400);

void BM_IntegralTableQueries(benchmark::State& state) {
  const Dataset1D data = arma_data(200, 256);
  const IntegralTable table(abs_correlation(data));
  int a = 0;
  for (auto _ : state) {
    double acc = 0.0;
    for (int j = 0; j < 1000; ++j) {
      const int lo = (a + j * 7) % 200;
      acc += table.block(lo, lo + 31);
    }
    benchmark::DoNotOptimize(acc);
    ++a;
  }
}
BENCHMARK(BM_IntegralTableQueries);

void BM_Segment1D(benchmark::State& state) {
  const Dataset1D data = arma_data(200, static_cast<int>(state.range(0)));
  const CorrMatrix corr = abs_correlation(data);
  SegmentationParams params;
  params.rho = 0.04;
  for (auto _ : state) {
    benchmark::DoNotOptimize(segment_1d(corr, params));
  }
}
BENCHMARK(BM_Segment1D)->Arg(128)->Arg(256);

void BM_SelectSubsetPwc(benchmark::State& state) {
  const Dataset1D data = arma_data(200, 128);
  const CorrMatrix corr = abs_correlation(data);
  SegmentationParams params;
  params.rho = 0.04;
  const Segments segments = to_segments(segment_1d(corr, params), data.p());
  SelectionConfig cfg = SelectionConfig::defaults_1d(data.p());
  cfg.fitter = Fitter::kPwc;
  cfg.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_subset(data, segments, cfg));
  }
}
BENCHMARK(BM_SelectSubsetPwc);

void BM_SelectSubsetPspline(benchmark::State& state) {
  const Dataset1D data = arma_data(200, 128);
  const CorrMatrix corr = abs_correlation(data);
  SegmentationParams params;
  params.rho = 0.04;
  const Segments segments = to_segments(segment_1d(corr, params), data.p());
  SelectionConfig cfg = SelectionConfig::defaults_1d(data.p());
  cfg.seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_subset(data, segments, cfg));
  }
}
BENCHMARK(BM_SelectSubsetPspline);

void BM_DensityCluster(benchmark::State& state) {
  std::vector<std::array<double, 3>> pts;
  const int side = static_cast<int>(state.range(0));
  for (int z = 0; z < 4; ++z) {
    for (int v = 0; v < side; ++v) {
      for (int h = 0; h < side; ++h) {
        if ((h + v + z) % 3 == 0) {
          pts.push_back({static_cast<double>(h), static_cast<double>(v),
                         static_cast<double>(z)});
        }
      }
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(density_cluster(pts, 2.0, 3));
  }
}
BENCHMARK(BM_DensityCluster)->Arg(20)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
