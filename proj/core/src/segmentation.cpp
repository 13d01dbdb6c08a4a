#include "fudos/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fudos {

namespace {

/// Contribution of one segment [a,b) to the weighted block sum:
/// (1/w) * I(block) with w = 100 * length fraction.
double block_term(const IntegralTable& table, int a, int b, int p) {
  const double frac = static_cast<double>(b - a) / p;
  return table.block(a, b - 1) / (100.0 * frac);
}

}  // namespace

std::vector<std::pair<int, int>> SegmentationResult::segment_ranges(int p) const {
  std::vector<std::pair<int, int>> out;
  int start = 0;
  for (int b : boundaries) {
    out.emplace_back(start, b);
    start = b;
  }
  out.emplace_back(start, p);
  return out;
}

namespace {

/// The approximation gap relative to the total correlation mass, squared,
/// with one further 1/I(0,1) factor. The relative form makes the loss scale
/// free across correlation shapes (it reduces to the plain squared gap when
/// I(0,1) = 1) and the extra factor calibrates the rho <-> segment-count
/// map to the reference tuning grids; without it every documented rho
/// produces a single segment on realistic data.
double loss_from_term(double full, double term) {
  if (!(full > 0.0)) throw NumericError("segmentation: zero total correlation mass");
  const double gap = (full - term) / full;
  return gap * gap / full;
}

}  // namespace

double seg_loss(const IntegralTable& table, const std::vector<int>& boundaries) {
  const int p = table.size();
  int prev = 0;
  double term = 0.0;
  for (std::size_t k = 0; k <= boundaries.size(); ++k) {
    const int end = (k < boundaries.size()) ? boundaries[k] : p;
    if (end <= prev || end > p) {
      throw ConfigError("boundary " + std::to_string(end) + " outside grid or out of order");
    }
    term += block_term(table, prev, end, p);
    prev = end;
  }
  return loss_from_term(table.full(), term);
}

SegmentationResult segment_1d(const CorrMatrix& corr, const SegmentationParams& params) {
  if (params.rho < 0.0) throw ConfigError("segmentation rho must be >= 0");
  if (params.min_seg < 2) throw ConfigError("min_seg must be >= 2");
  const int p = corr.size();
  const int max_l = params.max_l > 0 ? params.max_l : std::max(1, p / params.min_seg);

  SegmentationResult res;
  res.rho = params.rho;

  const IntegralTable table(corr);
  const double full = table.full();

  if (p < 2 * params.min_seg) {
    res.warn_short_domain = true;
    const double u0 = seg_loss(table, {});
    res.error_path.push_back(u0);
    res.penalized_path.push_back(u0 + params.rho);
    return res;
  }

  // Cut positions currently active, plus the two virtual ends.
  std::vector<int> cuts = {0, p};
  double term = block_term(table, 0, p, p);
  double u_prev = loss_from_term(full, term);
  double pen_prev = u_prev + params.rho * 1.0;
  res.error_path.push_back(u_prev);
  res.penalized_path.push_back(pen_prev);

  while (static_cast<int>(cuts.size()) - 1 < max_l) {
    // Scan every feasible new cut; inserting c into segment [a,b) replaces
    // that segment's term, the rest of the sum is unchanged.
    double best_loss = std::numeric_limits<double>::infinity();
    int best_cut = -1;
    double best_term = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const int a = cuts[s], b = cuts[s + 1];
      if (b - a < 2 * params.min_seg) continue;
      const double base = term - block_term(table, a, b, p);
      for (int c = a + params.min_seg; c <= b - params.min_seg; ++c) {
        const double t = base + block_term(table, a, c, p) + block_term(table, c, b, p);
        const double loss = loss_from_term(full, t);
        if (loss < best_loss) {  // ties keep the smallest index
          best_loss = loss;
          best_cut = c;
          best_term = t;
        }
      }
    }
    if (best_cut < 0) break;  // no feasible split remains

    const int L_next = static_cast<int>(cuts.size());  // segments after insertion
    const double pen_next = best_loss + params.rho * (L_next + 0.0);
    res.error_path.push_back(best_loss);
    res.penalized_path.push_back(pen_next);
    if (pen_next >= pen_prev) break;  // path begins to rise: keep previous step

    cuts.insert(std::upper_bound(cuts.begin(), cuts.end(), best_cut), best_cut);
    term = best_term;
    u_prev = best_loss;
    pen_prev = pen_next;
  }

  res.boundaries.assign(cuts.begin() + 1, cuts.end() - 1);
  res.L = static_cast<int>(res.boundaries.size()) + 1;
  return res;
}

Segments to_segments(const SegmentationResult& seg, int p) {
  Segments out;
  for (const auto& [a, b] : seg.segment_ranges(p)) {
    SegmentInfo info;
    info.points.resize(b - a);
    for (int j = a; j < b; ++j) info.points[j - a] = j;
    out.push_back(std::move(info));
  }
  return out;
}

std::vector<std::int32_t> CuboidSegments::segment_map(const Dims3D& dims) const {
  std::vector<std::int32_t> map(dims.voxels(), -1);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    for (int v : segments[s].voxels) map[v] = static_cast<std::int32_t>(s);
  }
  return map;
}

CuboidSegments segment_3d(const std::array<CorrMatrix, 3>& marginals,
                          const Segmentation3DParams& params, const Dims3D& dims,
                          const std::vector<std::uint8_t>& mask) {
  CuboidSegments out;
  for (int axis = 0; axis < 3; ++axis) {
    SegmentationParams ap;
    ap.rho = params.rho[axis];
    ap.min_seg = params.min_seg[axis];
    ap.max_l = params.max_l[axis];
    out.axis_results[axis] = segment_1d(marginals[axis], ap);
    out.axis_boundaries[axis] = out.axis_results[axis].boundaries;
  }

  const auto hr = out.axis_results[0].segment_ranges(dims.H);
  const auto vr = out.axis_results[1].segment_ranges(dims.V);
  const auto zr = out.axis_results[2].segment_ranges(dims.Z);
  out.l_before_pruning = static_cast<int>(hr.size() * vr.size() * zr.size());

  for (const auto& [z0, z1] : zr) {
    for (const auto& [v0, v1] : vr) {
      for (const auto& [h0, h1] : hr) {
        CuboidSegments::Cuboid c{h0, h1, v0, v1, z0, z1, {}};
        for (int z = z0; z < z1; ++z) {
          for (int v = v0; v < v1; ++v) {
            for (int h = h0; h < h1; ++h) {
              const int idx = dims.flat(h, v, z);
              if (mask[idx]) c.voxels.push_back(idx);
            }
          }
        }
        if (!c.voxels.empty()) out.segments.push_back(std::move(c));
      }
    }
  }
  if (out.segments.empty()) throw NumericError("all cuboid segments empty after masking");
  return out;
}

Segments to_segments(const CuboidSegments& cubes) {
  Segments out;
  out.reserve(cubes.segments.size());
  for (const auto& c : cubes.segments) {
    SegmentInfo info;
    info.points = c.voxels;
    std::sort(info.points.begin(), info.points.end());
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace fudos
