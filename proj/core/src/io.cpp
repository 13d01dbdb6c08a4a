#include "fudos/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

namespace fudos::io {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void stamp_json(json& doc, const RunStamp& stamp) {
  if (!stamp.config_hash.empty()) doc["config_hash"] = stamp.config_hash;
  doc["master_seed"] = stamp.seed;
}

std::string stamp_comment(const RunStamp& stamp) {
  std::ostringstream os;
  os << "# fudos";
  if (!stamp.config_hash.empty()) os << " config_hash=" << stamp.config_hash;
  os << " seed=" << stamp.seed << "\n";
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    return v;
  } catch (...) {
    throw IoError("not a number in " + path.string() + ": '" + s + "'");
  }
}

std::vector<std::string> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(line);
  }
  return rows;
}

void write_binary(const std::filesystem::path& path, const void* data, std::size_t bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<char> read_binary(const std::filesystem::path& path, std::size_t expect_bytes) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open: " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != expect_bytes) {
    throw IoError(path.string() + ": expected " + std::to_string(expect_bytes) + " bytes, found " +
                  std::to_string(size));
  }
  std::vector<char> buf(size);
  in.seekg(0);
  in.read(buf.data(), static_cast<std::streamsize>(size));
  if (!in) throw IoError("read failed: " + path.string());
  return buf;
}

}  // namespace

std::string hash_text(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1D datasets

void save_dataset_csv(const std::filesystem::path& x_path, const Dataset1D& data,
                      const RunStamp& stamp) {
  std::ostringstream os;
  os << stamp_comment(stamp);
  for (int j = 0; j < data.p(); ++j) {
    os << (j ? "," : "") << fmt(data.grid.points[j]);
  }
  os << "\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.p(); ++j) os << (j ? "," : "") << fmt(data.X(i, j));
    os << "\n";
  }
  write_text(x_path, os.str());
}

void save_response_csv(const std::filesystem::path& y_path, const Eigen::VectorXd& y,
                       const RunStamp& stamp) {
  std::ostringstream os;
  os << stamp_comment(stamp);
  for (int i = 0; i < y.size(); ++i) os << fmt(y(i)) << "\n";
  write_text(y_path, os.str());
}

Eigen::VectorXd load_response_csv(const std::filesystem::path& y_path) {
  const auto rows = read_csv_rows(y_path);
  Eigen::VectorXd y(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y(static_cast<int>(i)) = parse_double(rows[i], y_path);
  }
  return y;
}

Dataset1D load_predictors_csv(const std::filesystem::path& x_path) {
  const auto rows = read_csv_rows(x_path);
  if (rows.size() < 2) throw IoError(x_path.string() + ": needs a grid row plus samples");
  const auto grid_cells = split_csv_line(rows[0]);
  std::vector<double> grid_points;
  grid_points.reserve(grid_cells.size());
  for (const auto& c : grid_cells) grid_points.push_back(parse_double(c, x_path));

  Dataset1D data;
  data.grid = Grid1D::make(std::move(grid_points));
  const int p = data.grid.size();
  const int n = static_cast<int>(rows.size()) - 1;
  data.X.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const auto cells = split_csv_line(rows[i + 1]);
    if (static_cast<int>(cells.size()) != p) {
      throw IoError(x_path.string() + ": row " + std::to_string(i + 2) + " has " +
                    std::to_string(cells.size()) + " cells, expected " + std::to_string(p));
    }
    for (int j = 0; j < p; ++j) data.X(i, j) = parse_double(cells[j], x_path);
  }
  data.Y = Eigen::VectorXd::Zero(n);
  return data;
}

Dataset1D load_dataset_csv(const std::filesystem::path& x_path,
                           const std::filesystem::path& y_path) {
  Dataset1D data = load_predictors_csv(x_path);
  data.Y = load_response_csv(y_path);
  data.validate();
  return data;
}

// ---------------------------------------------------------------------------
// 3D datasets

void save_dataset_3d(const std::filesystem::path& sidecar_path, const Dataset3D& data,
                     const RunStamp& stamp) {
  const auto dir = sidecar_path.parent_path();
  const auto stem = sidecar_path.stem().string();
  const auto x_path = dir / (stem + ".f64");
  const auto mask_path = dir / (stem + ".mask");
  const auto y_path = dir / (stem + "_y.csv");

  // Row-major sample blocks, voxels in the canonical layout.
  std::vector<double> buf(static_cast<std::size_t>(data.n()) * data.dims.voxels());
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.dims.voxels(); ++j) {
      buf[static_cast<std::size_t>(i) * data.dims.voxels() + j] = data.X(i, j);
    }
  }
  write_binary(x_path, buf.data(), buf.size() * sizeof(double));
  write_binary(mask_path, data.mask.data(), data.mask.size());
  save_response_csv(y_path, data.Y, stamp);

  json doc;
  doc["n"] = data.n();
  doc["H"] = data.dims.H;
  doc["V"] = data.dims.V;
  doc["Z"] = data.dims.Z;
  doc["data_path"] = x_path.filename().string();
  doc["mask_path"] = mask_path.filename().string();
  doc["response_path"] = y_path.filename().string();
  stamp_json(doc, stamp);
  write_text(sidecar_path, doc.dump(2) + "\n");
}

Dataset3D load_dataset_3d(const std::filesystem::path& sidecar_path) {
  const json doc = parse_json(sidecar_path);
  for (const char* key : {"n", "H", "V", "Z", "data_path", "mask_path"}) {
    if (!doc.contains(key)) {
      throw IoError(sidecar_path.string() + ": sidecar missing field '" + key + "'");
    }
  }
  Dataset3D data;
  data.dims = {doc["H"].get<int>(), doc["V"].get<int>(), doc["Z"].get<int>()};
  const int n = doc["n"].get<int>();
  const int voxels = data.dims.voxels();
  if (n <= 0 || voxels <= 0) throw IoError(sidecar_path.string() + ": bad dimensions");

  const auto dir = sidecar_path.parent_path();
  const auto raw = read_binary(dir / doc["data_path"].get<std::string>(),
                               static_cast<std::size_t>(n) * voxels * sizeof(double));
  data.X.resize(n, voxels);
  const double* vals = reinterpret_cast<const double*>(raw.data());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < voxels; ++j) data.X(i, j) = vals[static_cast<std::size_t>(i) * voxels + j];
  }
  const auto mask_raw =
      read_binary(dir / doc["mask_path"].get<std::string>(), static_cast<std::size_t>(voxels));
  data.mask.assign(mask_raw.begin(), mask_raw.end());

  if (doc.contains("response_path")) {
    data.Y = load_response_csv(dir / doc["response_path"].get<std::string>());
  } else {
    data.Y = Eigen::VectorXd::Zero(n);
  }
  data.apply_mask();
  data.validate();
  return data;
}

// ---------------------------------------------------------------------------
// Segmentation artifacts

void save_segmentation(const std::filesystem::path& path, const SegmentationResult& seg,
                       const RunStamp& stamp) {
  json doc;
  doc["rho"] = seg.rho;
  doc["boundaries"] = seg.boundaries;
  doc["L"] = seg.L;
  doc["error_path"] = seg.error_path;
  doc["penalized_path"] = seg.penalized_path;
  doc["warn_short_domain"] = seg.warn_short_domain;
  stamp_json(doc, stamp);
  write_text(path, doc.dump(2) + "\n");
}

SegmentationResult load_segmentation(const std::filesystem::path& path) {
  const json doc = parse_json(path);
  SegmentationResult seg;
  seg.rho = doc.at("rho").get<double>();
  seg.boundaries = doc.at("boundaries").get<std::vector<int>>();
  seg.L = doc.at("L").get<int>();
  seg.error_path = doc.at("error_path").get<std::vector<double>>();
  seg.penalized_path = doc.at("penalized_path").get<std::vector<double>>();
  seg.warn_short_domain = doc.value("warn_short_domain", false);
  return seg;
}

void save_cuboids(const std::filesystem::path& json_path, const std::filesystem::path& map_path,
                  const CuboidSegments& cubes, const Dims3D& dims, const RunStamp& stamp) {
  json doc;
  doc["axis_boundaries"] = {{"H", cubes.axis_boundaries[0]},
                            {"V", cubes.axis_boundaries[1]},
                            {"Z", cubes.axis_boundaries[2]}};
  doc["L"] = cubes.segments.size();
  doc["L_before_pruning"] = cubes.l_before_pruning;
  doc["dims"] = {{"H", dims.H}, {"V", dims.V}, {"Z", dims.Z}};
  doc["segment_map_path"] = map_path.filename().string();
  json ranges = json::array();
  for (const auto& c : cubes.segments) {
    ranges.push_back({{"h", {c.h0, c.h1}}, {"v", {c.v0, c.v1}}, {"z", {c.z0, c.z1}},
                      {"voxels", c.voxels.size()}});
  }
  doc["segments"] = std::move(ranges);
  stamp_json(doc, stamp);
  write_text(json_path, doc.dump(2) + "\n");

  const auto map = cubes.segment_map(dims);
  write_binary(map_path, map.data(), map.size() * sizeof(std::int32_t));
}

// ---------------------------------------------------------------------------
// Selection trace

void save_trace(const std::filesystem::path& path, const SelectionTrace& trace,
                const RunStamp& stamp) {
  json doc;
  json steps = json::array();
  for (const auto& step : trace.steps) {
    json ranked = json::array();
    for (const auto& cand : step.ranked) {
      ranked.push_back({{"subset", cand.subset}, {"cv", cand.cv}});
    }
    steps.push_back({{"ranked", std::move(ranked)}});
  }
  doc["steps"] = std::move(steps);
  doc["cv_star_path"] = trace.cv_star_path;
  doc["selected"] = trace.selected;
  doc["termination_step"] = trace.termination_step;
  switch (trace.reason) {
    case StopReason::kCvRatio: doc["reason"] = "cv_ratio"; break;
    case StopReason::kNoCandidates: doc["reason"] = "no_candidates"; break;
    case StopReason::kStepCap: doc["reason"] = "step_cap"; break;
    case StopReason::kExactFit: doc["reason"] = "exact_fit"; break;
  }
  stamp_json(doc, stamp);
  write_text(path, doc.dump(2) + "\n");
}

SelectionTrace load_trace(const std::filesystem::path& path) {
  const json doc = parse_json(path);
  SelectionTrace trace;
  for (const auto& step : doc.at("steps")) {
    SelectionTrace::Step s;
    for (const auto& cand : step.at("ranked")) {
      s.ranked.push_back({cand.at("subset").get<std::vector<int>>(), cand.at("cv").get<double>()});
    }
    trace.steps.push_back(std::move(s));
  }
  trace.cv_star_path = doc.at("cv_star_path").get<std::vector<double>>();
  trace.selected = doc.at("selected").get<std::vector<int>>();
  trace.termination_step = doc.at("termination_step").get<int>();
  const std::string reason = doc.value("reason", "cv_ratio");
  if (reason == "no_candidates") trace.reason = StopReason::kNoCandidates;
  else if (reason == "step_cap") trace.reason = StopReason::kStepCap;
  else if (reason == "exact_fit") trace.reason = StopReason::kExactFit;
  else trace.reason = StopReason::kCvRatio;
  return trace;
}

// ---------------------------------------------------------------------------
// Frequency maps

namespace {

json pairs_to_json(const std::vector<TuningPair>& grid) {
  json pairs = json::array();
  for (const auto& tp : grid) pairs.push_back({{"rho", tp.rho}, {"c", tp.c}});
  return pairs;
}

std::vector<TuningPair> pairs_from_json(const json& pairs) {
  std::vector<TuningPair> grid;
  for (const auto& p : pairs) {
    grid.push_back({p.at("rho").get<std::vector<double>>(), p.at("c").get<double>()});
  }
  return grid;
}

}  // namespace

void save_frequency_csv(const std::filesystem::path& path, const FrequencyMap& map,
                        const RunStamp& stamp) {
  std::ostringstream os;
  os << stamp_comment(stamp);
  os << "# reps=" << map.reps << " pairs=" << pairs_to_json(map.grid).dump() << "\n";
  os << "point";
  for (std::size_t k = 0; k < map.grid.size(); ++k) os << ",pair_" << k;
  os << ",max\n";
  for (int j = 0; j < map.points(); ++j) {
    os << j;
    for (int k = 0; k < map.counts.rows(); ++k) os << "," << fmt(map.freq(k, j));
    os << "," << fmt(map.max_freq(j)) << "\n";
  }
  write_text(path, os.str());
}

FrequencyMap load_frequency_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  FrequencyMap map;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto reps_pos = line.find("reps=");
      if (reps_pos != std::string::npos) {
        map.reps = std::stoi(line.substr(reps_pos + 5));
        const auto pairs_pos = line.find("pairs=");
        if (pairs_pos != std::string::npos) {
          map.grid = pairs_from_json(json::parse(line.substr(pairs_pos + 6)));
        }
      }
      continue;
    }
    if (line.rfind("point", 0) == 0) continue;  // header
    const auto cells = split_csv_line(line);
    std::vector<double> vals;
    for (const auto& c : cells) vals.push_back(parse_double(c, path));
    rows.push_back(std::move(vals));
  }
  if (rows.empty() || map.reps <= 0 || map.grid.empty()) {
    throw IoError(path.string() + ": not a frequency map CSV");
  }
  const int n_pairs = static_cast<int>(map.grid.size());
  const int points = static_cast<int>(rows.size());
  map.counts.resize(n_pairs, points);
  for (int j = 0; j < points; ++j) {
    if (static_cast<int>(rows[j].size()) != n_pairs + 2) {
      throw IoError(path.string() + ": row width mismatch");
    }
    for (int k = 0; k < n_pairs; ++k) {
      map.counts(k, j) = static_cast<int>(std::lround(rows[j][k + 1] * map.reps));
    }
  }
  map.finalize();
  return map;
}

void save_frequency_3d(const std::filesystem::path& sidecar_path, const FrequencyMap& map,
                       const Dims3D& dims, const RunStamp& stamp) {
  const auto dir = sidecar_path.parent_path();
  const auto bin_path = dir / (sidecar_path.stem().string() + ".f64");
  const int points = map.points();
  const int n_pairs = static_cast<int>(map.grid.size());
  std::vector<double> buf(static_cast<std::size_t>(n_pairs + 1) * points);
  for (int k = 0; k < n_pairs; ++k) {
    for (int j = 0; j < points; ++j) buf[static_cast<std::size_t>(k) * points + j] = map.freq(k, j);
  }
  for (int j = 0; j < points; ++j) {
    buf[static_cast<std::size_t>(n_pairs) * points + j] = map.max_freq(j);
  }
  write_binary(bin_path, buf.data(), buf.size() * sizeof(double));

  json doc;
  doc["reps"] = map.reps;
  doc["pairs"] = pairs_to_json(map.grid);
  doc["dims"] = {{"H", dims.H}, {"V", dims.V}, {"Z", dims.Z}};
  doc["volumes"] = n_pairs + 1;
  doc["data_path"] = bin_path.filename().string();
  stamp_json(doc, stamp);
  write_text(sidecar_path, doc.dump(2) + "\n");
}

FrequencyMap load_frequency_3d(const std::filesystem::path& sidecar_path) {
  const json doc = parse_json(sidecar_path);
  FrequencyMap map;
  map.reps = doc.at("reps").get<int>();
  map.grid = pairs_from_json(doc.at("pairs"));
  const Dims3D dims{doc.at("dims").at("H").get<int>(), doc.at("dims").at("V").get<int>(),
                    doc.at("dims").at("Z").get<int>()};
  const int points = dims.voxels();
  const int n_pairs = static_cast<int>(map.grid.size());
  const auto raw = read_binary(sidecar_path.parent_path() / doc.at("data_path").get<std::string>(),
                               static_cast<std::size_t>(n_pairs + 1) * points * sizeof(double));
  const double* vals = reinterpret_cast<const double*>(raw.data());
  map.counts.resize(n_pairs, points);
  for (int k = 0; k < n_pairs; ++k) {
    for (int j = 0; j < points; ++j) {
      map.counts(k, j) = static_cast<int>(std::lround(vals[static_cast<std::size_t>(k) * points + j] * map.reps));
    }
  }
  map.finalize();
  return map;
}

void save_stable_subdomain(const std::filesystem::path& path, const StableSubdomain& stable,
                           const RunStamp& stamp) {
  json doc;
  doc["pi"] = stable.pi;
  doc["points"] = stable.points;
  stamp_json(doc, stamp);
  write_text(path, doc.dump(2) + "\n");
}

void save_clusters_csv(const std::filesystem::path& path, const std::vector<int>& points,
                       const ClusterAssignment& assignment, const Dims3D* dims,
                       const RunStamp& stamp) {
  std::ostringstream os;
  os << stamp_comment(stamp);
  os << (dims ? "point,h,v,z,cluster\n" : "point,t_index,cluster\n");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (dims) {
      const auto [h, v, z] = dims->unflat(points[i]);
      os << points[i] << "," << h << "," << v << "," << z << "," << assignment.labels[i] << "\n";
    } else {
      os << points[i] << "," << points[i] << "," << assignment.labels[i] << "\n";
    }
  }
  write_text(path, os.str());
}

// ---------------------------------------------------------------------------
// Models

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vec_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<int>(arr.size()));
  for (int i = 0; i < v.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

json segments_to_json(const Segments& segments) {
  json arr = json::array();
  for (const auto& seg : segments) arr.push_back(seg.points);
  return arr;
}

Segments segments_from_json(const json& arr) {
  Segments segments;
  for (const auto& s : arr) segments.push_back({s.get<std::vector<int>>()});
  return segments;
}

}  // namespace

void save_model(const std::filesystem::path& path, const PredictiveModel& model,
                const RunStamp& stamp) {
  json doc;
  doc["pi"] = model.pi;
  doc["fitter"] = model.fitter == Fitter::kPwc ? "pwc" : "pspline";
  doc["intercept_only"] = model.intercept_only;
  doc["stable_points"] = model.stable_points;
  doc["cluster_labels"] = model.clusters.labels;
  doc["segments"] = segments_to_json(model.segments);
  doc["x_center"] = vec_to_json(model.x_center);
  doc["y_center"] = model.y_center;
  doc["is_3d"] = model.is_3d;
  if (model.is_3d) doc["dims"] = {{"H", model.dims.H}, {"V", model.dims.V}, {"Z", model.dims.Z}};
  if (model.fitter == Fitter::kPwc || model.intercept_only) {
    doc["pwc"] = {{"intercept", model.pwc.intercept},
                  {"coefs", vec_to_json(model.pwc.coefs)},
                  {"subset", model.pwc.subset}};
  } else {
    json segs = json::array();
    for (const auto& seg : model.pspline.segments) {
      segs.push_back({{"points", seg.points},
                      {"lo", seg.lo},
                      {"hi", seg.hi},
                      {"n_interior", seg.n_interior},
                      {"coefs", vec_to_json(seg.coefs)},
                      {"constant_fallback", seg.constant_fallback}});
    }
    doc["pspline"] = {{"intercept", model.pspline.intercept},
                      {"segments", std::move(segs)},
                      {"subset", model.pspline.subset},
                      {"lambda", model.pspline.lambda},
                      {"penalty_order", model.pspline.penalty_order}};
  }
  stamp_json(doc, stamp);
  write_text(path, doc.dump(2) + "\n");
}

PredictiveModel load_model(const std::filesystem::path& path) {
  const json doc = parse_json(path);
  PredictiveModel model;
  model.pi = doc.at("pi").get<double>();
  model.fitter = doc.at("fitter").get<std::string>() == "pwc" ? Fitter::kPwc : Fitter::kPspline;
  model.intercept_only = doc.at("intercept_only").get<bool>();
  model.stable_points = doc.at("stable_points").get<std::vector<int>>();
  model.clusters.labels = doc.at("cluster_labels").get<std::vector<int>>();
  model.clusters.k = model.clusters.labels.empty()
                         ? 0
                         : *std::max_element(model.clusters.labels.begin(),
                                             model.clusters.labels.end()) + 1;
  model.segments = segments_from_json(doc.at("segments"));
  model.x_center = vec_from_json(doc.at("x_center"));
  model.y_center = doc.at("y_center").get<double>();
  model.is_3d = doc.value("is_3d", false);
  if (model.is_3d) {
    model.dims = {doc.at("dims").at("H").get<int>(), doc.at("dims").at("V").get<int>(),
                  doc.at("dims").at("Z").get<int>()};
  }
  if (doc.contains("pwc")) {
    model.pwc.intercept = doc["pwc"].at("intercept").get<double>();
    model.pwc.coefs = vec_from_json(doc["pwc"].at("coefs"));
    model.pwc.subset = doc["pwc"].at("subset").get<std::vector<int>>();
    model.pwc.x_center = model.x_center;
    model.pwc.y_center = model.y_center;
  }
  if (doc.contains("pspline")) {
    model.pspline.intercept = doc["pspline"].at("intercept").get<double>();
    for (const auto& s : doc["pspline"].at("segments")) {
      PsplineModel::SegmentFit fit;
      fit.points = s.at("points").get<std::vector<int>>();
      fit.lo = s.at("lo").get<double>();
      fit.hi = s.at("hi").get<double>();
      fit.n_interior = s.at("n_interior").get<int>();
      fit.coefs = vec_from_json(s.at("coefs"));
      fit.constant_fallback = s.at("constant_fallback").get<bool>();
      model.pspline.segments.push_back(std::move(fit));
    }
    model.pspline.subset = doc["pspline"].at("subset").get<std::vector<int>>();
    model.pspline.lambda = doc["pspline"].at("lambda").get<double>();
    model.pspline.penalty_order = doc["pspline"].at("penalty_order").get<int>();
    model.pspline.x_center = model.x_center;
    model.pspline.y_center = model.y_center;
  }
  return model;
}

void save_predictions_csv(const std::filesystem::path& path, const Eigen::VectorXd& pred,
                          const RunStamp& stamp) {
  std::ostringstream os;
  os << stamp_comment(stamp);
  os << "prediction\n";
  for (int i = 0; i < pred.size(); ++i) os << fmt(pred(i)) << "\n";
  write_text(path, os.str());
}

void save_report(const std::filesystem::path& csv_path, const std::filesystem::path& json_path,
                 const EvalReport& report, const RunStamp& stamp) {
  std::ostringstream os;
  os << stamp_comment(stamp);
  os << "metric";
  for (double pi : report.pi_ladder) os << ",pi_" << fmt(pi);
  os << "\n";
  const auto row = [&](const char* name, const std::vector<double>& vals) {
    os << name;
    for (double v : vals) os << "," << fmt(v);
    os << "\n";
  };
  row("rmse_mean", report.rmse_mean);
  row("rmse_sd", report.rmse_sd);
  row("p1_mean", report.p1_mean);
  row("p1_sd", report.p1_sd);
  row("p2_mean", report.p2_mean);
  row("p2_sd", report.p2_sd);
  write_text(csv_path, os.str());

  json doc;
  doc["pi_ladder"] = report.pi_ladder;
  doc["replicates"] = report.replicates;
  doc["rmse_mean"] = report.rmse_mean;
  doc["rmse_sd"] = report.rmse_sd;
  doc["p1_mean"] = report.p1_mean;
  doc["p1_sd"] = report.p1_sd;
  doc["p2_mean"] = report.p2_mean;
  doc["p2_sd"] = report.p2_sd;
  stamp_json(doc, stamp);
  write_text(json_path, doc.dump(2) + "\n");
}

}  // namespace fudos::io
