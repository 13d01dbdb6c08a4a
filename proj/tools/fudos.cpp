// Command-line front end: dataset simulation, segmentation, subset
// selection, stability selection, predictive modelling and evaluation, all
// driven by a JSON config with flag overrides. Every run writes a manifest
// with the resolved config, its hash and the seed so artifacts reproduce.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "fudos/common.hpp"
#include "fudos/correlation.hpp"
#include "fudos/io.hpp"
#include "fudos/rng.hpp"
#include "fudos/pipeline.hpp"
#include "fudos/segmentation.hpp"
#include "fudos/selection.hpp"
#include "fudos/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fudos;

namespace {

struct CliOptions {
  std::string subcommand;
  fs::path config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  fs::path out_dir = ".";
};

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
}

template <typename T>
T require(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("config field '" + key + "' is required");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

template <typename T>
T value_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + key + "' has the wrong type");
  }
}

Fitter parse_fitter(const std::string& name) {
  if (name == "pwc") return Fitter::kPwc;
  if (name == "pspline") return Fitter::kPspline;
  throw ConfigError("config field 'fitter' must be \"pwc\" or \"pspline\", got \"" + name + "\"");
}

std::vector<TuningPair> parse_grid(const json& cfg) {
  if (!cfg.contains("grid")) throw ConfigError("config field 'grid' is required");
  std::vector<TuningPair> grid;
  for (const auto& item : cfg.at("grid")) {
    TuningPair tp;
    if (item.at("rho").is_array()) {
      tp.rho = item.at("rho").get<std::vector<double>>();
    } else {
      tp.rho = {item.at("rho").get<double>()};
    }
    tp.c = item.value("c", 0.01);
    grid.push_back(std::move(tp));
  }
  if (grid.empty()) throw ConfigError("config field 'grid' must not be empty");
  return grid;
}

bool is_3d_config(const json& cfg) { return cfg.contains("data3d"); }

Dataset1D load_1d(const json& cfg, const fs::path& base) {
  const fs::path x = base / require<std::string>(cfg, "x");
  const fs::path y = base / require<std::string>(cfg, "y");
  return io::load_dataset_csv(x, y);
}

Dataset3D load_3d(const json& cfg, const fs::path& base) {
  return io::load_dataset_3d(base / require<std::string>(cfg, "data3d"));
}

StabilityConfig parse_stability(const json& cfg, std::uint64_t seed, int threads) {
  StabilityConfig stab;
  stab.grid = parse_grid(cfg);
  stab.reps = value_or(cfg, "reps", 100);
  stab.master_seed = seed;
  stab.folds = value_or(cfg, "folds", 5);
  stab.fitter = parse_fitter(value_or<std::string>(cfg, "fitter", "pwc"));
  stab.q = value_or(cfg, "q", 0);
  stab.min_seg = value_or(cfg, "min_seg", 5);
  if (cfg.contains("min_seg_3d")) {
    const auto v = cfg.at("min_seg_3d").get<std::vector<int>>();
    if (v.size() != 3) throw ConfigError("config field 'min_seg_3d' needs 3 entries");
    stab.min_seg_3d = {v[0], v[1], v[2]};
  }
  stab.max_l = value_or(cfg, "max_l", 0);
  if (cfg.contains("lambda_grid")) {
    stab.lambda_grid = cfg.at("lambda_grid").get<std::vector<double>>();
  }
  stab.threads = threads;
  return stab;
}

struct RunContext {
  json config;
  io::RunStamp stamp;
  std::uint64_t seed = 0;
  int threads = 0;
  fs::path out;
  std::vector<std::string> outputs;

  fs::path path(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }
};

// --- subcommands -----------------------------------------------------------

void cmd_simulate(RunContext& ctx) {
  const json& cfg = ctx.config;
  const std::string kind = require<std::string>(cfg, "kind");
  const int n = require<int>(cfg, "n");
  const double snr = value_or(cfg, "snr", 20.0);

  if (kind == "arma1d" || kind == "bspline1d") {
    const int p = value_or(cfg, "p", 128);
    Dataset1D data = kind == "arma1d" ? sim_arma(n, p, ctx.seed)
                                      : sim_bspline(n, p, ctx.seed);
    const std::string beta_kind = value_or<std::string>(cfg, "beta", "case1d");
    if (beta_kind == "case1d") {
      data.Y = gen_response(data.X, 1.0 / p, beta_1d(p), snr, mix_seed(ctx.seed, 1));
    } else if (beta_kind != "none") {
      throw ConfigError("config field 'beta' must be \"case1d\" or \"none\" for 1D kinds");
    }
    io::save_dataset_csv(ctx.path("x.csv"), data, ctx.stamp);
    io::save_response_csv(ctx.path("y.csv"), data.Y, ctx.stamp);
    return;
  }
  if (kind == "field3d") {
    if (!cfg.contains("dims")) throw ConfigError("config field 'dims' is required for field3d");
    const auto dims_v = cfg.at("dims").get<std::vector<int>>();
    if (dims_v.size() != 3) throw ConfigError("config field 'dims' needs [H,V,Z]");
    const Dims3D dims{dims_v[0], dims_v[1], dims_v[2]};
    std::array<double, 3> corr{0.9, 0.9, 0.9};
    if (cfg.contains("axis_corr")) {
      const auto v = cfg.at("axis_corr").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("config field 'axis_corr' needs 3 entries");
      corr = {v[0], v[1], v[2]};
    }
    Dataset3D data = sim_field3d(n, dims, corr, ctx.seed);
    const std::string beta_kind = value_or<std::string>(cfg, "beta", "ball");
    if (beta_kind == "ball") {
      BallSpec ball;
      ball.height = value_or(cfg, "ball_height", 10.0);
      data.Y = gen_response(data.X, 1.0 / dims.voxels(), beta_3d_ball(dims, ball), snr,
                            mix_seed(ctx.seed, 1));
    } else if (beta_kind != "none") {
      throw ConfigError("config field 'beta' must be \"ball\" or \"none\" for field3d");
    }
    io::save_dataset_3d(ctx.path("data3d.json"), data, ctx.stamp);
    return;
  }
  throw ConfigError("config field 'kind' must be arma1d, bspline1d or field3d, got \"" + kind +
                    "\"");
}

void cmd_segment(RunContext& ctx) {
  const json& cfg = ctx.config;
  if (!is_3d_config(cfg)) {
    Dataset1D data = load_1d(cfg, ctx.out);
    center(data);
    SegmentationParams params;
    params.rho = require<double>(cfg, "rho");
    params.min_seg = value_or(cfg, "min_seg", 5);
    params.max_l = value_or(cfg, "max_l", 0);
    const SegmentationResult seg = segment_1d(abs_correlation(data), params);
    io::save_segmentation(ctx.path("segmentation.json"), seg, ctx.stamp);
    return;
  }
  Dataset3D data = load_3d(cfg, ctx.out);
  center(data);
  Segmentation3DParams params;
  const auto rho = cfg.at("rho").get<std::vector<double>>();
  if (rho.size() != 3) throw ConfigError("config field 'rho' needs 3 entries for 3D");
  params.rho = {rho[0], rho[1], rho[2]};
  if (cfg.contains("min_seg")) {
    const auto v = cfg.at("min_seg").get<std::vector<int>>();
    if (v.size() != 3) throw ConfigError("config field 'min_seg' needs 3 entries for 3D");
    params.min_seg = {v[0], v[1], v[2]};
  }
  const CuboidSegments cubes = segment_3d(marginal_covariances(data), params, data.dims,
                                          data.mask);
  io::save_cuboids(ctx.path("cuboids.json"), ctx.path("segment_map.i32"), cubes, data.dims,
                   ctx.stamp);
}

void cmd_select(RunContext& ctx) {
  const json& cfg = ctx.config;
  SelectionConfig sel;
  sel.c = value_or(cfg, "c", 0.01);
  sel.folds = value_or(cfg, "folds", 5);
  sel.seed = ctx.seed;
  if (cfg.contains("lambda_grid")) {
    sel.lambda_grid = cfg.at("lambda_grid").get<std::vector<double>>();
  }

  if (!is_3d_config(cfg)) {
    Dataset1D data = load_1d(cfg, ctx.out);
    center(data);
    SegmentationParams params;
    params.rho = require<double>(cfg, "rho");
    params.min_seg = value_or(cfg, "min_seg", 5);
    params.max_l = value_or(cfg, "max_l", 0);
    const SegmentationResult seg = segment_1d(abs_correlation(data), params);
    const Segments segments = to_segments(seg, data.p());
    sel.fitter = parse_fitter(value_or<std::string>(cfg, "fitter", "pspline"));
    sel.q = value_or(cfg, "q", std::max(1, data.p() / 2));
    const SelectionTrace trace = select_subset(data, segments, sel);
    io::save_segmentation(ctx.path("segmentation.json"), seg, ctx.stamp);
    io::save_trace(ctx.path("trace.json"), trace, ctx.stamp);
    return;
  }
  Dataset3D data = load_3d(cfg, ctx.out);
  center(data);
  Segmentation3DParams params;
  const auto rho = cfg.at("rho").get<std::vector<double>>();
  if (rho.size() != 3) throw ConfigError("config field 'rho' needs 3 entries for 3D");
  params.rho = {rho[0], rho[1], rho[2]};
  const CuboidSegments cubes = segment_3d(marginal_covariances(data), params, data.dims,
                                          data.mask);
  const Segments segments = to_segments(cubes);
  sel.fitter = parse_fitter(value_or<std::string>(cfg, "fitter", "pwc"));
  sel.q = value_or(cfg, "q", std::max(1, static_cast<int>(segments.size()) / 2));
  const SelectionTrace trace = select_subset(data, segments, sel);
  io::save_cuboids(ctx.path("cuboids.json"), ctx.path("segment_map.i32"), cubes, data.dims,
                   ctx.stamp);
  io::save_trace(ctx.path("trace.json"), trace, ctx.stamp);
}

void cmd_stability(RunContext& ctx) {
  const json& cfg = ctx.config;
  const StabilityConfig stab = parse_stability(cfg, ctx.seed, ctx.threads);
  if (!is_3d_config(cfg)) {
    Dataset1D data = load_1d(cfg, ctx.out);
    center(data);
    const FrequencyMap map = run_stability(data, stab);
    io::save_frequency_csv(ctx.path("frequency.csv"), map, ctx.stamp);
    return;
  }
  Dataset3D data = load_3d(cfg, ctx.out);
  center(data);
  const FrequencyMap map = run_stability(data, stab);
  io::save_frequency_3d(ctx.path("frequency.json"), map, data.dims, ctx.stamp);
}

void cmd_model(RunContext& ctx) {
  const json& cfg = ctx.config;
  const double pi = require<double>(cfg, "pi");
  if (!(pi >= 0.0) || pi >= 1.0) {
    throw ConfigError("config field 'pi' must lie in [0,1), got " + std::to_string(pi));
  }
  ClusterParams cluster;
  const Fitter fitter = parse_fitter(value_or<std::string>(cfg, "fitter",
                                                           is_3d_config(cfg) ? "pwc" : "pspline"));
  std::vector<double> lambda_grid;
  if (cfg.contains("lambda_grid")) lambda_grid = cfg.at("lambda_grid").get<std::vector<double>>();

  if (!is_3d_config(cfg)) {
    cluster = ClusterParams::defaults_1d();
    cluster.eps = value_or(cfg, "eps", cluster.eps);
    cluster.min_pts = value_or(cfg, "min_pts", cluster.min_pts);
    Dataset1D data = load_1d(cfg, ctx.out);
    center(data);
    const FrequencyMap map =
        io::load_frequency_csv(ctx.out / require<std::string>(cfg, "frequency"));
    const PredictiveModel model = build_model(data, map, pi, cluster, fitter, lambda_grid);
    io::save_model(ctx.path("model.json"), model, ctx.stamp);
    io::save_clusters_csv(ctx.path("clusters.csv"), model.stable_points, model.clusters, nullptr,
                          ctx.stamp);
    return;
  }
  cluster = ClusterParams::defaults_3d();
  cluster.eps = value_or(cfg, "eps", cluster.eps);
  cluster.min_pts = value_or(cfg, "min_pts", cluster.min_pts);
  Dataset3D data = load_3d(cfg, ctx.out);
  center(data);
  const FrequencyMap map =
      io::load_frequency_3d(ctx.out / require<std::string>(cfg, "frequency"));
  const PredictiveModel model = build_model(data, map, pi, cluster, fitter);
  io::save_model(ctx.path("model.json"), model, ctx.stamp);
  io::save_clusters_csv(ctx.path("clusters.csv"), model.stable_points, model.clusters,
                        &model.dims, ctx.stamp);
}

void cmd_predict(RunContext& ctx) {
  const json& cfg = ctx.config;
  const PredictiveModel model = io::load_model(ctx.out / require<std::string>(cfg, "model"));
  Eigen::VectorXd pred;
  if (!is_3d_config(cfg)) {
    const fs::path x = ctx.out / require<std::string>(cfg, "x");
    const Dataset1D data = cfg.contains("y")
                               ? io::load_dataset_csv(x, ctx.out / cfg.at("y").get<std::string>())
                               : io::load_predictors_csv(x);
    pred = predict(model, data);
  } else {
    const Dataset3D data = load_3d(cfg, ctx.out);
    pred = predict(model, data);
  }
  io::save_predictions_csv(ctx.path("predictions.csv"), pred, ctx.stamp);
}

void cmd_evaluate(RunContext& ctx) {
  const json& cfg = ctx.config;
  const std::string mode = value_or<std::string>(cfg, "mode", "protocol");

  if (mode == "kfold") {
    KfoldConfig kf;
    kf.folds = value_or(cfg, "folds", 10);
    kf.pi = require<double>(cfg, "pi");
    if (!(kf.pi >= 0.0) || kf.pi >= 1.0) {
      throw ConfigError("config field 'pi' must lie in [0,1), got " + std::to_string(kf.pi));
    }
    kf.stability = parse_stability(cfg.at("stability"), ctx.seed, ctx.threads);
    kf.cluster = ClusterParams::defaults_1d();
    kf.cluster.eps = value_or(cfg, "eps", kf.cluster.eps);
    kf.cluster.min_pts = value_or(cfg, "min_pts", kf.cluster.min_pts);
    kf.fitter = parse_fitter(value_or<std::string>(cfg, "fitter", "pspline"));
    kf.seed = ctx.seed;
    const Dataset1D data = load_1d(cfg, ctx.out);
    const KfoldResult result = kfold_predict(data, kf);
    json doc;
    doc["r2"] = result.r2;
    doc["rmse"] = result.rmse;
    doc["folds"] = kf.folds;
    doc["pi"] = kf.pi;
    doc["config_hash"] = ctx.stamp.config_hash;
    doc["master_seed"] = ctx.stamp.seed;
    std::ofstream(ctx.path("kfold.json")) << doc.dump(2) << "\n";
    io::save_predictions_csv(ctx.path("predictions.csv"), result.predictions, ctx.stamp);
    return;
  }
  if (mode != "protocol") {
    throw ConfigError("config field 'mode' must be \"protocol\" or \"kfold\", got \"" + mode +
                      "\"");
  }

  ProtocolConfig proto;
  const json& sim = cfg.at("sim");
  const std::string kind = require<std::string>(sim, "kind");
  if (kind == "arma1d") proto.sim.kind = SimSpec::Kind::kArma1d;
  else if (kind == "bspline1d") proto.sim.kind = SimSpec::Kind::kBspline1d;
  else if (kind == "field3d") proto.sim.kind = SimSpec::Kind::kField3d;
  else throw ConfigError("sim.kind must be arma1d, bspline1d or field3d");
  proto.sim.n = require<int>(sim, "n");
  proto.sim.p = value_or(sim, "p", 128);
  if (sim.contains("dims")) {
    const auto v = sim.at("dims").get<std::vector<int>>();
    if (v.size() != 3) throw ConfigError("sim.dims needs [H,V,Z]");
    proto.sim.dims = {v[0], v[1], v[2]};
  }
  if (sim.contains("axis_corr")) {
    const auto v = sim.at("axis_corr").get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("sim.axis_corr needs 3 entries");
    proto.sim.axis_corr = {v[0], v[1], v[2]};
  }
  proto.sim.snr = value_or(sim, "snr", 20.0);
  proto.replicates = value_or(cfg, "replicates", 20);
  proto.stability = parse_stability(cfg.at("stability"), 0, 1);
  if (cfg.contains("pi_ladder")) {
    proto.pi_ladder = cfg.at("pi_ladder").get<std::vector<double>>();
  }
  proto.cluster = proto.sim.kind == SimSpec::Kind::kField3d ? ClusterParams::defaults_3d()
                                                            : ClusterParams::defaults_1d();
  proto.cluster.eps = value_or(cfg, "eps", proto.cluster.eps);
  proto.cluster.min_pts = value_or(cfg, "min_pts", proto.cluster.min_pts);
  proto.fitter = parse_fitter(value_or<std::string>(
      cfg, "fitter", proto.sim.kind == SimSpec::Kind::kField3d ? "pwc" : "pspline"));
  proto.test_size = value_or(cfg, "test_size", 1000);
  proto.master_seed = ctx.seed;
  proto.threads = ctx.threads;

  const EvalReport report = run_protocol(proto);
  io::save_report(ctx.path("report.csv"), ctx.path("report.json"), report, ctx.stamp);
}

void write_manifest(const RunContext& ctx, double wall_seconds) {
  json doc;
  doc["subcommand"] = ctx.config.value("_subcommand", "");
  doc["config"] = ctx.config;
  doc["config_hash"] = ctx.stamp.config_hash;
  doc["master_seed"] = ctx.seed;
  doc["threads"] = ctx.threads;
  doc["version"] = kVersion;
  doc["wall_time_s"] = wall_seconds;
  doc["outputs"] = ctx.outputs;
  std::ofstream out(ctx.out / ("manifest_" + ctx.config.value("_subcommand", "run") + ".json"));
  out << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FuDoS: functional domain selection for scalar-on-function regression"};
  app.require_subcommand(1);

  CliOptions opts;
  for (const auto& name :
       {"simulate", "segment", "select", "stability", "model", "predict", "evaluate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON config file")->required();
    sub->add_option("--seed", opts.seed, "master seed (overrides config)");
    sub->add_option("--threads", opts.threads, "thread budget (0 = hardware)");
    sub->add_option("--out", opts.out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    RunContext ctx;
    ctx.config = load_config(opts.config_path);
    opts.subcommand = app.get_subcommands().front()->get_name();
    ctx.config["_subcommand"] = opts.subcommand;
    ctx.seed = opts.seed.value_or(value_or<std::uint64_t>(ctx.config, "seed", 0));
    ctx.config["seed"] = ctx.seed;
    ctx.threads = opts.threads.value_or(value_or<int>(ctx.config, "threads", 0));
    ctx.out = opts.out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    ctx.stamp.config_hash = io::hash_text(ctx.config.dump());
    ctx.stamp.seed = ctx.seed;

    if (opts.subcommand == "simulate") cmd_simulate(ctx);
    else if (opts.subcommand == "segment") cmd_segment(ctx);
    else if (opts.subcommand == "select") cmd_select(ctx);
    else if (opts.subcommand == "stability") cmd_stability(ctx);
    else if (opts.subcommand == "model") cmd_model(ctx);
    else if (opts.subcommand == "predict") cmd_predict(ctx);
    else if (opts.subcommand == "evaluate") cmd_evaluate(ctx);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(ctx, wall);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
