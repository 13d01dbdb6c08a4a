#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fudos/dataset.hpp"
#include "fudos/pipeline.hpp"
#include "fudos/segmentation.hpp"
#include "fudos/selection.hpp"
#include "fudos/stability.hpp"

namespace fudos::io {

/// Provenance stamp embedded in every artifact: hash of the resolved config
/// plus the master seed, so a manifest rerun reproduces identical bytes.
struct RunStamp {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// FNV-1a over the canonical JSON dump of a config document.
std::string hash_text(const std::string& canonical);

// --- 1D datasets: CSV with the grid in the first row, samples after it. ---
void save_dataset_csv(const std::filesystem::path& x_path, const Dataset1D& data,
                      const RunStamp& stamp = {});
void save_response_csv(const std::filesystem::path& y_path, const Eigen::VectorXd& y,
                       const RunStamp& stamp = {});
Dataset1D load_dataset_csv(const std::filesystem::path& x_path,
                           const std::filesystem::path& y_path);
/// Predictors only (zero response), for prediction-time inputs.
Dataset1D load_predictors_csv(const std::filesystem::path& x_path);
Eigen::VectorXd load_response_csv(const std::filesystem::path& y_path);

// --- 3D datasets: little-endian float64 volumes in (z,v,h) layout, JSON ---
// sidecar {n,H,V,Z,mask_path}, mask one byte per voxel.
void save_dataset_3d(const std::filesystem::path& sidecar_path, const Dataset3D& data,
                     const RunStamp& stamp = {});
Dataset3D load_dataset_3d(const std::filesystem::path& sidecar_path);

// --- Analysis artifacts (JSON unless noted). ---
void save_segmentation(const std::filesystem::path& path, const SegmentationResult& seg,
                       const RunStamp& stamp = {});
SegmentationResult load_segmentation(const std::filesystem::path& path);

/// Axis boundaries as JSON; the per-voxel segment-id map as int32 LE binary.
void save_cuboids(const std::filesystem::path& json_path,
                  const std::filesystem::path& map_path, const CuboidSegments& cubes,
                  const Dims3D& dims, const RunStamp& stamp = {});

void save_trace(const std::filesystem::path& path, const SelectionTrace& trace,
                const RunStamp& stamp = {});
SelectionTrace load_trace(const std::filesystem::path& path);

/// 1D: CSV with point index, one frequency column per tuning pair, max.
void save_frequency_csv(const std::filesystem::path& path, const FrequencyMap& map,
                        const RunStamp& stamp = {});
FrequencyMap load_frequency_csv(const std::filesystem::path& path);

/// 3D: flat binary of (pairs+1) float64 volumes (per-pair frequency, then
/// max) plus a JSON sidecar.
void save_frequency_3d(const std::filesystem::path& sidecar_path, const FrequencyMap& map,
                       const Dims3D& dims, const RunStamp& stamp = {});
FrequencyMap load_frequency_3d(const std::filesystem::path& sidecar_path);

void save_stable_subdomain(const std::filesystem::path& path, const StableSubdomain& stable,
                           const RunStamp& stamp = {});

void save_clusters_csv(const std::filesystem::path& path, const std::vector<int>& points,
                       const ClusterAssignment& assignment, const Dims3D* dims = nullptr,
                       const RunStamp& stamp = {});

void save_model(const std::filesystem::path& path, const PredictiveModel& model,
                const RunStamp& stamp = {});
PredictiveModel load_model(const std::filesystem::path& path);

void save_predictions_csv(const std::filesystem::path& path, const Eigen::VectorXd& pred,
                          const RunStamp& stamp = {});

/// Report CSV mirrors the reference tables: one row per metric statistic,
/// one column per pi. A JSON summary sits alongside.
void save_report(const std::filesystem::path& csv_path, const std::filesystem::path& json_path,
                 const EvalReport& report, const RunStamp& stamp = {});

}  // namespace fudos::io
