#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcc/data/shapes.hpp"
#include "pcc/geom/point_cloud.hpp"

namespace pcc::data {

// Which parameters normalize the ground truth: the partial's own (ours) or
// the ground truth's own (baseline).
enum class NormMode { Ours, Baseline };

std::string norm_mode_name(NormMode m);
NormMode parse_norm_mode(const std::string& name);

enum class Split { Train, Val, HoldoutViews, HoldoutModels };

std::string split_name(Split s);
Split parse_split(const std::string& name);

struct DataConfig {
  std::size_t surface_points = 20000;
  std::size_t input_points = 2048;
  std::size_t gt_points = 8192;
  std::size_t scan_resolution = 128;
  std::size_t camera_retries = 16;

  static DataConfig full_size() { return {}; }
  static DataConfig desk() { return {4000, 256, 512, 64, 16}; }

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

void to_json(nlohmann::json& j, const DataConfig& c);
void from_json(const nlohmann::json& j, DataConfig& c);

struct Sample {
  PointCloud partial;  // normalized, input_points
  PointCloud gt;       // normalized, gt_points
  NormParams norm;     // from the raw partial
  // Index into the raw surface sampling for every partial / gt point.
  std::vector<std::uint32_t> partial_source;
  std::vector<std::uint32_t> gt_source;
};

// surface -> z-buffer scan -> normalize with the partial's parameters ->
// FPS to exact counts. Baseline mode normalizes the ground truth with its
// own parameters instead. Throws InsufficientPoints when the scan keeps
// fewer than input_points, plus DegenerateCloud / EmptyScan.
Sample build_sample(const ShapeSpec& spec, const std::array<double, 3>& camera,
                    std::uint64_t seed, const DataConfig& cfg,
                    NormMode mode = NormMode::Ours);

// Camera on a random direction at three bounding radii from the centroid.
std::array<double, 3> random_camera(const PointCloud& surface,
                                    std::mt19937_64& rng);

struct SampleRecord {
  std::string id;
  Split split = Split::Train;
  ShapeSpec shape;
  std::array<double, 3> camera{};
  std::uint64_t seed = 0;
  std::string partial_path;  // relative to the dataset directory
  std::string gt_path;
  NormParams norm;
  NormMode gt_norm = NormMode::Ours;
};

struct Manifest {
  int version = 1;
  std::uint64_t seed = 0;
  NormMode norm_mode = NormMode::Ours;
  std::size_t shapes = 0;
  std::size_t views = 0;
  DataConfig data;
  std::vector<SampleRecord> samples;

  std::vector<const SampleRecord*> split(Split s) const;
};

void to_json(nlohmann::json& j, const Manifest& m);
void from_json(const nlohmann::json& j, Manifest& m);

struct GenOptions {
  std::size_t shapes = 200;
  std::size_t views = 1;
  std::uint64_t seed = 0;
  NormMode norm_mode = NormMode::Ours;
  DataConfig data = DataConfig::desk();
};

// Writes DIR/manifest.json and DIR/clouds/*.pcdc.
//   train           shapes x views, kinds box/sphere/cylinder/capsule
//   val             one extra view of every 5th training shape
//   holdout-views   one unseen view of every training shape
//   holdout-models  composite (mug) shapes never seen in training
// Holdout ground truth is always normalized with the partial's parameters,
// the only frame available at deployment; train/val follow norm_mode.
Manifest generate_dataset(const std::filesystem::path& dir,
                          const GenOptions& opts);

// Throws DatasetMissing if the manifest is absent.
Manifest load_manifest(const std::filesystem::path& dir);

struct LoadedSample {
  SampleRecord record;
  PointCloud partial;
  PointCloud gt;
};

std::vector<LoadedSample> load_split(const std::filesystem::path& dir,
                                     const Manifest& m, Split s);

}  // namespace pcc::data
