#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcc/data/dataset.hpp"
#include "pcc/diff/checkpoint.hpp"
#include "pcc/model/config.hpp"
#include "pcc/model/network.hpp"

namespace pcc::harness {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  model::Variant variant = model::Variant::D;
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  model::ModelConfig model = model::ModelConfig::desk();
  // Validation every this many epochs; the last epoch always validates.
  std::size_t val_every = 1;
  // Per-epoch progress lines.
  std::function<void(const std::string&)> log;
};

// Hyperparameters and architecture only; paths are not part of the key.
void to_json(nlohmann::json& j, const TrainConfig& c);
// Reads any subset of epochs, batch_size, learning_rate, seed, variant,
// val_every and model from a JSON config file.
void apply_config_json(TrainConfig& c, const nlohmann::json& j);

struct EpochStats {
  std::size_t epoch = 0;      // 1-based
  double train_loss = 0.0;    // mean per-sample loss over the epoch
  double val_cd = -1.0;       // mean CD(PC, PGT); -1 when not validated
};

struct TrainResult {
  std::filesystem::path run_dir;
  std::filesystem::path checkpoint;  // best validation CD
  std::vector<EpochStats> curve;
  double best_val_cd = 0.0;
  std::size_t best_epoch = 0;
  data::NormMode norm_mode = data::NormMode::Ours;
};

// Run directory name: run-<16 hex digits of the config hash>-s<seed>.
std::string run_name(const TrainConfig& cfg, const data::Manifest& m);

// Deterministic for a given config and dataset. Writes under
// out_dir/run_name(): config.json, loss_curve.csv, best.ckpt, final.ckpt.
// Throws DatasetMissing, DivergedLoss, CountMismatch.
TrainResult train(const TrainConfig& cfg);

// Everything needed to rebuild the network from a checkpoint.
struct RunInfo {
  model::ModelConfig model;
  std::uint64_t seed = 0;
  data::NormMode norm_mode = data::NormMode::Ours;
};

std::string checkpoint_config(const TrainConfig& cfg, data::NormMode mode);
RunInfo parse_checkpoint_config(const std::string& json_text);

// Rebuilds the network and restores its weights. Throws ConfigMismatch.
std::unique_ptr<model::CompletionNet<float>> load_network(
    const diff::Checkpoint& ckpt, RunInfo* info = nullptr);

}  // namespace pcc::harness
