#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pcc/data/dataset.hpp"
#include "pcc/model/config.hpp"

namespace pcc::harness {

struct AblateOptions {
  // Must contain ours/ and baseline/ datasets generated with the same seed.
  std::filesystem::path data_dir;
  std::filesystem::path out_dir;
  std::size_t seeds = 3;
  std::uint64_t first_seed = 0;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  model::ModelConfig model = model::ModelConfig::desk();
  std::function<void(const std::string&)> log;
};

struct AblationRun {
  model::Variant variant = model::Variant::D;
  data::NormMode norm = data::NormMode::Ours;
  std::uint64_t seed = 0;
  double first_train_loss = 0.0;
  double final_train_loss = 0.0;
  double holdout_cd = 0.0;       // mean CD(PC, PGT) x1000 on holdout-views
  double holdout_partial = 0.0;  // mean CD(padded PP, PGT) x1000
  std::filesystem::path checkpoint;
  double train_seconds = 0.0;  // wall clock, not written to the tables
};

struct AblationTable {
  std::vector<AblationRun> runs;

  std::vector<const AblationRun*> select(model::Variant v,
                                         data::NormMode n) const;
  double median_cd(model::Variant v, data::NormMode n) const;
};

double median(std::vector<double> values);

// {A,B,C,D} with our normalization plus D with baseline normalization,
// `seeds` seeds each. Writes runs.csv, architecture.csv and
// normalization.csv into out_dir.
AblationTable ablate(const AblateOptions& opts);

// Architecture rows: model, offset_attention, skip_connections, median CD.
std::string architecture_csv(const AblationTable& t);
// Normalization rows: norm, median CD.
std::string normalization_csv(const AblationTable& t);
std::string runs_csv(const AblationTable& t);

}  // namespace pcc::harness
