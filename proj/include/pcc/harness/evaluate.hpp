#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcc/data/dataset.hpp"
#include "pcc/diff/checkpoint.hpp"
#include "pcc/model/network.hpp"

namespace pcc::harness {

// All Chamfer values are L2 CD x 1000.
struct EvalRow {
  std::string id;
  double cd_pc = 0.0;       // completed cloud vs ground truth
  double cd_ps = 0.0;       // sparse cloud vs ground truth
  double cd_partial = 0.0;  // partial padded by repetition vs ground truth
};

struct EvalReport {
  std::string split;
  std::uint64_t seed = 0;
  std::vector<EvalRow> rows;
  double mean_pc = 0.0;
  double mean_ps = 0.0;
  double mean_partial = 0.0;
  double runtime_s = 0.0;  // wall clock; kept out of the CSV
};

// Partial repeated cyclically up to `count` points.
PointCloud pad_by_repetition(const PointCloud& partial, std::size_t count);

// Inference over already loaded samples in manifest order.
EvalReport evaluate(const model::CompletionNet<float>& net,
                    const std::vector<data::LoadedSample>& samples);

// Throws ConfigMismatch if the checkpoint's input size disagrees with the
// dataset, DatasetMissing if the dataset is absent.
EvalReport evaluate(const diff::Checkpoint& ckpt,
                    const std::filesystem::path& data_dir, data::Split split);

// Header row, one row per sample, then a "mean" row.
std::string report_csv(const EvalReport& r);
void write_report(const std::filesystem::path& path, const EvalReport& r);

// Recomputes the means from the per-sample rows.
EvalReport recompute_means(EvalReport r);

}  // namespace pcc::harness
