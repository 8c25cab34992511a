#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcc/diff/params.hpp"
#include "pcc/geom/point_cloud.hpp"
#include "pcc/model/config.hpp"
#include "pcc/model/embed.hpp"
#include "pcc/model/foldgen.hpp"
#include "pcc/model/oaformer.hpp"

namespace pcc::model {

// Batched forward pass over B clouds. Per-cloud tensors are stacked along
// rows in batch order: tokens [B*R, .], queries [B*X, .] and so on.
template <class T>
struct ForwardResult {
  std::vector<LocalRegions> regions;
  diff::Var<T> fe;       // [B*R, edge_width2]
  diff::Var<T> pe;       // [B*R, pe_width]
  diff::Var<T> tokens;   // FI
  EncoderOutput<T> encoder;
  QueryOutput<T> query;  // Q and PS, stacked
  diff::Var<T> decoded;  // AD
  diff::Var<T> folded;   // FN(AD)
  std::vector<diff::Var<T>> sparse;  // PS of each cloud, [S, 3]
  std::vector<Assembled<T>> out;     // PM and PC of each cloud
};

// Full completion network: embedding, transformer, folding generator.
// All parameters live in one store seeded at construction.
template <class T>
class CompletionNet {
 public:
  CompletionNet(const ModelConfig& cfg, std::uint64_t seed);
  CompletionNet(const CompletionNet&) = delete;
  CompletionNet& operator=(const CompletionNet&) = delete;

  // Every cloud must be normalized and hold exactly cfg.input_points points.
  // Batch norm statistics in training span the whole batch; attention and
  // pooling never mix clouds.
  ForwardResult<T> forward(diff::Tape<T>& tape,
                           std::span<const PointCloud> batch) const;
  ForwardResult<T> forward(diff::Tape<T>& tape, const PointCloud& pp_n) const;

  diff::ParamStore<T>& params() { return store_; }
  const diff::ParamStore<T>& params() const { return store_; }
  const ModelConfig& config() const { return cfg_; }

 private:
  ModelConfig cfg_;
  diff::ParamStore<T> store_;
  Embedding<T> embed_;
  Transformer<T> transformer_;
  FoldingGenerator<T> fold_;
};

// [n,3] tensor back to a cloud.
PointCloud to_cloud(const diff::Tensor<float>& t);

}  // namespace pcc::model
