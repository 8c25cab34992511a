#pragma once

#include <optional>
#include <vector>

#include "pcc/diff/tensor.hpp"
#include "pcc/model/config.hpp"
#include "pcc/model/layers.hpp"

namespace pcc::model {

// One attention block. Offset mode:
//   SA  = MultiHead(Q <- F, K,V <- context)
//   out = LBR(F - SA) + F
// Self-attention mode (ablation rows A/B): out = LBR(SA) + F.
// LBR is linear -> batchnorm -> relu.
template <class T>
struct AttentionBlock {
  Linear<T> q, k, v, o;
  Linear<T> lbr;
  BatchNorm<T> norm;
  std::size_t heads = 1;
  bool offset = true;

  AttentionBlock() = default;
  AttentionBlock(diff::ParamStore<T>& store, const std::string& name,
                 std::size_t d_model, std::size_t heads, bool offset);

  // context == nullopt means self-attention over f. With batch > 1, f and
  // context hold `batch` equal row blocks and each block only attends to
  // its own block; batch norm statistics span all rows.
  diff::Var<T> operator()(diff::Tape<T>& tape, diff::Var<T> f,
                          std::optional<diff::Var<T>> context = {},
                          std::size_t batch = 1) const;

  // The multi-head attention output SA alone.
  diff::Var<T> attend(diff::Tape<T>& tape, diff::Var<T> f,
                      diff::Var<T> context, std::size_t batch = 1) const;
};

template <class T>
struct EncoderOutput {
  std::vector<diff::Var<T>> memory;  // per-layer outputs, [B*tokens, d_model]
  diff::Var<T> global;               // AE, [B, global_width]
};

template <class T>
struct QueryOutput {
  diff::Var<T> queries;  // Q, [B*X, d_model]
  diff::Var<T> sparse;   // PS, [B*S, 3]
};

template <class T>
class Transformer {
 public:
  // token_width is the FI width; a projection to d_model is added when they
  // differ.
  Transformer(diff::ParamStore<T>& store, const TransformerConfig& cfg,
              std::size_t token_width);

  // tokens: `batch` stacked token sets of equal size.
  EncoderOutput<T> encode(diff::Tape<T>& tape, diff::Var<T> tokens,
                          std::size_t batch = 1) const;
  QueryOutput<T> make_queries_and_sparse(diff::Tape<T>& tape,
                                         diff::Var<T> global) const;
  // AD: [B*X, decoder_width]. Decoder layer i cross-attends to
  // memory[i] + memory[last] with skips, memory[last] without.
  diff::Var<T> decode(diff::Tape<T>& tape, diff::Var<T> queries,
                      const EncoderOutput<T>& enc, std::size_t batch = 1) const;

  const TransformerConfig& config() const { return cfg_; }

 private:
  TransformerConfig cfg_;
  std::optional<Linear<T>> input_proj_;
  std::vector<AttentionBlock<T>> encoder_;
  Linear<T> global_;
  Linear<T> sparse_head_;
  Linear<T> query_head_;
  Mlp2<T> query_pos_;
  std::vector<AttentionBlock<T>> dec_self_;
  std::vector<AttentionBlock<T>> dec_cross_;
  Linear<T> out_proj_;
};

}  // namespace pcc::model
