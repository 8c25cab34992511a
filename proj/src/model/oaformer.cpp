#include "pcc/model/oaformer.hpp"

#include <cmath>

#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"

namespace pcc::model {

using diff::Tape;
using diff::Var;

template <class T>
AttentionBlock<T>::AttentionBlock(diff::ParamStore<T>& store,
                                  const std::string& name, std::size_t d_model,
                                  std::size_t heads_, bool offset_)
    : q(store, name + ".q", d_model, d_model),
      k(store, name + ".k", d_model, d_model),
      v(store, name + ".v", d_model, d_model),
      o(store, name + ".o", d_model, d_model),
      lbr(store, name + ".lbr", d_model, d_model),
      norm(store, name + ".bn", d_model),
      heads(heads_),
      offset(offset_) {}

namespace {

template <class T>
Var<T> row_block(Var<T> x, std::size_t block, std::size_t rows) {
  std::vector<std::uint32_t> idx(rows);
  for (std::size_t i = 0; i < rows; ++i)
    idx[i] = static_cast<std::uint32_t>(block * rows + i);
  return diff::gather_rows(x, std::span<const std::uint32_t>(idx));
}

}  // namespace

template <class T>
Var<T> AttentionBlock<T>::attend(Tape<T>& tape, Var<T> f, Var<T> context,
                                 std::size_t batch) const {
  const std::size_t d = f.cols();
  if (context.cols() != d)
    fail(ErrorKind::ShapeMismatch,
         "attention context width " + std::to_string(context.cols()) +
             " != token width " + std::to_string(d));
  if (batch == 0 || f.rows() % batch || context.rows() % batch)
    fail(ErrorKind::ShapeMismatch, "attention rows do not split into " +
                                       std::to_string(batch) + " blocks");
  const std::size_t dh = d / heads;
  const std::size_t nq = f.rows() / batch, nk = context.rows() / batch;
  const Var<T> qs = q(tape, f);
  const Var<T> ks = k(tape, context);
  const Var<T> vs = v(tape, context);
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
  std::vector<Var<T>> blocks;
  blocks.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const Var<T> qb = batch == 1 ? qs : row_block(qs, b, nq);
    const Var<T> kb = batch == 1 ? ks : row_block(ks, b, nk);
    const Var<T> vb = batch == 1 ? vs : row_block(vs, b, nk);
    std::vector<Var<T>> outs;
    outs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      const Var<T> qh = diff::slice_cols(qb, h * dh, dh);
      const Var<T> kh = diff::slice_cols(kb, h * dh, dh);
      const Var<T> vh = diff::slice_cols(vb, h * dh, dh);
      const Var<T> weights =
          diff::softmax_rows(diff::scale(diff::matmul_nt(qh, kh), inv_sqrt));
      outs.push_back(diff::matmul(weights, vh));
    }
    blocks.push_back(heads == 1 ? outs.front() : diff::concat_cols<T>(outs));
  }
  const Var<T> merged = batch == 1 ? blocks.front() : diff::concat_rows<T>(blocks);
  return o(tape, merged);
}

template <class T>
Var<T> AttentionBlock<T>::operator()(Tape<T>& tape, Var<T> f,
                                     std::optional<Var<T>> context,
                                     std::size_t batch) const {
  const Var<T> sa = attend(tape, f, context.value_or(f), batch);
  const Var<T> path = offset ? diff::sub(f, sa) : sa;
  return diff::add(diff::relu(norm(tape, lbr(tape, path))), f);
}

template <class T>
Transformer<T>::Transformer(diff::ParamStore<T>& store,
                            const TransformerConfig& cfg,
                            std::size_t token_width)
    : cfg_(cfg) {
  if (cfg.dec_layers > cfg.enc_layers)
    fail(ErrorKind::LayerCountMismatch,
         "decoder layers exceed encoder layers");
  const std::size_t d = cfg.d_model;
  if (token_width != d) input_proj_.emplace(store, "enc.input", token_width, d);
  for (std::size_t i = 0; i < cfg.enc_layers; ++i)
    encoder_.emplace_back(store, "enc." + std::to_string(i), d, cfg.heads,
                          cfg.offset_attention);
  global_ = Linear<T>(store, "enc.global", d, cfg.global_width);
  sparse_head_ = Linear<T>(store, "query.sparse", cfg.global_width,
                           cfg.queries * 3);
  query_head_ = Linear<T>(store, "query.features", cfg.global_width,
                          cfg.queries * d);
  query_pos_ = Mlp2<T>(store, "query.pos", 3, cfg.query_pe_hidden, d);
  for (std::size_t i = 0; i < cfg.dec_layers; ++i) {
    dec_self_.emplace_back(store, "dec." + std::to_string(i) + ".self", d,
                           cfg.heads, cfg.offset_attention);
    dec_cross_.emplace_back(store, "dec." + std::to_string(i) + ".cross", d,
                            cfg.heads, cfg.offset_attention);
  }
  out_proj_ = Linear<T>(store, "dec.out", d, cfg.decoder_width);
}

template <class T>
EncoderOutput<T> Transformer<T>::encode(Tape<T>& tape, Var<T> tokens,
                                        std::size_t batch) const {
  Var<T> x = input_proj_ ? (*input_proj_)(tape, tokens) : tokens;
  if (x.cols() != cfg_.d_model)
    fail(ErrorKind::ShapeMismatch, "encoder input width " +
                                       std::to_string(x.cols()) +
                                       " != d_model");
  EncoderOutput<T> out;
  for (const auto& layer : encoder_) {
    x = layer(tape, x, std::nullopt, batch);
    out.memory.push_back(x);
  }
  if (batch == 0 || x.rows() % batch)
    fail(ErrorKind::ShapeMismatch, "tokens do not split into batch blocks");
  out.global = global_(tape, batch == 1 ? diff::max_rows(x)
                                        : diff::segment_max(x, x.rows() / batch));
  return out;
}

template <class T>
QueryOutput<T> Transformer<T>::make_queries_and_sparse(Tape<T>& tape,
                                                       Var<T> global) const {
  if (global.cols() != cfg_.global_width)
    fail(ErrorKind::ShapeMismatch, "global feature has " +
                                       std::to_string(global.cols()) +
                                       " columns, expected " +
                                       std::to_string(cfg_.global_width));
  const std::size_t batch = global.rows();
  const Var<T> g = global;
  QueryOutput<T> out;
  out.sparse = diff::reshape(sparse_head_(tape, g), batch * cfg_.queries, 3);
  const Var<T> raw =
      diff::reshape(query_head_(tape, g), batch * cfg_.queries, cfg_.d_model);
  out.queries = diff::add(raw, query_pos_(tape, out.sparse));
  return out;
}

template <class T>
Var<T> Transformer<T>::decode(Tape<T>& tape, Var<T> queries,
                              const EncoderOutput<T>& enc,
                              std::size_t batch) const {
  if (enc.memory.size() < dec_self_.size())
    fail(ErrorKind::LayerCountMismatch,
         "encoder produced " + std::to_string(enc.memory.size()) +
             " memories for " + std::to_string(dec_self_.size()) +
             " decoder layers");
  const Var<T> last = enc.memory.back();
  Var<T> x = queries;
  for (std::size_t i = 0; i < dec_self_.size(); ++i) {
    x = dec_self_[i](tape, x, std::nullopt, batch);
    const Var<T> context =
        cfg_.skip_connections ? diff::add(enc.memory[i], last) : last;
    x = dec_cross_[i](tape, x, context, batch);
  }
  return out_proj_(tape, x);
}

template struct AttentionBlock<float>;
template struct AttentionBlock<double>;
template class Transformer<float>;
template class Transformer<double>;

}  // namespace pcc::model
