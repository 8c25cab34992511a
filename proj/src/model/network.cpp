#include "pcc/model/network.hpp"

#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"

namespace pcc::model {

using diff::Var;

namespace {
const ModelConfig& validated(const ModelConfig& cfg) {
  cfg.validate();
  return cfg;
}
}  // namespace

template <class T>
CompletionNet<T>::CompletionNet(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(validated(cfg)),
      store_(seed),
      embed_(store_, cfg.embed),
      transformer_(store_, cfg.transformer, cfg.embed.token_width()),
      fold_(store_, cfg.fold, cfg.transformer.decoder_width) {}

template <class T>
ForwardResult<T> CompletionNet<T>::forward(diff::Tape<T>& tape,
                                           const PointCloud& pp_n) const {
  return forward(tape, std::span<const PointCloud>(&pp_n, 1));
}

template <class T>
ForwardResult<T> CompletionNet<T>::forward(
    diff::Tape<T>& tape, std::span<const PointCloud> batch) const {
  if (batch.empty()) fail(ErrorKind::CountMismatch, "empty batch");
  for (const auto& pp_n : batch)
    if (pp_n.size() != cfg_.input_points)
      fail(ErrorKind::CountMismatch,
           "network expects " + std::to_string(cfg_.input_points) +
               " input points, got " + std::to_string(pp_n.size()));
  const std::size_t nb = batch.size();
  ForwardResult<T> r;
  std::vector<Var<T>> fe, pe;
  for (const auto& pp_n : batch) {
    r.regions.push_back(
        build_regions(pp_n, cfg_.embed.regions, cfg_.embed.group_size));
    fe.push_back(embed_.edgeconv_features(tape, r.regions.back(), pp_n));
    pe.push_back(embed_.positional_embedding(tape, r.regions.back().centers));
  }
  r.fe = nb == 1 ? fe.front() : diff::concat_rows<T>(fe);
  r.pe = nb == 1 ? pe.front() : diff::concat_rows<T>(pe);
  r.tokens = make_tokens(r.fe, r.pe);
  r.encoder = transformer_.encode(tape, r.tokens, nb);
  r.query = transformer_.make_queries_and_sparse(tape, r.encoder.global);
  r.decoded = transformer_.decode(tape, r.query.queries, r.encoder, nb);
  r.folded = fold_.fold(tape, r.decoded, r.query.sparse);

  const std::size_t s = cfg_.sparse_count(), m = cfg_.fold_count();
  for (std::size_t b = 0; b < nb; ++b) {
    Var<T> sparse = r.query.sparse, folded = r.folded;
    if (nb > 1) {
      std::vector<std::uint32_t> si(s), fi(m);
      for (std::size_t i = 0; i < s; ++i) si[i] = static_cast<std::uint32_t>(b * s + i);
      for (std::size_t i = 0; i < m; ++i) fi[i] = static_cast<std::uint32_t>(b * m + i);
      sparse = diff::gather_rows(r.query.sparse, std::span<const std::uint32_t>(si));
      folded = diff::gather_rows(r.folded, std::span<const std::uint32_t>(fi));
    }
    r.sparse.push_back(sparse);
    r.out.push_back(assemble(tape, folded, sparse, batch[b], cfg_));
  }
  return r;
}

PointCloud to_cloud(const diff::Tensor<float>& t) {
  if (t.cols() != 3)
    fail(ErrorKind::ShapeMismatch, "point tensor must have 3 columns");
  std::vector<Vec3> pts(t.rows());
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i] = {t[3 * i], t[3 * i + 1], t[3 * i + 2]};
  return PointCloud(std::move(pts));
}

template class CompletionNet<float>;
template class CompletionNet<double>;

}  // namespace pcc::model
