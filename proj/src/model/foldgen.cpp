#include "pcc/model/foldgen.hpp"

#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"
#include "pcc/model/embed.hpp"

namespace pcc::model {

using diff::Tape;
using diff::Tensor;
using diff::Var;

std::vector<double> fold_grid(std::size_t f) {
  std::vector<double> g(f, 0.0);
  if (f > 1)
    for (std::size_t i = 0; i < f; ++i)
      g[i] = -0.5 + static_cast<double>(i) / static_cast<double>(f - 1);
  return g;
}

template <class T>
FoldingGenerator<T>::FoldingGenerator(diff::ParamStore<T>& store,
                                      const FoldConfig& cfg,
                                      std::size_t decoder_width)
    : cfg_(cfg),
      mix_(store, "fold.mix", decoder_width + 3, cfg.mix_width),
      fold1_(store, "fold.stage1", cfg.mix_width + 1, cfg.fold_hidden, 3),
      fold2_(store, "fold.stage2", cfg.mix_width + 3, cfg.fold_hidden, 3) {}

template <class T>
Var<T> FoldingGenerator<T>::fold(Tape<T>& tape, Var<T> decoded,
                                 Var<T> sparse) const {
  if (decoded.rows() != sparse.rows() || sparse.cols() != 3)
    fail(ErrorKind::ShapeMismatch,
         "fold needs one sparse point per decoded token (" +
             std::to_string(decoded.rows()) + " vs " +
             std::to_string(sparse.rows()) + ")");
  const std::size_t centers = decoded.rows();
  const std::size_t f = cfg_.points_per_center;

  const Var<T> mix_in[] = {decoded, sparse};
  const Var<T> mixed =
      diff::relu(mix_(tape, diff::concat_cols<T>(mix_in)));

  std::vector<std::uint32_t> repeat(centers * f);
  Tensor<T> grid(centers * f, 1);
  const auto g = fold_grid(f);
  for (std::size_t i = 0; i < centers; ++i)
    for (std::size_t s = 0; s < f; ++s) {
      repeat[i * f + s] = static_cast<std::uint32_t>(i);
      grid[i * f + s] = static_cast<T>(g[s]);
    }
  const Var<T> feat = diff::gather_rows(mixed, std::span<const std::uint32_t>(repeat));
  const Var<T> anchor = diff::gather_rows(sparse, std::span<const std::uint32_t>(repeat));

  const Var<T> stage1_in[] = {feat, tape.constant(std::move(grid))};
  const Var<T> p1 = fold1_(tape, diff::concat_cols<T>(stage1_in));
  const Var<T> stage2_in[] = {feat, p1};
  const Var<T> p2 = fold2_(tape, diff::concat_cols<T>(stage2_in));
  return diff::add(anchor, p2);
}

template <class T>
Assembled<T> assemble(Tape<T>& tape, Var<T> folded, Var<T> sparse,
                      const PointCloud& pp_n, const ModelConfig& cfg) {
  if (folded.rows() != cfg.fold_count() || sparse.rows() != cfg.sparse_count() ||
      pp_n.size() != cfg.input_points)
    fail(ErrorKind::CountMismatch,
         "assemble: got fold=" + std::to_string(folded.rows()) +
             " sparse=" + std::to_string(sparse.rows()) +
             " partial=" + std::to_string(pp_n.size()) + ", expected " +
             std::to_string(cfg.fold_count()) + "/" +
             std::to_string(cfg.sparse_count()) + "/" +
             std::to_string(cfg.input_points));
  Assembled<T> out;
  const Var<T> pm_parts[] = {folded, sparse};
  out.missing = diff::concat_rows<T>(pm_parts);
  const Var<T> pc_parts[] = {tape.constant(cloud_tensor<T>(pp_n)), out.missing};
  out.completed = diff::concat_rows<T>(pc_parts);
  return out;
}

template class FoldingGenerator<float>;
template class FoldingGenerator<double>;
template Assembled<float> assemble(Tape<float>&, Var<float>, Var<float>,
                                   const PointCloud&, const ModelConfig&);
template Assembled<double> assemble(Tape<double>&, Var<double>, Var<double>,
                                    const PointCloud&, const ModelConfig&);

}  // namespace pcc::model
