#pragma once

#include <vector>

#include "pcc/diff/tensor.hpp"
#include "pcc/geom/point_cloud.hpp"
#include "pcc/model/config.hpp"
#include "pcc/model/layers.hpp"

namespace pcc::model {

// points_per_center samples evenly spaced over [-0.5, 0.5] (0 when 1).
std::vector<double> fold_grid(std::size_t points_per_center);

// Two-stage folding anchored at the sparse points:
//   mixed_i = relu(linear([AD_i ; PS_i]))
//   p1      = fold1([mixed_i ; g])
//   point   = PS_i + fold2([mixed_i ; p1])
template <class T>
class FoldingGenerator {
 public:
  FoldingGenerator(diff::ParamStore<T>& store, const FoldConfig& cfg,
                   std::size_t decoder_width);

  // [X * points_per_center, 3], center-major.
  diff::Var<T> fold(diff::Tape<T>& tape, diff::Var<T> decoded,
                    diff::Var<T> sparse) const;

  const FoldConfig& config() const { return cfg_; }

 private:
  FoldConfig cfg_;
  Linear<T> mix_;
  Mlp2<T> fold1_;
  Mlp2<T> fold2_;
};

template <class T>
struct Assembled {
  diff::Var<T> missing;    // PM = [fold ; PS]
  diff::Var<T> completed;  // PC = [PP ; PM]
};

// Concatenates without touching the partial points. Throws CountMismatch
// if the sizes disagree with cfg.
template <class T>
Assembled<T> assemble(diff::Tape<T>& tape, diff::Var<T> folded,
                      diff::Var<T> sparse, const PointCloud& pp_n,
                      const ModelConfig& cfg);

}  // namespace pcc::model
