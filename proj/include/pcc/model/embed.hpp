#pragma once

#include <cstdint>
#include <vector>

#include "pcc/diff/tensor.hpp"
#include "pcc/geom/point_cloud.hpp"
#include "pcc/model/config.hpp"
#include "pcc/model/layers.hpp"

namespace pcc::model {

struct LocalRegions {
  PointCloud centers;
  std::vector<std::uint32_t> center_index;          // into the input cloud
  std::vector<std::vector<std::uint32_t>> groups;   // KNN of each center
};

// FPS picks the centers, KNN gathers each group. Throws BadCount.
LocalRegions build_regions(const PointCloud& pp_n, std::size_t regions,
                           std::size_t group_size);

// Within-group coordinate-space neighbour table used by both EdgeConv
// layers. Members are flattened region-major: slot = region * group + m.
struct EdgeGraph {
  std::size_t group_size = 0;
  std::size_t edge_k = 0;
  std::vector<std::uint32_t> member_point;  // slot -> input cloud index
  std::vector<std::uint32_t> self_slot;     // edge -> its centre slot
  std::vector<std::uint32_t> neighbor_slot; // edge -> neighbour slot
};

// Each member's edge_k nearest other members of its own group (ties by
// lower position in the group). Throws BadCount if edge_k >= group size.
EdgeGraph build_edge_graph(const LocalRegions& lr, const PointCloud& pp_n,
                           std::size_t edge_k);

// DGCNN-style local features plus positional embedding of the centers.
template <class T>
class Embedding {
 public:
  Embedding(diff::ParamStore<T>& store, const EmbedConfig& cfg);

  // FE: [regions, edge_width2]. Two EdgeConv layers over
  // [x_j ; x_m - x_j], max over neighbours, then max over the group.
  diff::Var<T> edgeconv_features(diff::Tape<T>& tape, const LocalRegions& lr,
                                 const PointCloud& pp_n) const;

  // PE: [regions, pe_width], a two-layer MLP of each center.
  diff::Var<T> positional_embedding(diff::Tape<T>& tape,
                                    const PointCloud& centers) const;

  const EmbedConfig& config() const { return cfg_; }

 private:
  EmbedConfig cfg_;
  Linear<T> edge1_;
  Linear<T> edge2_;
  Mlp2<T> pos_;
};

// FI = [FE | PE] row by row.
template <class T>
diff::Var<T> make_tokens(diff::Var<T> fe, diff::Var<T> pe);

// [n,3] constant tensor of a cloud's points.
template <class T>
diff::Tensor<T> cloud_tensor(const PointCloud& pc);

}  // namespace pcc::model

namespace pcc::model {

// One EdgeConv layer over per-slot features [slots, w]:
// relu(linear([f_j ; f_m - f_j])) max-pooled over each slot's edge_k
// neighbours -> [slots, layer.out()].
template <class T>
diff::Var<T> edgeconv_layer(diff::Tape<T>& tape, diff::Var<T> features,
                            const EdgeGraph& graph, const Linear<T>& layer);

}  // namespace pcc::model
