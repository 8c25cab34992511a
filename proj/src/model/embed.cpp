#include "pcc/model/embed.hpp"

#include <algorithm>
#include <numeric>

#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"

namespace pcc::model {

using diff::Tape;
using diff::Tensor;
using diff::Var;

LocalRegions build_regions(const PointCloud& pp_n, std::size_t regions,
                           std::size_t group_size) {
  LocalRegions lr;
  lr.center_index = fps(pp_n, regions);
  lr.centers = pp_n.select(lr.center_index);
  lr.groups.reserve(regions);
  for (const auto c : lr.center_index)
    lr.groups.push_back(knn(pp_n, pp_n[c], group_size));
  return lr;
}

EdgeGraph build_edge_graph(const LocalRegions& lr, const PointCloud& pp_n,
                           std::size_t edge_k) {
  if (lr.groups.empty()) fail(ErrorKind::BadCount, "no regions");
  const std::size_t g = lr.groups.front().size();
  if (edge_k < 1 || edge_k >= g)
    fail(ErrorKind::BadCount, "edge_k=" + std::to_string(edge_k) +
                                  " must be in [1, " + std::to_string(g - 1) +
                                  "]");
  EdgeGraph eg;
  eg.group_size = g;
  eg.edge_k = edge_k;
  std::vector<double> d(g);
  std::vector<std::uint32_t> order(g);
  for (std::size_t r = 0; r < lr.groups.size(); ++r) {
    const auto& grp = lr.groups[r];
    if (grp.size() != g) fail(ErrorKind::ShapeMismatch, "ragged groups");
    const std::uint32_t base = static_cast<std::uint32_t>(r * g);
    for (const auto p : grp) eg.member_point.push_back(p);
    for (std::size_t j = 0; j < g; ++j) {
      const Vec3& xj = pp_n[grp[j]];
      for (std::size_t m = 0; m < g; ++m) {
        const Vec3& xm = pp_n[grp[m]];
        const double dx = double(xm.x) - xj.x, dy = double(xm.y) - xj.y,
                     dz = double(xm.z) - xj.z;
        d[m] = dx * dx + dy * dy + dz * dz;
      }
      std::iota(order.begin(), order.end(), 0u);
      std::erase(order, static_cast<std::uint32_t>(j));
      std::partial_sort(order.begin(), order.begin() + static_cast<long>(edge_k),
                        order.end(), [&](std::uint32_t a, std::uint32_t b) {
                          return d[a] < d[b] || (d[a] == d[b] && a < b);
                        });
      for (std::size_t e = 0; e < edge_k; ++e) {
        eg.self_slot.push_back(base + static_cast<std::uint32_t>(j));
        eg.neighbor_slot.push_back(base + order[e]);
      }
      order.resize(g);
    }
  }
  return eg;
}

template <class T>
Tensor<T> cloud_tensor(const PointCloud& pc) {
  return Tensor<T>({pc.size(), 3}, pc.interleaved<T>());
}

template <class T>
Var<T> edgeconv_layer(Tape<T>& tape, Var<T> features, const EdgeGraph& graph,
                      const Linear<T>& layer) {
  (void)tape;
  const Var<T> self = diff::gather_rows(features, std::span(graph.self_slot));
  const Var<T> nbr = diff::gather_rows(features, std::span(graph.neighbor_slot));
  const Var<T> parts[] = {self, diff::sub(nbr, self)};
  const Var<T> edge = diff::concat_cols<T>(parts);
  return diff::segment_max(diff::relu(layer(tape, edge)), graph.edge_k);
}

template <class T>
Embedding<T>::Embedding(diff::ParamStore<T>& store, const EmbedConfig& cfg)
    : cfg_(cfg),
      edge1_(store, "embed.edge1", 6, cfg.edge_width1),
      edge2_(store, "embed.edge2", 2 * cfg.edge_width1, cfg.edge_width2),
      pos_(store, "embed.pos", 3, cfg.pe_hidden, cfg.pe_width) {}

template <class T>
Var<T> Embedding<T>::edgeconv_features(Tape<T>& tape, const LocalRegions& lr,
                                       const PointCloud& pp_n) const {
  const EdgeGraph graph = build_edge_graph(lr, pp_n, cfg_.edge_k);
  const PointCloud members = pp_n.select(graph.member_point);
  const Var<T> coords = tape.constant(cloud_tensor<T>(members));
  const Var<T> h1 = edgeconv_layer(tape, coords, graph, edge1_);
  const Var<T> h2 = edgeconv_layer(tape, h1, graph, edge2_);
  return diff::segment_max(h2, graph.group_size);
}

template <class T>
Var<T> Embedding<T>::positional_embedding(Tape<T>& tape,
                                          const PointCloud& centers) const {
  return pos_(tape, tape.constant(cloud_tensor<T>(centers)));
}

template <class T>
Var<T> make_tokens(Var<T> fe, Var<T> pe) {
  if (fe.rows() != pe.rows())
    fail(ErrorKind::ShapeMismatch,
         "FE has " + std::to_string(fe.rows()) + " tokens, PE " +
             std::to_string(pe.rows()));
  const Var<T> parts[] = {fe, pe};
  return diff::concat_cols<T>(parts);
}

template class Embedding<float>;
template class Embedding<double>;
template Var<float> make_tokens(Var<float>, Var<float>);
template Var<double> make_tokens(Var<double>, Var<double>);
template Tensor<float> cloud_tensor(const PointCloud&);
template Tensor<double> cloud_tensor(const PointCloud&);
template Var<float> edgeconv_layer(Tape<float>&, Var<float>, const EdgeGraph&,
                                   const Linear<float>&);
template Var<double> edgeconv_layer(Tape<double>&, Var<double>,
                                    const EdgeGraph&, const Linear<double>&);

}  // namespace pcc::model
