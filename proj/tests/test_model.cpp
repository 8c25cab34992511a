#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pcc/error.hpp"
#include "pcc/geom/point_cloud.hpp"
#include "pcc/model/network.hpp"

using namespace pcc;
using namespace pcc::model;
using diff::Mode;
using diff::Tape;
using diff::Tensor;

namespace {

PointCloud unit_cloud(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0, 1);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) {
    const float x = g(rng), y = g(rng), z = g(rng);
    const float r = std::sqrt(x * x + y * y + z * z);
    p = {x / r, y / r * 0.6f, z / r * 0.3f};
  }
  const PointCloud pc(std::move(pts));
  return normalize(pc, compute_norm_params(pc));
}

std::vector<std::array<float, 3>> sorted_rows(const Tensor<float>& t) {
  std::vector<std::array<float, 3>> rows(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i)
    rows[i] = {t.at(i, 0), t.at(i, 1), t.at(i, 2)};
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("desk forward shapes") {
  const auto cfg = ModelConfig::desk();
  CompletionNet<float> net(cfg, 1);
  const auto pp = unit_cloud(1, cfg.input_points);
  Tape<float> tape(Mode::Eval, false);
  const auto r = net.forward(tape, pp);
  const auto& t = cfg.transformer;
  CHECK(r.tokens.rows() == cfg.embed.regions);
  CHECK(r.tokens.cols() == cfg.embed.edge_width2 + cfg.embed.pe_width);
  CHECK(r.encoder.global.rows() == 1);
  CHECK(r.encoder.global.cols() == t.global_width);
  CHECK(r.query.queries.rows() == t.queries);
  CHECK(r.query.queries.cols() == t.d_model);
  CHECK(r.decoded.rows() == t.queries);
  CHECK(r.decoded.cols() == t.decoder_width);
  CHECK(r.folded.rows() == cfg.fold_count());
  REQUIRE(r.sparse.size() == 1);
  CHECK(r.sparse[0].rows() == cfg.sparse_count());
  CHECK(r.out[0].missing.rows() == cfg.missing_count());
  CHECK(r.out[0].completed.rows() == cfg.completed_count());
}

TEST_CASE("completed cloud starts with the input bit for bit") {
  const auto cfg = ModelConfig::desk();
  CompletionNet<float> net(cfg, 2);
  const auto pp = unit_cloud(2, cfg.input_points);
  Tape<float> tape(Mode::Eval, false);
  const auto& pc = net.forward(tape, pp).out[0].completed.value();
  for (std::size_t i = 0; i < pp.size(); ++i) {
    CHECK(pc.at(i, 0) == pp[i].x);
    CHECK(pc.at(i, 1) == pp[i].y);
    CHECK(pc.at(i, 2) == pp[i].z);
  }
}

TEST_CASE("forward rejects a wrong point count") {
  const auto cfg = ModelConfig::toy();
  CompletionNet<float> net(cfg, 3);
  Tape<float> tape(Mode::Eval, false);
  CHECK_THROWS_AS(net.forward(tape, unit_cloud(3, cfg.input_points + 1)), Error);
}

TEST_CASE("batched forward in eval mode matches single clouds") {
  const auto cfg = ModelConfig::toy();
  CompletionNet<double> net(cfg, 4);
  const std::vector<PointCloud> clouds{unit_cloud(10, 16), unit_cloud(11, 16)};
  Tape<double> tb(Mode::Eval, false);
  const auto batched = net.forward(tb, clouds);
  for (std::size_t b = 0; b < 2; ++b) {
    Tape<double> ts(Mode::Eval, false);
    const auto single = net.forward(ts, clouds[b]);
    const auto& x = batched.out[b].completed.value();
    const auto& y = single.out[0].completed.value();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) < 1e-9);
  }
}

TEST_CASE("single-token attention ignores the query and key projections") {
  diff::ParamStore<double> store(5);
  AttentionBlock<double> blk(store, "a", 8, 2, true);
  Tensor<double> f(1, 8);
  for (std::size_t j = 0; j < 8; ++j) f[j] = 0.1 * double(j) - 0.3;
  Tape<double> t1(Mode::Eval, false);
  const auto before = blk.attend(t1, t1.constant(f), t1.constant(f)).value();
  for (auto& w : blk.q.weight->value.data()) w *= -3;
  for (auto& w : blk.k.weight->value.data()) w += 0.7;
  Tape<double> t2(Mode::Eval, false);
  const auto after = blk.attend(t2, t2.constant(f), t2.constant(f)).value();
  for (std::size_t j = 0; j < before.size(); ++j)
    CHECK(std::abs(before[j] - after[j]) < 1e-12);
}

TEST_CASE("identical tokens give identical attention rows") {
  diff::ParamStore<double> store(6);
  AttentionBlock<double> blk(store, "a", 8, 4, false);
  Tensor<double> f(5, 8);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 8; ++j) f.at(i, j) = std::sin(double(j) + 1);
  Tape<double> t(Mode::Eval, false);
  const auto out = blk.attend(t, t.constant(f), t.constant(f)).value();
  for (std::size_t i = 1; i < 5; ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) CHECK(out.at(i, j) == out.at(0, j));
}

TEST_CASE("fold grid") {
  CHECK(fold_grid(1) == std::vector<double>{0.0});
  const auto g = fold_grid(5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == -0.5);
  CHECK(g.back() == 0.5);
  CHECK(g[2] == doctest::Approx(0.0));
}

TEST_CASE("zeroed second fold stage returns the anchors") {
  diff::ParamStore<double> store(7);
  FoldConfig fc{3, 6, 5};
  FoldingGenerator<double> gen(store, fc, 4);
  for (auto* name : {"fold.stage2.1.weight", "fold.stage2.1.bias"}) {
    auto* p = store.find(name);
    REQUIRE(p != nullptr);
    for (auto& v : p->value.data()) v = 0;
  }
  Tensor<double> dec(2, 4, 0.5), sp({2, 3}, {1, 2, 3, -1, 0, 1});
  Tape<double> t(Mode::Eval, false);
  const auto out = gen.fold(t, t.constant(dec), t.constant(sp)).value();
  REQUIRE(out.rows() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.at(i, c) == sp.at(i / 3, c));
}

TEST_CASE("assemble checks counts") {
  auto cfg = ModelConfig::toy();
  const auto pp = unit_cloud(8, cfg.input_points);
  Tape<double> t(Mode::Eval, false);
  const auto folded = t.constant(Tensor<double>(cfg.fold_count(), 3, 0.25));
  const auto sparse = t.constant(Tensor<double>(cfg.sparse_count(), 3, -0.25));
  const auto a = assemble(t, folded, sparse, pp, cfg);
  CHECK(a.missing.rows() == cfg.missing_count());
  CHECK(a.completed.rows() == cfg.completed_count());
  CHECK(a.missing.value().at(cfg.fold_count(), 0) == -0.25);
  const auto short_fold = t.constant(Tensor<double>(cfg.fold_count() - 1, 3));
  CHECK_THROWS_AS(assemble(t, short_fold, sparse, pp, cfg), Error);
}

TEST_CASE("skip connections change outputs but not the parameter count") {
  auto with = ModelConfig::desk(), without = ModelConfig::desk();
  with.set_variant(Variant::D);
  without.set_variant(Variant::C);
  CompletionNet<float> a(with, 9), b(without, 9);
  CHECK(a.params().all().size() == b.params().all().size());
  CHECK(a.params().trainable_count() == b.params().trainable_count());
  const auto pp = unit_cloud(9, with.input_points);
  Tape<float> ta(Mode::Eval, false), tb(Mode::Eval, false);
  const auto ya = a.forward(ta, pp).out[0].missing.value();
  const auto yb = b.forward(tb, pp).out[0].missing.value();
  CHECK(ya != yb);
}

TEST_CASE("variants") {
  auto c = ModelConfig::desk();
  for (char v : std::string("ABCD")) {
    c.set_variant(parse_variant(std::string(1, v)));
    CHECK(variant_letter(c.variant()) == v);
  }
  CHECK_THROWS_AS(parse_variant("E"), Error);
}

TEST_CASE("point order does not matter") {
  const auto cfg = ModelConfig::desk();
  CompletionNet<float> net(cfg, 10);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto pp = unit_cloud(100 + s, cfg.input_points);
    std::vector<std::uint32_t> perm(pp.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(s));
    const auto shuffled = pp.select(perm);
    Tape<float> t1(Mode::Eval, false), t2(Mode::Eval, false);
    const auto r1 = net.forward(t1, pp);
    const auto r2 = net.forward(t2, shuffled);
    const auto& g1 = r1.encoder.global.value();
    const auto& g2 = r2.encoder.global.value();
    for (std::size_t j = 0; j < g1.size(); ++j) CHECK(std::abs(g1[j] - g2[j]) < 1e-5);
    const auto a = sorted_rows(r1.out[0].completed.value());
    const auto b = sorted_rows(r2.out[0].completed.value());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int c = 0; c < 3; ++c) CHECK(std::abs(a[i][c] - b[i][c]) < 1e-5);
  }
}

TEST_CASE("tokens are features followed by positions") {
  Tape<double> t;
  const auto fe = t.constant(Tensor<double>({2, 2}, {1, 2, 3, 4}));
  const auto pe = t.constant(Tensor<double>({2, 1}, {9, 8}));
  CHECK(make_tokens(fe, pe).value() == Tensor<double>({2, 3}, {1, 2, 9, 3, 4, 8}));
  const auto bad = t.constant(Tensor<double>(3, 1));
  CHECK_THROWS_AS(make_tokens(fe, bad), Error);
}

TEST_CASE("positional embedding of the origin is the bias path") {
  diff::ParamStore<double> store(11);
  EmbedConfig ec{4, 2, 1, 4, 4, 5, 3};
  Embedding<double> emb(store, ec);
  const PointCloud origin(std::vector<Vec3>{{0, 0, 0}, {0, 0, 0}});
  Tape<double> t(Mode::Eval, false);
  const auto pe = emb.positional_embedding(t, origin).value();
  const auto& b1 = store.find("embed.pos.0.bias")->value;
  const auto& w2 = store.find("embed.pos.1.weight")->value;
  const auto& b2 = store.find("embed.pos.1.bias")->value;
  REQUIRE(pe.cols() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    double s = b2[j];
    for (std::size_t h = 0; h < 5; ++h) s += std::max(0.0, b1[h]) * w2.at(h, j);
    CHECK(pe.at(0, j) == doctest::Approx(s));
    CHECK(pe.at(1, j) == pe.at(0, j));
  }
}

TEST_CASE("edgeconv depends only on differences when the self block is zero") {
  diff::ParamStore<double> store(12);
  Linear<double> layer(store, "e", 6, 4);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) layer.weight->value.at(r, c) = 0;
  const auto pp = unit_cloud(12, 16);
  const auto lr = build_regions(pp, 2, 8);
  const auto graph = build_edge_graph(lr, pp, 3);
  auto feats = [&](double shift) {
    Tensor<double> f(graph.member_point.size(), 3);
    for (std::size_t s = 0; s < graph.member_point.size(); ++s) {
      const auto& p = pp[graph.member_point[s]];
      f.at(s, 0) = p.x + shift;
      f.at(s, 1) = p.y - shift;
      f.at(s, 2) = p.z + 2 * shift;
    }
    return f;
  };
  Tape<double> t(Mode::Eval, false);
  const auto a = edgeconv_layer(t, t.constant(feats(0)), graph, layer).value();
  const auto b = edgeconv_layer(t, t.constant(feats(3.5)), graph, layer).value();
  REQUIRE(a.rows() == 16);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("regions and edge graph") {
  const auto pp = unit_cloud(13, 32);
  const auto lr = build_regions(pp, 4, 8);
  CHECK(lr.centers.size() == 4);
  REQUIRE(lr.groups.size() == 4);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(lr.groups[r].size() == 8);
    // A center is its own nearest neighbour.
    CHECK(lr.groups[r][0] == lr.center_index[r]);
  }
  const auto g = build_edge_graph(lr, pp, 3);
  CHECK(g.self_slot.size() == 4 * 8 * 3);
  for (std::size_t e = 0; e < g.self_slot.size(); ++e) {
    CHECK(g.self_slot[e] != g.neighbor_slot[e]);
    CHECK(g.self_slot[e] / 8 == g.neighbor_slot[e] / 8);
  }
  CHECK_THROWS_AS(build_edge_graph(lr, pp, 8), Error);
  CHECK_THROWS_AS(build_regions(pp, 40, 8), Error);
}

TEST_CASE("config json round trip and validation") {
  const auto c = ModelConfig::desk();
  nlohmann::json j = c;
  CHECK(j.get<ModelConfig>() == c);
  auto bad = c;
  bad.transformer.heads = 5;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_NOTHROW(ModelConfig::full_size().validate());
}
