#include "pcc/harness/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>

#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"
#include "pcc/harness/loss.hpp"
#include "pcc/model/embed.hpp"
#include "pcc/model/foldgen.hpp"
#include "pcc/model/network.hpp"
#include "pcc/model/oaformer.hpp"

namespace pcc::harness {
namespace {

using diff::Mode;
using diff::Parameter;
using diff::ParamStore;
using diff::Tape;
using diff::Tensor;
using diff::Var;
using D = double;

// One randomized instance: every differentiable input is a trainable
// parameter of `store`, so analytic gradients land in Parameter::grad.
struct Problem {
  std::unique_ptr<ParamStore<D>> store;
  std::unique_ptr<model::CompletionNet<D>> net;
  Mode mode = Mode::Train;
  std::size_t max_coords = 0;
  std::function<Var<D>(Tape<D>&)> loss;
  // Keeps captured model pieces alive.
  std::vector<std::shared_ptr<void>> keep;

  ParamStore<D>& params() { return net ? net->params() : *store; }
};

struct Rand {
  std::mt19937_64 rng;
  std::uniform_real_distribution<D> u{-1.0, 1.0};
  D operator()() { return u(rng); }
};

Parameter<D>& input(ParamStore<D>& s, Rand& r, const std::string& name,
                    std::size_t rows, std::size_t cols) {
  auto& p = s.constant(name, rows, cols, 0.0, true);
  for (auto& v : p.value.data()) v = r();
  return p;
}

PointCloud random_cloud(Rand& r, std::size_t n) {
  std::vector<Vec3> pts(n);
  for (auto& p : pts)
    p = {static_cast<float>(r()), static_cast<float>(r()), static_cast<float>(r())};
  return PointCloud(std::move(pts));
}

// Contracts an arbitrary output with fixed random weights so every output
// element receives a distinct upstream gradient.
Var<D> project(Tape<D>& t, Var<D> out, const std::vector<D>& w) {
  const auto flat = diff::reshape(out, 1, out.size());
  return diff::matmul(flat, t.constant(Tensor<D>({w.size(), 1}, w)));
}

std::vector<D> weights(Rand& r, std::size_t n) {
  std::vector<D> w(n);
  for (auto& v : w) v = r();
  return w;
}

using Builder = std::function<Problem(Rand&)>;

// Unary or n-ary op over leaf inputs of the given shapes.
Builder simple(std::vector<std::pair<std::size_t, std::size_t>> shapes,
               std::size_t out_size,
               std::function<Var<D>(Tape<D>&, std::vector<Var<D>>&)> f,
               Mode mode = Mode::Train) {
  return [=](Rand& r) {
    Problem p;
    p.store = std::make_unique<ParamStore<D>>();
    p.mode = mode;
    std::vector<Parameter<D>*> in;
    for (std::size_t i = 0; i < shapes.size(); ++i)
      in.push_back(&input(*p.store, r, "x" + std::to_string(i), shapes[i].first,
                          shapes[i].second));
    const auto w = weights(r, out_size);
    p.loss = [in, w, f](Tape<D>& t) {
      std::vector<Var<D>> vars;
      for (auto* q : in) vars.push_back(t.parameter(*q));
      return project(t, f(t, vars), w);
    };
    return p;
  };
}

Builder batchnorm_builder(Mode mode) {
  return [mode](Rand& r) {
    Problem p;
    p.store = std::make_unique<ParamStore<D>>();
    p.mode = mode;
    auto* x = &input(*p.store, r, "x", 6, 4);
    auto* gamma = &input(*p.store, r, "gamma", 1, 4);
    auto* beta = &input(*p.store, r, "beta", 1, 4);
    auto* mean = &p.store->constant("mean", 1, 4, 0.0, false);
    auto* var = &p.store->constant("var", 1, 4, 1.0, false);
    for (auto& v : mean->value.data()) v = 0.3 * r();
    for (auto& v : var->value.data()) v = 1.0 + 0.5 * r();
    const auto w = weights(r, 24);
    p.loss = [=](Tape<D>& t) {
      return project(t,
                     diff::batchnorm(t.parameter(*x), t.parameter(*gamma),
                                     t.parameter(*beta), *mean, *var),
                     w);
    };
    return p;
  };
}

Builder edgeconv_builder() {
  return [](Rand& r) {
    Problem p;
    p.store = std::make_unique<ParamStore<D>>(r.rng());
    const PointCloud cloud = random_cloud(r, 16);
    auto regions = std::make_shared<model::LocalRegions>(model::build_regions(cloud, 3, 5));
    auto graph = std::make_shared<model::EdgeGraph>(model::build_edge_graph(*regions, cloud, 2));
    auto* feats = &input(*p.store, r, "features", graph->member_point.size(), 3);
    auto layer = std::make_shared<model::Linear<D>>(*p.store, "edge", 6, 4);
    const auto w = weights(r, graph->member_point.size() * 4);
    p.keep = {regions, graph, layer};
    p.loss = [=](Tape<D>& t) {
      return project(t, model::edgeconv_layer(t, t.parameter(*feats), *graph, *layer), w);
    };
    return p;
  };
}

Builder attention_builder(bool offset, bool cross) {
  return [=](Rand& r) {
    Problem p;
    p.store = std::make_unique<ParamStore<D>>(r.rng());
    auto block = std::make_shared<model::AttentionBlock<D>>(*p.store, "attn", 8, 2, offset);
    auto* f = &input(*p.store, r, "f", 16, 8);
    auto* ctx = cross ? &input(*p.store, r, "ctx", 12, 8) : nullptr;
    const auto w = weights(r, 128);
    p.keep = {block};
    p.loss = [=](Tape<D>& t) {
      std::optional<Var<D>> c;
      if (ctx) c = t.parameter(*ctx);
      return project(t, (*block)(t, t.parameter(*f), c), w);
    };
    return p;
  };
}

Builder fold_builder() {
  return [](Rand& r) {
    Problem p;
    p.store = std::make_unique<ParamStore<D>>(r.rng());
    auto gen = std::make_shared<model::FoldingGenerator<D>>(
        *p.store, model::FoldConfig{3, 6, 6}, 5);
    auto* dec = &input(*p.store, r, "decoded", 4, 5);
    auto* sparse = &input(*p.store, r, "sparse", 4, 3);
    const auto w = weights(r, 36);
    p.keep = {gen};
    p.loss = [=](Tape<D>& t) {
      return project(t, gen->fold(t, t.parameter(*dec), t.parameter(*sparse)), w);
    };
    return p;
  };
}

Builder loss_builder() {
  return [](Rand& r) {
    Problem p;
    p.store = std::make_unique<ParamStore<D>>();
    auto* ps = &input(*p.store, r, "ps", 4, 3);
    auto* pc = &input(*p.store, r, "pc", 6, 3);
    auto gt = std::make_shared<Tensor<D>>(model::cloud_tensor<D>(random_cloud(r, 8)));
    p.keep = {gt};
    p.loss = [=](Tape<D>& t) {
      return completion_loss(t.parameter(*ps), t.parameter(*pc), t.constant(*gt));
    };
    return p;
  };
}

Builder network_builder() {
  return [](Rand& r) {
    Problem p;
    const auto cfg = model::ModelConfig::toy();
    p.net = std::make_unique<model::CompletionNet<D>>(cfg, r.rng());
    const PointCloud raw = random_cloud(r, cfg.input_points);
    auto pp = std::make_shared<PointCloud>(normalize(raw, compute_norm_params(raw)));
    auto gt = std::make_shared<Tensor<D>>(
        model::cloud_tensor<D>(random_cloud(r, cfg.completed_count())));
    auto* net = p.net.get();
    p.keep = {pp, gt};
    p.loss = [=](Tape<D>& t) {
      const auto out = net->forward(t, *pp);
      return completion_loss(out.sparse[0], out.out[0].completed, t.constant(*gt));
    };
    return p;
  };
}

const std::vector<std::pair<std::string, Builder>>& registry() {
  using V = std::vector<Var<D>>;
  static const std::vector<std::pair<std::string, Builder>> ops = {
      {"matmul", simple({{3, 4}, {4, 2}}, 6, [](Tape<D>&, V& v) { return diff::matmul(v[0], v[1]); })},
      {"matmul_nt", simple({{3, 4}, {2, 4}}, 6, [](Tape<D>&, V& v) { return diff::matmul_nt(v[0], v[1]); })},
      {"linear", simple({{5, 3}, {3, 4}, {1, 4}}, 20, [](Tape<D>&, V& v) { return diff::linear(v[0], v[1], v[2]); })},
      {"add", simple({{3, 4}, {3, 4}}, 12, [](Tape<D>&, V& v) { return diff::add(v[0], v[1]); })},
      {"sub", simple({{3, 4}, {3, 4}}, 12, [](Tape<D>&, V& v) { return diff::sub(v[0], v[1]); })},
      {"scale", simple({{3, 4}}, 12, [](Tape<D>&, V& v) { return diff::scale(v[0], 0.7); })},
      {"add_row", simple({{3, 4}, {1, 4}}, 12, [](Tape<D>&, V& v) { return diff::add_row(v[0], v[1]); })},
      {"relu", simple({{4, 5}}, 20, [](Tape<D>&, V& v) { return diff::relu(v[0]); })},
      {"softmax_rows", simple({{3, 5}}, 15, [](Tape<D>&, V& v) { return diff::softmax_rows(v[0]); })},
      {"batchnorm_train", batchnorm_builder(Mode::Train)},
      {"batchnorm_eval", batchnorm_builder(Mode::Eval)},
      {"max_rows", simple({{5, 4}}, 4, [](Tape<D>&, V& v) { return diff::max_rows(v[0]); })},
      {"segment_max", simple({{6, 3}}, 6, [](Tape<D>&, V& v) { return diff::segment_max(v[0], 3); })},
      {"concat_cols", simple({{3, 2}, {3, 4}}, 18, [](Tape<D>&, V& v) { return diff::concat_cols<D>(v); })},
      {"concat_rows", simple({{2, 3}, {4, 3}}, 18, [](Tape<D>&, V& v) { return diff::concat_rows<D>(v); })},
      {"slice_cols", simple({{3, 6}}, 9, [](Tape<D>&, V& v) { return diff::slice_cols(v[0], 1, 3); })},
      {"gather_rows", simple({{4, 3}}, 15, [](Tape<D>&, V& v) {
         static const std::uint32_t idx[] = {2, 0, 2, 3, 1};
         return diff::gather_rows<D>(v[0], idx);
       })},
      {"reshape", simple({{3, 4}}, 12, [](Tape<D>&, V& v) { return diff::reshape(v[0], 2, 6); })},
      {"sum", simple({{3, 4}}, 1, [](Tape<D>&, V& v) { return diff::sum(v[0]); })},
      {"chamfer_l2", simple({{7, 3}, {9, 3}}, 1, [](Tape<D>&, V& v) { return diff::chamfer_l2(v[0], v[1]); })},
      {"edgeconv", edgeconv_builder()},
      {"self_attention", attention_builder(false, false)},
      {"offset_attention", attention_builder(true, false)},
      {"cross_attention", attention_builder(true, true)},
      {"folding", fold_builder()},
      {"completion_loss", loss_builder()},
      {"network", network_builder()},
  };
  return ops;
}

struct Eval {
  D value;
  std::uint64_t kinks;
};

Eval evaluate(Problem& p) {
  Tape<D> t(p.mode, false);
  t.set_track_kinks(true);
  const auto l = p.loss(t);
  return {l.value()[0], t.kink_signature()};
}

}  // namespace

std::vector<std::string> gradcheck_ops() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

GradCheckResult gradcheck(const std::string& op, const GradCheckOptions& opts) {
  const auto& reg = registry();
  const auto it = std::find_if(reg.begin(), reg.end(),
                               [&](const auto& e) { return e.first == op; });
  if (it == reg.end()) fail(ErrorKind::BadArgument, "unknown gradcheck op '" + op + "'");

  GradCheckResult res;
  res.op = op;
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : op) h = (h ^ c) * 1099511628211ull;
  Rand rand{std::mt19937_64(opts.seed ^ h)};
  const std::size_t max_attempts = 5;

  for (std::size_t trial = 0; trial < opts.trials; ++trial) {
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
      Problem p = it->second(rand);
      auto& store = p.params();
      std::vector<Parameter<D>*> inputs;
      for (auto& q : store.all())
        if (q.trainable) inputs.push_back(&q);

      // Analytic gradient.
      for (auto* q : inputs) q->grad = Tensor<D>();
      std::uint64_t base_kinks;
      {
        Tape<D> t(p.mode, true);
        t.set_track_kinks(true);
        const auto l = p.loss(t);
        base_kinks = t.kink_signature();
        t.backward(l);
      }

      std::vector<std::pair<Parameter<D>*, std::size_t>> coords;
      for (auto* q : inputs)
        for (std::size_t i = 0; i < q->value.size(); ++i) coords.push_back({q, i});
      const std::size_t cap = opts.max_coords ? opts.max_coords : p.max_coords;
      if (cap && coords.size() > cap) {
        std::shuffle(coords.begin(), coords.end(), rand.rng);
        coords.resize(cap);
      }

      std::size_t checked = 0, rejected = 0, failed = 0, truncation = 0;
      double max_abs = 0.0, max_rel = 0.0;
      std::string worst;
      for (const auto& [q, i] : coords) {
        const D x0 = q->value[i];
        q->value[i] = x0 + opts.step;
        const Eval plus = evaluate(p);
        q->value[i] = x0 - opts.step;
        const Eval minus = evaluate(p);
        q->value[i] = x0;
        if (plus.kinks != base_kinks || minus.kinks != base_kinks) {
          ++rejected;
          continue;
        }
        const D numeric = (plus.value - minus.value) / (2 * opts.step);
        const D analytic = q->grad.size() ? q->grad[i] : 0.0;
        const double err = std::abs(numeric - analytic);
        const double mag = std::max(std::abs(numeric), std::abs(analytic));
        ++checked;
        max_abs = std::max(max_abs, err);
        if (err > opts.abs_tol) {
          if (err / mag > max_rel) {
            max_rel = err / mag;
            worst = q->name;
          }
          if (err > opts.rel_tol * mag) {
            ++failed;
            const D fine_h = opts.step / 100;
            q->value[i] = x0 + fine_h;
            const Eval fp = evaluate(p);
            q->value[i] = x0 - fine_h;
            const Eval fm = evaluate(p);
            q->value[i] = x0;
            const D fine = (fp.value - fm.value) / (2 * fine_h);
            const bool trunc = fp.kinks == base_kinks && fm.kinks == base_kinks &&
                               std::abs(fine - analytic) <=
                                   opts.rel_tol * std::max(std::abs(fine), std::abs(analytic));
            if (trunc) ++truncation;
            if (opts.on_failure) {
              char buf[256];
              std::snprintf(buf, sizeof buf,
                            "%s %s[%zu] analytic %.9e numeric %.9e numeric(h/100) %.9e",
                            op.c_str(), q->name.c_str(), i, analytic, numeric, fine);
              opts.on_failure(buf);
            }
          }
        }
      }

      // Mostly kink-adjacent: draw a fresh instance instead.
      if (checked < std::max<std::size_t>(1, coords.size() / 2) &&
          attempt + 1 < max_attempts) {
        res.kinks_rejected += coords.size();
        continue;
      }
      res.trials += 1;
      res.coords_checked += checked;
      res.kinks_rejected += rejected;
      res.failures += failed;
      res.truncation_failures += truncation;
      res.max_abs_err = std::max(res.max_abs_err, max_abs);
      if (max_rel > res.max_rel_err) {
        res.max_rel_err = max_rel;
        res.worst = worst;
      }
      break;
    }
  }
  return res;
}

}  // namespace pcc::harness
