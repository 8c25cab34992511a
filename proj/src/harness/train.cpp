#include "pcc/harness/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "pcc/diff/ops.hpp"
#include "pcc/error.hpp"
#include "pcc/harness/evaluate.hpp"
#include "pcc/harness/loss.hpp"

namespace pcc::harness {
namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path.string());
  f << text;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void to_json(nlohmann::json& j, const TrainConfig& c) {
  model::ModelConfig m = c.model;
  m.set_variant(c.variant);
  j = {{"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"learning_rate", c.learning_rate},
       {"seed", c.seed},
       {"variant", std::string(1, model::variant_letter(c.variant))},
       {"val_every", c.val_every},
       {"model", m}};
}

void apply_config_json(TrainConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("epochs")) j.at("epochs").get_to(c.epochs);
    if (j.contains("batch_size")) j.at("batch_size").get_to(c.batch_size);
    if (j.contains("learning_rate")) j.at("learning_rate").get_to(c.learning_rate);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    if (j.contains("val_every")) j.at("val_every").get_to(c.val_every);
    if (j.contains("model")) j.at("model").get_to(c.model);
    if (j.contains("variant"))
      c.variant = model::parse_variant(j.at("variant").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::BadArgument, std::string("train config: ") + e.what());
  }
}

std::string run_name(const TrainConfig& cfg, const data::Manifest& m) {
  nlohmann::json key = cfg;
  key.erase("seed");
  key["data"] = {{"seed", m.seed},
                 {"norm_mode", data::norm_mode_name(m.norm_mode)},
                 {"shapes", m.shapes},
                 {"views", m.views},
                 {"config", m.data}};
  char buf[64];
  std::snprintf(buf, sizeof buf, "run-%016llx-s%llu",
                static_cast<unsigned long long>(fnv1a(key.dump())),
                static_cast<unsigned long long>(cfg.seed));
  return buf;
}

std::string checkpoint_config(const TrainConfig& cfg, data::NormMode mode) {
  nlohmann::json j = cfg;
  j["norm_mode"] = data::norm_mode_name(mode);
  return j.dump();
}

RunInfo parse_checkpoint_config(const std::string& json_text) {
  RunInfo info;
  try {
    const auto j = nlohmann::json::parse(json_text);
    j.at("model").get_to(info.model);
    j.at("seed").get_to(info.seed);
    if (j.contains("norm_mode"))
      info.norm_mode = data::parse_norm_mode(j.at("norm_mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigMismatch, std::string("checkpoint config: ") + e.what());
  }
  return info;
}

std::unique_ptr<model::CompletionNet<float>> load_network(
    const diff::Checkpoint& ckpt, RunInfo* info) {
  RunInfo ri = parse_checkpoint_config(ckpt.config);
  std::unique_ptr<model::CompletionNet<float>> net;
  try {
    net = std::make_unique<model::CompletionNet<float>>(ri.model, ri.seed);
  } catch (const Error& e) {
    fail(ErrorKind::ConfigMismatch, std::string("checkpoint config: ") + e.what());
  }
  diff::restore(net->params(), ckpt);
  if (info) *info = ri;
  return net;
}

TrainResult train(const TrainConfig& cfg) {
  using clock = std::chrono::steady_clock;
  if (cfg.batch_size == 0 || cfg.epochs == 0)
    fail(ErrorKind::BadArgument, "epochs and batch size must be positive");
  if (!std::isfinite(cfg.learning_rate) || cfg.learning_rate < 0.0)
    fail(ErrorKind::BadArgument, "learning rate must be finite and >= 0");

  const data::Manifest manifest = data::load_manifest(cfg.data_dir);
  const auto train_set = data::load_split(cfg.data_dir, manifest, data::Split::Train);
  if (train_set.empty())
    fail(ErrorKind::DatasetMissing, "no training samples in " + cfg.data_dir.string());
  auto val_set = data::load_split(cfg.data_dir, manifest, data::Split::Val);
  if (val_set.empty()) val_set = train_set;

  model::ModelConfig mc = cfg.model;
  mc.set_variant(cfg.variant);
  if (mc.input_points != manifest.data.input_points)
    fail(ErrorKind::CountMismatch,
         "model expects " + std::to_string(mc.input_points) +
             " input points, dataset has " +
             std::to_string(manifest.data.input_points));

  TrainConfig effective = cfg;
  effective.model = mc;
  TrainResult result;
  result.norm_mode = manifest.norm_mode;
  result.run_dir = cfg.out_dir / run_name(effective, manifest);
  fs::create_directories(result.run_dir);
  const std::string ckpt_config = checkpoint_config(effective, manifest.norm_mode);
  write_text(result.run_dir / "config.json",
             nlohmann::json::parse(ckpt_config).dump(2) + "\n");

  model::CompletionNet<float> net(mc, cfg.seed);
  auto& store = net.params();
  diff::Adam<float> adam({cfg.learning_rate});
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x7261696e5f6f7264ull);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<diff::Tensor<float>> gt_tensors;
  gt_tensors.reserve(train_set.size());
  for (const auto& s : train_set) gt_tensors.push_back(model::cloud_tensor<float>(s.gt));

  std::string curve_csv = "epoch,train_loss,val_cd_x1000\n";
  result.best_val_cd = std::numeric_limits<double>::infinity();
  result.checkpoint = result.run_dir / "best.ckpt";
  const auto t0 = clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<PointCloud> inputs;
      for (std::size_t b = start; b < end; ++b)
        inputs.push_back(train_set[order[b]].partial);
      store.zero_grad();
      diff::Tape<float> tape(diff::Mode::Train, true);
      const auto r = net.forward(tape, inputs);
      diff::Var<float> total;
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t k = b - start;
        const auto gt = tape.constant(gt_tensors[order[b]]);
        const auto loss = completion_loss(r.sparse[k], r.out[k].completed, gt);
        const double l = loss.value()[0];
        if (!std::isfinite(l))
          fail(ErrorKind::DivergedLoss,
               "non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                   train_set[order[b]].record.id + ", step " +
                   std::to_string(adam.steps() + 1));
        loss_sum += l;
        total = k == 0 ? loss : diff::add(total, loss);
      }
      tape.backward(diff::scale(total, 1.0f / static_cast<float>(end - start)));
      adam.step(store);
    }

    EpochStats st;
    st.epoch = epoch;
    st.train_loss = loss_sum / static_cast<double>(order.size());
    if (epoch % std::max<std::size_t>(1, cfg.val_every) == 0 || epoch == cfg.epochs) {
      st.val_cd = evaluate(net, val_set).mean_pc;
      if (st.val_cd < result.best_val_cd) {
        result.best_val_cd = st.val_cd;
        result.best_epoch = epoch;
        diff::write_checkpoint(result.checkpoint, diff::snapshot(store, ckpt_config));
      }
    }
    result.curve.push_back(st);
    curve_csv += std::to_string(epoch) + "," + fmt(st.train_loss) + "," +
                 fmt(st.val_cd) + "\n";
    if (cfg.log) {
      const double secs = std::chrono::duration<double>(clock::now() - t0).count();
      char line[160];
      std::snprintf(line, sizeof line,
                    "epoch %zu/%zu  loss %.6f  val_cd %.4f  (%.1fs)", epoch,
                    cfg.epochs, st.train_loss, st.val_cd, secs);
      cfg.log(line);
    }
  }

  diff::write_checkpoint(result.run_dir / "final.ckpt", diff::snapshot(store, ckpt_config));
  write_text(result.run_dir / "loss_curve.csv", curve_csv);
  return result;
}

}  // namespace pcc::harness
