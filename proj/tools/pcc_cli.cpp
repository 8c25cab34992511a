#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcc/data/dataset.hpp"
#include "pcc/diff/checkpoint.hpp"
#include "pcc/error.hpp"
#include "pcc/harness/ablate.hpp"
#include "pcc/harness/complete.hpp"
#include "pcc/harness/evaluate.hpp"
#include "pcc/harness/gradcheck.hpp"
#include "pcc/harness/train.hpp"
#include "pcc/simd/kernels.hpp"

namespace {

using namespace pcc;

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

void log_line(const std::string& s) { std::cerr << s << std::endl; }

// Prints "error <Kind>: message" on one line.
int report(std::string_view kind, std::string message) {
  for (auto& c : message)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "error " << kind << ": " << message << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point cloud completion: data generation, training, evaluation"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  std::string gen_out, gen_norm = "ours", gen_scale = "desk";
  std::size_t gen_shapes = 200, gen_views = 1;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--shapes", gen_shapes, "Number of training shapes")->required();
  gen->add_option("--views", gen_views, "Views per training shape")->required();
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--norm-mode", gen_norm, "ours|baseline")->check(CLI::IsMember({"ours", "baseline"}));
  gen->add_option("--scale", gen_scale, "desk|full point counts")->check(CLI::IsMember({"desk", "full"}));

  // train
  auto* tr = app.add_subcommand("train", "Train a model");
  std::string tr_data, tr_out, tr_variant = "D", tr_config;
  std::size_t tr_epochs = 30;
  std::uint64_t tr_seed = 0;
  tr->add_option("--data", tr_data, "Dataset directory")->required();
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr->add_option("--variant", tr_variant, "A|B|C|D")->check(CLI::IsMember({"A", "B", "C", "D"}));
  tr->add_option("--epochs", tr_epochs, "Epochs");
  tr->add_option("--seed", tr_seed, "Random seed");
  tr->add_option("--config", tr_config, "JSON config file");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ev_ckpt, ev_data, ev_split = "holdout-views", ev_out;
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--split", ev_split, "train|val|holdout-views|holdout-models")
      ->check(CLI::IsMember({"train", "val", "holdout-views", "holdout-models"}));
  ev->add_option("--out", ev_out, "Report CSV")->required();

  // ablate
  auto* ab = app.add_subcommand("ablate", "Run the architecture and normalization ablations");
  std::string ab_data, ab_out, ab_config;
  std::size_t ab_seeds = 3, ab_epochs = 30;
  ab->add_option("--data", ab_data, "Directory holding ours/ and baseline/ datasets")->required();
  ab->add_option("--out", ab_out, "Output directory")->required();
  ab->add_option("--seeds", ab_seeds, "Seeds per configuration");
  ab->add_option("--epochs", ab_epochs, "Epochs per run");
  ab->add_option("--config", ab_config, "JSON config file");

  // complete
  auto* co = app.add_subcommand("complete", "Complete a partial cloud");
  std::string co_ckpt, co_in, co_out;
  std::size_t co_min = 256;
  co->add_option("--ckpt", co_ckpt, "Checkpoint file")->required();
  co->add_option("--in", co_in, "Input cloud (.pcdc, .xyz, .txt)")->required();
  co->add_option("--out", co_out, "Output cloud")->required();
  co->add_option("--min-points", co_min, "Minimum input size");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  std::string gc_op;
  std::size_t gc_trials = 10;
  std::uint64_t gc_seed = 0;
  gc->add_option("--op", gc_op, "Single op to check");
  gc->add_option("--trials", gc_trials, "Random trials per op");
  gc->add_option("--seed", gc_seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("BadArgument", e.what());
  }

  try {
    if (*gen) {
      data::GenOptions o;
      o.shapes = gen_shapes;
      o.views = gen_views;
      o.seed = gen_seed;
      o.norm_mode = data::parse_norm_mode(gen_norm);
      o.data = gen_scale == "full" ? data::DataConfig::full_size() : data::DataConfig::desk();
      const auto m = data::generate_dataset(gen_out, o);
      for (const auto s : {data::Split::Train, data::Split::Val, data::Split::HoldoutViews,
                           data::Split::HoldoutModels})
        std::printf("%-15s %zu\n", data::split_name(s).c_str(), m.split(s).size());
    } else if (*tr) {
      harness::TrainConfig cfg;
      if (!tr_config.empty()) harness::apply_config_json(cfg, read_json(tr_config));
      if (tr->count("--variant")) cfg.variant = model::parse_variant(tr_variant);
      if (tr->count("--epochs")) cfg.epochs = tr_epochs;
      if (tr->count("--seed")) cfg.seed = tr_seed;
      cfg.data_dir = tr_data;
      cfg.out_dir = tr_out;
      cfg.log = log_line;
      const auto r = harness::train(cfg);
      std::printf("run_dir %s\ncheckpoint %s\nbest_epoch %zu\nbest_val_cd_x1000 %.6f\n",
                  r.run_dir.c_str(), r.checkpoint.c_str(), r.best_epoch, r.best_val_cd);
    } else if (*ev) {
      const auto rep = harness::evaluate(diff::read_checkpoint(ev_ckpt), ev_data,
                                         data::parse_split(ev_split));
      harness::write_report(ev_out, rep);
      std::printf("samples %zu\nmean_cd_pc_x1000 %.6f\nmean_cd_ps_x1000 %.6f\n"
                  "mean_cd_partial_x1000 %.6f\nruntime_s %.3f\n",
                  rep.rows.size(), rep.mean_pc, rep.mean_ps, rep.mean_partial,
                  rep.runtime_s);
    } else if (*ab) {
      harness::AblateOptions o;
      if (!ab_config.empty()) {
        harness::TrainConfig base;
        harness::apply_config_json(base, read_json(ab_config));
        o.model = base.model;
        o.epochs = base.epochs;
        o.batch_size = base.batch_size;
        o.learning_rate = base.learning_rate;
      }
      if (ab->count("--epochs")) o.epochs = ab_epochs;
      o.data_dir = ab_data;
      o.out_dir = ab_out;
      o.seeds = ab_seeds;
      o.log = log_line;
      const auto t = harness::ablate(o);
      std::cout << harness::architecture_csv(t) << '\n' << harness::normalization_csv(t);
    } else if (*co) {
      harness::complete_file(co_ckpt, co_in, co_out, {co_min});
    } else if (*gc) {
      harness::GradCheckOptions o;
      o.trials = gc_trials;
      o.seed = gc_seed;
      bool all_ok = true;
      const auto ops = gc_op.empty() ? harness::gradcheck_ops() : std::vector<std::string>{gc_op};
      std::printf("%-18s %6s %8s %8s %12s %12s  %s\n", "op", "trials", "checked",
                  "kinks", "max_abs", "max_rel", "status");
      for (const auto& op : ops) {
        const auto r = harness::gradcheck(op, o);
        all_ok = all_ok && r.ok();
        std::printf("%-18s %6zu %8zu %8zu %12.3e %12.3e  %s\n", op.c_str(), r.trials,
                    r.coords_checked, r.kinks_rejected, r.max_abs_err, r.max_rel_err,
                    r.ok() ? "ok" : "FAIL");
      }
      if (!all_ok) return report("GradientMismatch", "finite differences disagree");
    }
  } catch (const ParseError& e) {
    return report(error_kind_name(e.kind()), e.what());
  } catch (const Error& e) {
    return report(error_kind_name(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report("IoError", e.what());
  } catch (const std::exception& e) {
    return report("InternalError", e.what());
  }
  return 0;
}
