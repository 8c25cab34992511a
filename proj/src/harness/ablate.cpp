#include "pcc/harness/ablate.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include "pcc/error.hpp"
#include "pcc/harness/evaluate.hpp"
#include "pcc/harness/train.hpp"

namespace pcc::harness {
namespace fs = std::filesystem;
using model::Variant;
using data::NormMode;

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::BadArgument, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<const AblationRun*> AblationTable::select(Variant v, NormMode n) const {
  std::vector<const AblationRun*> out;
  for (const auto& r : runs)
    if (r.variant == v && r.norm == n) out.push_back(&r);
  return out;
}

double AblationTable::median_cd(Variant v, NormMode n) const {
  std::vector<double> cds;
  for (const auto* r : select(v, n)) cds.push_back(r->holdout_cd);
  return median(cds);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path.string());
  f << text;
}

AblationRun run_one(const AblateOptions& opts, Variant v, NormMode n,
                    std::uint64_t seed) {
  const fs::path data_dir = opts.data_dir / data::norm_mode_name(n);
  TrainConfig cfg;
  cfg.epochs = opts.epochs;
  cfg.batch_size = opts.batch_size;
  cfg.learning_rate = opts.learning_rate;
  cfg.seed = seed;
  cfg.variant = v;
  cfg.model = opts.model;
  cfg.data_dir = data_dir;
  cfg.out_dir = opts.out_dir / "runs";
  if (opts.log) {
    const std::string tag = std::string(1, model::variant_letter(v)) + "/" +
                            data::norm_mode_name(n) + "/s" + std::to_string(seed);
    cfg.log = [&opts, tag](const std::string& m) { opts.log(tag + "  " + m); };
  }
  const auto start = std::chrono::steady_clock::now();
  const TrainResult tr = train(cfg);
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  const EvalReport rep = evaluate(diff::read_checkpoint(tr.checkpoint), data_dir,
                                  data::Split::HoldoutViews);
  write_report(tr.run_dir / "holdout-views.csv", rep);

  AblationRun run;
  run.variant = v;
  run.norm = n;
  run.seed = seed;
  run.first_train_loss = tr.curve.front().train_loss;
  run.final_train_loss = tr.curve.back().train_loss;
  run.holdout_cd = rep.mean_pc;
  run.holdout_partial = rep.mean_partial;
  run.checkpoint = tr.checkpoint;
  run.train_seconds = took.count();
  return run;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

AblationTable ablate(const AblateOptions& opts) {
  if (opts.seeds == 0) fail(ErrorKind::BadArgument, "need at least one seed");
  for (const auto n : {NormMode::Ours, NormMode::Baseline}) {
    const fs::path dir = opts.data_dir / data::norm_mode_name(n);
    const auto m = data::load_manifest(dir);
    if (m.norm_mode != n)
      fail(ErrorKind::DatasetMissing,
           dir.string() + " holds a " + data::norm_mode_name(m.norm_mode) +
               "-normalized dataset");
  }
  const auto ours = data::load_manifest(opts.data_dir / "ours");
  const auto base = data::load_manifest(opts.data_dir / "baseline");
  if (ours.seed != base.seed || ours.shapes != base.shapes || ours.views != base.views)
    fail(ErrorKind::DatasetMissing,
         "ours/ and baseline/ datasets were generated with different settings");

  fs::create_directories(opts.out_dir);
  AblationTable t;
  for (const auto v : {Variant::A, Variant::B, Variant::C, Variant::D})
    for (std::size_t s = 0; s < opts.seeds; ++s)
      t.runs.push_back(run_one(opts, v, NormMode::Ours, opts.first_seed + s));
  for (std::size_t s = 0; s < opts.seeds; ++s)
    t.runs.push_back(run_one(opts, Variant::D, NormMode::Baseline, opts.first_seed + s));

  write_text(opts.out_dir / "runs.csv", runs_csv(t));
  write_text(opts.out_dir / "architecture.csv", architecture_csv(t));
  write_text(opts.out_dir / "normalization.csv", normalization_csv(t));
  return t;
}

std::string architecture_csv(const AblationTable& t) {
  std::string out = "model,offset_attention,skip_connections,median_holdout_cd_x1000\n";
  for (const auto v : {Variant::A, Variant::B, Variant::C, Variant::D}) {
    model::ModelConfig m;
    m.set_variant(v);
    out += std::string(1, model::variant_letter(v)) + "," +
           (m.transformer.offset_attention ? "1" : "0") + "," +
           (m.transformer.skip_connections ? "1" : "0") + "," +
           fmt(t.median_cd(v, NormMode::Ours)) + "\n";
  }
  return out;
}

std::string normalization_csv(const AblationTable& t) {
  std::string out = "norm,median_holdout_cd_x1000\n";
  out += "baseline," + fmt(t.median_cd(Variant::D, NormMode::Baseline)) + "\n";
  out += "ours," + fmt(t.median_cd(Variant::D, NormMode::Ours)) + "\n";
  return out;
}

std::string runs_csv(const AblationTable& t) {
  std::string out =
      "model,norm,seed,first_train_loss,final_train_loss,holdout_cd_x1000,"
      "holdout_partial_cd_x1000\n";
  for (const auto& r : t.runs)
    out += std::string(1, model::variant_letter(r.variant)) + "," +
           data::norm_mode_name(r.norm) + "," + std::to_string(r.seed) + "," +
           fmt(r.first_train_loss) + "," + fmt(r.final_train_loss) + "," +
           fmt(r.holdout_cd) + "," + fmt(r.holdout_partial) + "\n";
  return out;
}

}  // namespace pcc::harness
