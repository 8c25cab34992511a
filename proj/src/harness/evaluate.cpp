#include "pcc/harness/evaluate.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "pcc/error.hpp"
#include "pcc/harness/train.hpp"

namespace pcc::harness {
namespace fs = std::filesystem;

PointCloud pad_by_repetition(const PointCloud& partial, std::size_t count) {
  if (partial.empty()) fail(ErrorKind::EmptyCloud, "cannot pad an empty cloud");
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(partial[i % partial.size()]);
  return PointCloud(std::move(pts));
}

EvalReport evaluate(const model::CompletionNet<float>& net,
                    const std::vector<data::LoadedSample>& samples) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t z = net.config().completed_count();
  EvalReport r;
  r.rows.reserve(samples.size());
  for (const auto& s : samples) {
    diff::Tape<float> tape(diff::Mode::Eval, false);
    const auto out = net.forward(tape, s.partial);
    EvalRow row;
    row.id = s.record.id;
    row.cd_pc = 1000.0 * chamfer_l2(model::to_cloud(out.out[0].completed.value()), s.gt);
    row.cd_ps = 1000.0 * chamfer_l2(model::to_cloud(out.sparse[0].value()), s.gt);
    row.cd_partial = 1000.0 * chamfer_l2(pad_by_repetition(s.partial, z), s.gt);
    r.rows.push_back(std::move(row));
  }
  r = recompute_means(std::move(r));
  r.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

EvalReport evaluate(const diff::Checkpoint& ckpt, const fs::path& data_dir,
                    data::Split split) {
  RunInfo info;
  const auto net = load_network(ckpt, &info);
  const auto manifest = data::load_manifest(data_dir);
  if (manifest.data.input_points != info.model.input_points)
    fail(ErrorKind::ConfigMismatch,
         "checkpoint expects " + std::to_string(info.model.input_points) +
             " input points, dataset has " +
             std::to_string(manifest.data.input_points));
  const auto samples = data::load_split(data_dir, manifest, split);
  if (samples.empty())
    fail(ErrorKind::DatasetMissing,
         "split " + data::split_name(split) + " is empty in " + data_dir.string());
  EvalReport r = evaluate(*net, samples);
  r.split = data::split_name(split);
  r.seed = info.seed;
  return r;
}

EvalReport recompute_means(EvalReport r) {
  double pc = 0.0, ps = 0.0, pp = 0.0;
  for (const auto& row : r.rows) {
    pc += row.cd_pc;
    ps += row.cd_ps;
    pp += row.cd_partial;
  }
  const double n = r.rows.empty() ? 1.0 : static_cast<double>(r.rows.size());
  r.mean_pc = pc / n;
  r.mean_ps = ps / n;
  r.mean_partial = pp / n;
  return r;
}

std::string report_csv(const EvalReport& r) {
  std::string out = "id,split,seed,cd_pc_x1000,cd_ps_x1000,cd_partial_x1000\n";
  char buf[256];
  auto line = [&](const std::string& id, double a, double b, double c) {
    std::snprintf(buf, sizeof buf, "%s,%s,%llu,%.17g,%.17g,%.17g\n", id.c_str(),
                  r.split.c_str(), static_cast<unsigned long long>(r.seed), a, b, c);
    out += buf;
  };
  for (const auto& row : r.rows) line(row.id, row.cd_pc, row.cd_ps, row.cd_partial);
  line("mean", r.mean_pc, r.mean_ps, r.mean_partial);
  return out;
}

void write_report(const fs::path& path, const EvalReport& r) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path.string());
  f << report_csv(r);
}

}  // namespace pcc::harness
