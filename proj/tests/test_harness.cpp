#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pcc/data/cloud_io.hpp"
#include "pcc/data/dataset.hpp"
#include "pcc/diff/checkpoint.hpp"
#include "pcc/error.hpp"
#include "pcc/harness/complete.hpp"
#include "pcc/harness/evaluate.hpp"
#include "pcc/harness/loss.hpp"
#include "pcc/harness/train.hpp"

using namespace pcc;
using namespace pcc::harness;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::BadArgument;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A small dataset for the toy network, generated once per process.
const fs::path& toy_data() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "pcc_harness_data";
    fs::remove_all(d);
    data::GenOptions opt;
    opt.shapes = 10;
    opt.views = 1;
    opt.seed = 9;
    opt.data = {1200, 16, 48, 32, 16};
    data::generate_dataset(d, opt);
    return d;
  }();
  return dir;
}

TrainConfig toy_train(const fs::path& out) {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 4;
  c.data_dir = toy_data();
  c.out_dir = out;
  c.model = model::ModelConfig::toy();
  return c;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pcc_harness_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args, std::string* err = nullptr) {
  const auto log = fs::temp_directory_path() / "pcc_cli_stderr.txt";
  const std::string cmd = std::string(PCC_CLI) + " " + args + " 2> " + log.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("loss examples") {
  const PointCloud a(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}});
  CHECK(completion_loss(a, a, a) == 0.0);
  const PointCloud b(std::vector<Vec3>{{0, 0, 1}});
  // Single-point clouds: each chamfer term is 2 * d^2.
  const PointCloud c(std::vector<Vec3>{{0, 0, 0}});
  CHECK(completion_loss(c, b, c) == doctest::Approx(2.0));
  CHECK(completion_loss(b, b, c) == doctest::Approx(4.0));
  CHECK(kind_of([&] { completion_loss(PointCloud{}, a, a); }) == ErrorKind::EmptyCloud);
}

TEST_CASE("padding by repetition") {
  const PointCloud a(std::vector<Vec3>{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  const auto p = pad_by_repetition(a, 7);
  REQUIRE(p.size() == 7);
  CHECK(p[3] == a[0]);
  CHECK(p[6] == a[0]);
  CHECK(p[5] == a[2]);
}

TEST_CASE("zero learning rate leaves weights bit-equal") {
  auto cfg = toy_train(scratch("lr0"));
  cfg.learning_rate = 0.0;
  cfg.epochs = 1;
  const auto r = train(cfg);
  model::CompletionNet<float> fresh(cfg.model, cfg.seed);
  const auto ck = diff::read_checkpoint(r.run_dir / "final.ckpt");
  std::size_t compared = 0, trainable = 0;
  for (const auto& p : fresh.params().all()) {
    if (!p.trainable) continue;
    ++trainable;
    for (const auto& t : ck.tensors)
      if (t.name == p.name) {
        CHECK(t.value == p.value);
        ++compared;
      }
  }
  CHECK(compared == trainable);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("training is deterministic and writes its artifacts") {
  const auto cfg_a = toy_train(scratch("det_a"));
  const auto cfg_b = toy_train(scratch("det_b"));
  const auto a = train(cfg_a);
  const auto b = train(cfg_b);
  CHECK(a.run_dir.filename() == b.run_dir.filename());
  for (const char* f : {"config.json", "loss_curve.csv", "best.ckpt", "final.ckpt"}) {
    REQUIRE(fs::exists(a.run_dir / f));
    CHECK(slurp(a.run_dir / f) == slurp(b.run_dir / f));
  }
  REQUIRE(a.curve.size() == 2);
  for (const auto& e : a.curve) {
    CHECK(std::isfinite(e.train_loss));
    CHECK(e.val_cd > 0);
  }

  auto other = toy_train(scratch("det_c"));
  other.seed = 1;
  const auto c = train(other);
  CHECK(c.run_dir.filename() != a.run_dir.filename());
  CHECK(slurp(c.run_dir / "final.ckpt") != slurp(a.run_dir / "final.ckpt"));

  // Evaluation is deterministic too, and its mean row matches the rows.
  const auto ck = diff::read_checkpoint(a.checkpoint);
  const auto r1 = evaluate(ck, toy_data(), data::Split::HoldoutViews);
  const auto r2 = evaluate(ck, toy_data(), data::Split::HoldoutViews);
  CHECK(report_csv(r1) == report_csv(r2));
  CHECK(r1.rows.size() == 10);
  const auto re = recompute_means(r1);
  CHECK(re.mean_pc == r1.mean_pc);
  CHECK(re.mean_partial == r1.mean_partial);
  for (const auto& row : r1.rows) {
    CHECK(row.cd_partial > 0);
    CHECK(row.cd_pc > 0);
  }
  const auto csv = report_csv(r1);
  CHECK(csv.rfind("id,split,seed,cd_pc_x1000,cd_ps_x1000,cd_partial_x1000\n", 0) == 0);
  CHECK(csv.find("\nmean,") != std::string::npos);

  RunInfo info;
  const auto net = load_network(ck, &info);
  CHECK(info.model == cfg_a.model);
  CHECK(info.seed == 0);

  for (const auto& d : {cfg_a.out_dir, cfg_b.out_dir, other.out_dir}) fs::remove_all(d);
}

TEST_CASE("training input errors") {
  auto cfg = toy_train(scratch("bad"));
  cfg.data_dir = fs::temp_directory_path() / "pcc_no_dataset_here";
  CHECK(kind_of([&] { train(cfg); }) == ErrorKind::DatasetMissing);
  auto wide = toy_train(scratch("bad"));
  wide.model = model::ModelConfig::desk();
  CHECK(kind_of([&] { train(wide); }) == ErrorKind::CountMismatch);
  CHECK(kind_of([] { parse_checkpoint_config("{}"); }) == ErrorKind::ConfigMismatch);
  TrainConfig c;
  CHECK(kind_of([&] { apply_config_json(c, nlohmann::json{{"epochs", "many"}}); }) ==
        ErrorKind::BadArgument);
  apply_config_json(c, nlohmann::json{{"epochs", 3}, {"variant", "A"}});
  CHECK(c.epochs == 3);
  CHECK(c.variant == model::Variant::A);
}

TEST_CASE("complete keeps the input and adds the missing part") {
  const auto cfg = model::ModelConfig::toy();
  model::CompletionNet<float> net(cfg, 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-2, 2);
  CompleteOptions opt;
  opt.min_points = 8;
  for (const std::size_t n : {std::size_t(10), std::size_t(16), std::size_t(40)}) {
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = {u(rng) + 5, u(rng), u(rng) * 0.3f};
    const PointCloud in(pts);
    const auto out = complete_cloud(net, in, opt);
    CHECK(out.size() == cfg.completed_count());
    // Every partial row is an input point, unchanged.
    for (std::size_t i = 0; i < cfg.input_points; ++i)
      CHECK(std::find(pts.begin(), pts.end(), out[i]) != pts.end());
    if (n == 16)
      for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == in[i]);
  }
  const PointCloud tiny(std::vector<Vec3>{{0, 0, 0}, {1, 1, 1}});
  CHECK(kind_of([&] { complete_cloud(net, tiny, opt); }) == ErrorKind::TooFewPoints);
}

TEST_CASE("command line errors name their class") {
  std::string err;
  CHECK(run_cli("eval --ckpt /nonexistent.ckpt --data /nonexistent --out /tmp/x.csv", &err) == 1);
  CHECK(err.rfind("error IoError", 0) == 0);
  CHECK(err.find('\n') == err.size() - 1);

  const auto dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ckpt") << "nope, not a checkpoint";
  CHECK(run_cli("complete --ckpt " + (dir / "bad.ckpt").string() + " --in x.xyz --out y.xyz",
                &err) == 1);
  CHECK(err.rfind("error BadMagic", 0) == 0);

  std::ofstream(dir / "bad.xyz") << "1 2 3\n4 5\n";
  CHECK(run_cli("gradcheck --op no_such_op", &err) == 1);
  CHECK(err.rfind("error BadArgument", 0) == 0);
  CHECK(run_cli("train --data " + (dir / "none").string() + " --out " + dir.string(), &err) == 1);
  CHECK(err.rfind("error DatasetMissing", 0) == 0);
  CHECK(run_cli("gradcheck --op relu --trials 2") == 0);
  fs::remove_all(dir);
}
