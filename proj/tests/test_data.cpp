#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pcc/data/cloud_io.hpp"
#include "pcc/data/dataset.hpp"
#include "pcc/data/scan.hpp"
#include "pcc/data/shapes.hpp"
#include "pcc/error.hpp"

using namespace pcc;
using namespace pcc::data;
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

double norm3(double x, double y, double z) { return std::sqrt(x * x + y * y + z * z); }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pcc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("sphere samples lie on the sphere") {
  ShapeSpec s{ShapeKind::Sphere, {0.3}, {}};
  s.pose.translation = {1, -2, 0.5};
  const auto pc = sample_surface(s, 2000, 1);
  CHECK(pc.size() == 2000);
  for (const auto& p : pc.points())
    CHECK(norm3(p.x - 1.0, p.y + 2.0, p.z - 0.5) == doctest::Approx(0.3).epsilon(1e-5));
}

TEST_CASE("box samples lie on faces in proportion to area") {
  const double ex[3] = {0.4, 0.2, 0.1};
  ShapeSpec s{ShapeKind::Box, {ex[0], ex[1], ex[2]}, {}};
  const std::size_t n = 20000;
  const auto pc = sample_surface(s, n, 2);
  std::size_t on_axis[3] = {0, 0, 0};
  for (const auto& p : pc.points()) {
    const double r[3] = {std::abs(p.x) / (ex[0] / 2), std::abs(p.y) / (ex[1] / 2),
                         std::abs(p.z) / (ex[2] / 2)};
    const double m = std::max({r[0], r[1], r[2]});
    CHECK(m == doctest::Approx(1.0).epsilon(1e-5));
    for (int a = 0; a < 3; ++a)
      if (r[a] == m) ++on_axis[a];
  }
  // Faces normal to axis a have area ex[b]*ex[c].
  const double area[3] = {ex[1] * ex[2], ex[0] * ex[2], ex[0] * ex[1]};
  const double total = area[0] + area[1] + area[2];
  for (int a = 0; a < 3; ++a) {
    const double p = area[a] / total;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(double(on_axis[a]) - n * p) < 3 * sigma);
  }
}

TEST_CASE("cylinder area split between caps and side") {
  const double r = 0.1, h = 0.3;
  ShapeSpec s{ShapeKind::Cylinder, {r, h}, {}};
  const std::size_t n = 20000;
  const auto pc = sample_surface(s, n, 3);
  std::size_t caps = 0;
  for (const auto& p : pc.points())
    if (std::abs(std::abs(p.z) - h / 2) < 1e-6) ++caps;
  const double p = 2 * r * r / (2 * r * r + 2 * r * h);
  CHECK(std::abs(double(caps) - n * p) < 3 * std::sqrt(n * p * (1 - p)));
}

TEST_CASE("shape validation") {
  CHECK(kind_of([] { ShapeSpec{ShapeKind::Box, {1, 2}, {}}.validate(); }) == ErrorKind::BadSpec);
  CHECK(kind_of([] { ShapeSpec{ShapeKind::Sphere, {-1}, {}}.validate(); }) == ErrorKind::BadSpec);
  ShapeSpec q{ShapeKind::Sphere, {1}, {}};
  q.pose.rotation = {1, 1, 0, 0};
  CHECK(kind_of([&] { q.validate(); }) == ErrorKind::BadSpec);
  std::mt19937_64 rng(4);
  for (auto k : {ShapeKind::Box, ShapeKind::Sphere, ShapeKind::Cylinder, ShapeKind::Capsule,
                 ShapeKind::Composite}) {
    const auto s = random_shape(k, rng);
    CHECK_NOTHROW(s.validate());
    nlohmann::json j = s;
    CHECK(j.get<ShapeSpec>().dims == s.dims);
    CHECK(parse_shape_kind(shape_kind_name(k)) == k);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  ShapeSpec s{ShapeKind::Capsule, {0.1, 0.2}, {}};
  CHECK(sample_surface(s, 500, 7) == sample_surface(s, 500, 7));
  CHECK(sample_surface(s, 500, 7) != sample_surface(s, 500, 8));
}

TEST_CASE("scan of a single point keeps it") {
  const PointCloud one(std::vector<Vec3>{{0.5f, 0.5f, 0.5f}});
  std::vector<std::uint32_t> kept;
  const auto out = virtual_scan(one, {0.5, 0.5, 5.0}, 64, &kept);
  CHECK(out == one);
  CHECK(kept == std::vector<std::uint32_t>{0});
}

TEST_CASE("scan occludes the farther of two aligned points") {
  const PointCloud two(std::vector<Vec3>{{0, 0, -1}, {0, 0, 1}});
  std::vector<std::uint32_t> kept;
  const auto out = virtual_scan(two, {0, 0, 10}, 64, &kept);
  CHECK(kept == std::vector<std::uint32_t>{1});
  const auto back = virtual_scan(two, {0, 0, -10}, 64, &kept);
  CHECK(kept == std::vector<std::uint32_t>{0});
  CHECK(kind_of([&] { virtual_scan(two, {0, 0, 0.5}); }) == ErrorKind::BadArgument);
}

TEST_CASE("sphere seen from +z shows its upper half") {
  ShapeSpec s{ShapeKind::Sphere, {1.0}, {}};
  const std::pair<std::size_t, std::size_t> setups[] = {{4000, 64}, {20000, 64}, {20000, 128}};
  for (const auto& [n, res] : setups)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto pc = sample_surface(s, n, seed);
      const auto vis = virtual_scan(pc, {0, 0, 3}, res);
      CHECK(vis.size() > 100);
      CHECK(vis.size() < pc.size() / 2);
      float lowest = 1.0f;
      for (const auto& p : vis.points()) lowest = std::min(lowest, p.z);
      INFO(n << " points at " << res);
      CHECK(lowest > -0.2f);
    }
}

TEST_CASE("build_sample contracts") {
  const DataConfig cfg{3000, 128, 256, 64, 16};
  std::mt19937_64 rng(6);
  const auto spec = random_shape(ShapeKind::Box, rng);
  const auto surface = sample_surface(spec, cfg.surface_points, 11);
  std::mt19937_64 cam_rng(1);
  const auto cam = random_camera(surface, cam_rng);
  const auto s = build_sample(spec, cam, 11, cfg, NormMode::Ours);
  CHECK(s.partial.size() == cfg.input_points);
  CHECK(s.gt.size() == cfg.gt_points);
  double maxn = 0;
  for (const auto& p : s.partial.points()) maxn = std::max(maxn, norm3(p.x, p.y, p.z));
  CHECK(maxn <= 1.0 + 1e-6);

  // Both clouds share the partial's frame: denormalizing recovers the surface.
  const auto pd = denormalize(s.partial, s.norm);
  const auto gd = denormalize(s.gt, s.norm);
  for (std::size_t i = 0; i < pd.size(); ++i) {
    const auto& a = pd[i];
    const auto& b = surface[s.partial_source[i]];
    CHECK(norm3(a.x - b.x, a.y - b.y, a.z - b.z) < 1e-5);
  }
  for (std::size_t i = 0; i < gd.size(); i += 7) {
    const auto& a = gd[i];
    const auto& b = surface[s.gt_source[i]];
    CHECK(norm3(a.x - b.x, a.y - b.y, a.z - b.z) < 1e-5);
  }

  // Baseline normalizes the GT on its own, so the two frames disagree.
  const auto base = build_sample(spec, cam, 11, cfg, NormMode::Baseline);
  CHECK(base.partial == s.partial);
  CHECK(chamfer_l2(base.gt, s.gt) > 1e-4);
  // Its own frame is roughly centred; the partial's frame is not.
  const auto own = centroid(base.gt), ours = centroid(s.gt);
  CHECK(norm3(own[0], own[1], own[2]) < 0.05);
  CHECK(norm3(own[0] - ours[0], own[1] - ours[1], own[2] - ours[2]) > 1e-3);

  DataConfig greedy = cfg;
  greedy.input_points = 2900;
  CHECK(kind_of([&] { build_sample(spec, cam, 11, greedy); }) == ErrorKind::InsufficientPoints);
}

TEST_CASE("binary cloud round trip") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<float> u(-5, 5);
  std::vector<Vec3> pts(333);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  pts[0] = {-0.0f, 1e-38f, 3.4e38f};
  const PointCloud pc(pts);
  const auto bytes = encode_cloud(pc);
  CHECK(bytes.size() == 4 + 2 + 4 + 333 * 12);
  CHECK(decode_cloud(bytes) == pc);
  CHECK(std::signbit(decode_cloud(bytes)[0].x));

  const auto dir = scratch("io");
  write_cloud(dir / "a.pcdc", pc);
  CHECK(read_cloud(dir / "a.pcdc") == pc);
  write_cloud(dir / "a.xyz", pc);
  CHECK(read_cloud(dir / "a.xyz") == pc);

  std::ofstream(dir / "empty.pcdc").close();
  CHECK(kind_of([&] { read_cloud(dir / "empty.pcdc"); }) == ErrorKind::TruncatedFile);
  CHECK(kind_of([&] { read_cloud(dir / "missing.pcdc"); }) == ErrorKind::IoError);
  fs::remove_all(dir);
}

TEST_CASE("malformed binary clouds") {
  const PointCloud pc(std::vector<Vec3>{{1, 2, 3}, {4, 5, 6}});
  auto bytes = encode_cloud(pc);
  auto bad = bytes;
  bad[1] = 'X';
  CHECK(kind_of([&] { decode_cloud(bad); }) == ErrorKind::BadMagic);
  auto cut = bytes;
  cut.pop_back();
  CHECK(kind_of([&] { decode_cloud(cut); }) == ErrorKind::TruncatedFile);
  auto nan = bytes;
  const float q = std::nanf("");
  std::memcpy(nan.data() + 10, &q, 4);
  CHECK(kind_of([&] { decode_cloud(nan); }) == ErrorKind::NonFinite);
}

TEST_CASE("ascii clouds") {
  const auto pc = parse_xyz("1 2 3\n\n4.5 -6 7e-1\n");
  CHECK(pc.size() == 2);
  CHECK(pc[1].z == 0.7f);
  try {
    parse_xyz("1 2 3\n4 5 6\n7 8\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.kind() == ErrorKind::ParseError);
  }
  CHECK(kind_of([] { parse_xyz("1 2 3 4\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_xyz("1 2 x\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_xyz("1 2 nan\n"); }) == ErrorKind::NonFinite);
}

TEST_CASE("dataset generation is deterministic and split as documented") {
  GenOptions opt;
  opt.shapes = 5;
  opt.views = 2;
  opt.seed = 3;
  opt.data = {1500, 32, 64, 32, 16};
  const auto a = scratch("gen_a"), b = scratch("gen_b");
  const auto m = generate_dataset(a, opt);
  generate_dataset(b, opt);
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  for (const auto& r : m.samples)
    CHECK(slurp(a / r.partial_path) == slurp(b / r.partial_path));

  CHECK(m.split(Split::Train).size() == 10);
  CHECK(m.split(Split::Val).size() == 1);
  CHECK(m.split(Split::HoldoutViews).size() == 5);
  CHECK(m.split(Split::HoldoutModels).size() == opt.views);
  for (const auto* r : m.split(Split::HoldoutModels))
    CHECK(r->shape.kind == ShapeKind::Composite);

  const auto loaded = load_manifest(a);
  CHECK(loaded.samples.size() == m.samples.size());
  const auto train = load_split(a, loaded, Split::Train);
  REQUIRE(train.size() == 10);
  CHECK(train[0].partial.size() == 32);
  CHECK(train[0].gt.size() == 64);

  opt.seed = 4;
  const auto c = scratch("gen_c");
  generate_dataset(c, opt);
  CHECK(slurp(a / "manifest.json") != slurp(c / "manifest.json"));

  CHECK(kind_of([] { load_manifest(fs::temp_directory_path() / "pcc_no_such_dir"); }) ==
        ErrorKind::DatasetMissing);
  std::ofstream(c / "manifest.json") << "{ not json";
  CHECK(kind_of([&] { load_manifest(c); }) == ErrorKind::ParseError);
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}
