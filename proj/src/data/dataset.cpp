#include "pcc/data/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pcc/data/cloud_io.hpp"
#include "pcc/data/scan.hpp"
#include "pcc/error.hpp"

namespace pcc::data {
namespace fs = std::filesystem;
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
  return splitmix(splitmix(splitmix(seed ^ splitmix(a)) ^ b) ^ c);
}

nlohmann::json norm_json(const NormParams& n) {
  return {{"offset", n.offset}, {"scale", n.scale}};
}

NormParams norm_from(const nlohmann::json& j) {
  NormParams n;
  j.at("offset").get_to(n.offset);
  j.at("scale").get_to(n.scale);
  return n;
}

}  // namespace

std::string norm_mode_name(NormMode m) {
  return m == NormMode::Ours ? "ours" : "baseline";
}

NormMode parse_norm_mode(const std::string& name) {
  if (name == "ours") return NormMode::Ours;
  if (name == "baseline") return NormMode::Baseline;
  fail(ErrorKind::BadArgument, "unknown norm mode '" + name + "' (ours|baseline)");
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::HoldoutViews: return "holdout-views";
    case Split::HoldoutModels: return "holdout-models";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  for (const auto s : {Split::Train, Split::Val, Split::HoldoutViews, Split::HoldoutModels})
    if (split_name(s) == name) return s;
  fail(ErrorKind::BadArgument, "unknown split '" + name + "'");
}

void to_json(nlohmann::json& j, const DataConfig& c) {
  j = {{"surface_points", c.surface_points},
       {"input_points", c.input_points},
       {"gt_points", c.gt_points},
       {"scan_resolution", c.scan_resolution},
       {"camera_retries", c.camera_retries}};
}

void from_json(const nlohmann::json& j, DataConfig& c) {
  j.at("surface_points").get_to(c.surface_points);
  j.at("input_points").get_to(c.input_points);
  j.at("gt_points").get_to(c.gt_points);
  j.at("scan_resolution").get_to(c.scan_resolution);
  if (j.contains("camera_retries")) j.at("camera_retries").get_to(c.camera_retries);
}

Sample build_sample(const ShapeSpec& spec, const std::array<double, 3>& camera,
                    std::uint64_t seed, const DataConfig& cfg, NormMode mode) {
  const PointCloud surface = sample_surface(spec, cfg.surface_points, seed);
  std::vector<std::uint32_t> visible;
  const PointCloud partial_raw =
      virtual_scan(surface, camera, cfg.scan_resolution, &visible);
  if (partial_raw.size() < cfg.input_points)
    fail(ErrorKind::InsufficientPoints,
         "scan kept " + std::to_string(partial_raw.size()) + " points, need " +
             std::to_string(cfg.input_points));
  if (surface.size() < cfg.gt_points)
    fail(ErrorKind::InsufficientPoints, "surface sampling smaller than gt_points");

  Sample s;
  s.norm = compute_norm_params(partial_raw);
  const NormParams gt_norm =
      mode == NormMode::Ours ? s.norm : compute_norm_params(surface);

  const PointCloud partial_n = normalize(partial_raw, s.norm);
  const auto pick_p = fps(partial_n, cfg.input_points);
  s.partial = partial_n.select(pick_p);
  for (const auto i : pick_p) s.partial_source.push_back(visible[i]);

  const PointCloud gt_n = normalize(surface, gt_norm);
  s.gt_source = fps(gt_n, cfg.gt_points);
  s.gt = gt_n.select(s.gt_source);
  return s;
}

std::array<double, 3> random_camera(const PointCloud& surface,
                                    std::mt19937_64& rng) {
  const auto c = centroid(surface);
  double radius = 0.0;
  for (const auto& p : surface.points()) {
    const double dx = p.x - c[0], dy = p.y - c[1], dz = p.z - c[2];
    radius = std::max(radius, std::sqrt(dx * dx + dy * dy + dz * dz));
  }
  std::normal_distribution<double> n(0.0, 1.0);
  double d[3];
  double len = 0.0;
  do {
    d[0] = n(rng);
    d[1] = n(rng);
    d[2] = n(rng);
    len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  } while (len < 1e-9);
  const double dist = 3.0 * std::max(radius, 1e-6);
  return {c[0] + dist * d[0] / len, c[1] + dist * d[1] / len,
          c[2] + dist * d[2] / len};
}

std::vector<const SampleRecord*> Manifest::split(Split s) const {
  std::vector<const SampleRecord*> out;
  for (const auto& r : samples)
    if (r.split == s) out.push_back(&r);
  return out;
}

void to_json(nlohmann::json& j, const Manifest& m) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& r : m.samples)
    samples.push_back({{"id", r.id},
                       {"split", split_name(r.split)},
                       {"shape", r.shape},
                       {"camera", r.camera},
                       {"seed", r.seed},
                       {"partial", r.partial_path},
                       {"gt", r.gt_path},
                       {"norm", norm_json(r.norm)},
                       {"gt_norm", norm_mode_name(r.gt_norm)}});
  j = {{"version", m.version},
       {"seed", m.seed},
       {"norm_mode", norm_mode_name(m.norm_mode)},
       {"shapes", m.shapes},
       {"views", m.views},
       {"data", m.data},
       {"samples", samples}};
}

void from_json(const nlohmann::json& j, Manifest& m) {
  j.at("version").get_to(m.version);
  j.at("seed").get_to(m.seed);
  m.norm_mode = parse_norm_mode(j.at("norm_mode").get<std::string>());
  j.at("shapes").get_to(m.shapes);
  j.at("views").get_to(m.views);
  j.at("data").get_to(m.data);
  m.samples.clear();
  for (const auto& s : j.at("samples")) {
    SampleRecord r;
    s.at("id").get_to(r.id);
    r.split = parse_split(s.at("split").get<std::string>());
    s.at("shape").get_to(r.shape);
    s.at("camera").get_to(r.camera);
    s.at("seed").get_to(r.seed);
    s.at("partial").get_to(r.partial_path);
    s.at("gt").get_to(r.gt_path);
    r.norm = norm_from(s.at("norm"));
    r.gt_norm = parse_norm_mode(s.at("gt_norm").get<std::string>());
    m.samples.push_back(std::move(r));
  }
}

Manifest generate_dataset(const fs::path& dir, const GenOptions& opts) {
  if (opts.shapes < 1 || opts.views < 1)
    fail(ErrorKind::BadArgument, "need at least one shape and one view");
  fs::create_directories(dir / "clouds");
  Manifest m;
  m.seed = opts.seed;
  m.norm_mode = opts.norm_mode;
  m.shapes = opts.shapes;
  m.views = opts.views;
  m.data = opts.data;

  auto emit = [&](Split split, const ShapeSpec& spec, const std::string& id,
                  std::uint64_t sample_seed) {
    const NormMode mode = (split == Split::Train || split == Split::Val)
                              ? opts.norm_mode
                              : NormMode::Ours;
    const PointCloud surface =
        sample_surface(spec, opts.data.surface_points, sample_seed);
    for (std::size_t attempt = 0; attempt < opts.data.camera_retries; ++attempt) {
      std::mt19937_64 cam_rng(derive(sample_seed, 0xca3e7a, attempt));
      const auto camera = random_camera(surface, cam_rng);
      Sample s;
      try {
        s = build_sample(spec, camera, sample_seed, opts.data, mode);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InsufficientPoints) continue;
        throw;
      }
      SampleRecord r;
      r.id = id;
      r.split = split;
      r.shape = spec;
      r.camera = camera;
      r.seed = sample_seed;
      r.partial_path = "clouds/" + id + "_partial.pcdc";
      r.gt_path = "clouds/" + id + "_gt.pcdc";
      r.norm = s.norm;
      r.gt_norm = mode;
      write_cloud(dir / r.partial_path, s.partial);
      write_cloud(dir / r.gt_path, s.gt);
      m.samples.push_back(std::move(r));
      return;
    }
    fail(ErrorKind::InsufficientPoints,
         "no camera out of " + std::to_string(opts.data.camera_retries) +
             " kept enough points for " + id);
  };

  constexpr ShapeKind train_kinds[] = {ShapeKind::Box, ShapeKind::Sphere,
                                       ShapeKind::Cylinder, ShapeKind::Capsule};
  char id[64];
  for (std::size_t i = 0; i < opts.shapes; ++i) {
    std::mt19937_64 rng(derive(opts.seed, 1, i));
    const ShapeSpec spec = random_shape(train_kinds[i % 4], rng);
    for (std::size_t v = 0; v < opts.views; ++v) {
      std::snprintf(id, sizeof id, "s%05zu-v%zu", i, v);
      emit(Split::Train, spec, id, derive(opts.seed, 2, i, v));
    }
    if (i % 5 == 0) {
      std::snprintf(id, sizeof id, "s%05zu-val", i);
      emit(Split::Val, spec, id, derive(opts.seed, 3, i));
    }
    std::snprintf(id, sizeof id, "s%05zu-hv", i);
    emit(Split::HoldoutViews, spec, id, derive(opts.seed, 4, i));
  }
  const std::size_t novel = std::max<std::size_t>(1, opts.shapes / 10);
  for (std::size_t i = 0; i < novel; ++i) {
    std::mt19937_64 rng(derive(opts.seed, 5, i));
    const ShapeSpec spec = random_shape(ShapeKind::Composite, rng);
    for (std::size_t v = 0; v < opts.views; ++v) {
      std::snprintf(id, sizeof id, "m%05zu-v%zu", i, v);
      emit(Split::HoldoutModels, spec, id, derive(opts.seed, 6, i, v));
    }
  }

  std::ofstream f(dir / "manifest.json", std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot write manifest in " + dir.string());
  f << nlohmann::json(m).dump(1) << '\n';
  return m;
}

Manifest load_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path))
    fail(ErrorKind::DatasetMissing, "no manifest.json in " + dir.string());
  std::ifstream f(path);
  nlohmann::json j;
  try {
    f >> j;
    return j.get<Manifest>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, "manifest " + path.string() + ": " + e.what());
  }
}

std::vector<LoadedSample> load_split(const fs::path& dir, const Manifest& m,
                                     Split s) {
  std::vector<LoadedSample> out;
  for (const auto* r : m.split(s))
    out.push_back({*r, read_cloud(dir / r->partial_path), read_cloud(dir / r->gt_path)});
  return out;
}

}  // namespace pcc::data
