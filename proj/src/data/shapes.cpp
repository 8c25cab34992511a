#include "pcc/data/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcc/error.hpp"

namespace pcc::data {
namespace {

using V3 = std::array<double, 3>;

std::size_t expected_dims(ShapeKind k) {
  switch (k) {
    case ShapeKind::Box: return 3;
    case ShapeKind::Sphere: return 1;
    case ShapeKind::Cylinder: return 2;
    case ShapeKind::Capsule: return 2;
    case ShapeKind::Composite: return 3;
  }
  return 0;
}

V3 unit_sphere(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const V3 v{n(rng), n(rng), n(rng)};
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (len > 1e-12) return {v[0] / len, v[1] / len, v[2] / len};
  }
}

// Index drawn proportionally to weights.
std::size_t pick(const std::vector<double>& w, std::mt19937_64& rng) {
  double total = 0.0;
  for (const double x : w) total += x;
  std::uniform_real_distribution<double> u(0.0, total);
  double r = u(rng);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (r < w[i]) return i;
    r -= w[i];
  }
  return w.size() - 1;
}

V3 sample_box(const std::vector<double>& d, std::mt19937_64& rng) {
  const double hx = d[0] / 2, hy = d[1] / 2, hz = d[2] / 2;
  const std::vector<double> areas{d[1] * d[2], d[1] * d[2], d[0] * d[2],
                                  d[0] * d[2], d[0] * d[1], d[0] * d[1]};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t face = pick(areas, rng);
  const double a = u(rng), b = u(rng);
  const double sign = face % 2 == 0 ? 1.0 : -1.0;
  switch (face / 2) {
    case 0: return {sign * hx, a * hy, b * hz};
    case 1: return {a * hx, sign * hy, b * hz};
    default: return {a * hx, b * hy, sign * hz};
  }
}

V3 sample_cylinder(double r, double h, std::mt19937_64& rng) {
  const double pi = std::numbers::pi;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t part =
      pick({2.0 * pi * r * h, pi * r * r, pi * r * r}, rng);
  const double theta = 2.0 * pi * u01(rng);
  if (part == 0)
    return {r * std::cos(theta), r * std::sin(theta), (u01(rng) - 0.5) * h};
  const double rad = r * std::sqrt(u01(rng));
  return {rad * std::cos(theta), rad * std::sin(theta),
          part == 1 ? h / 2 : -h / 2};
}

V3 sample_capsule(double r, double len, std::mt19937_64& rng) {
  const double pi = std::numbers::pi;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::size_t part = pick({2.0 * pi * r * len, 4.0 * pi * r * r}, rng);
  if (part == 0) {
    const double theta = 2.0 * pi * u01(rng);
    return {r * std::cos(theta), r * std::sin(theta), (u01(rng) - 0.5) * len};
  }
  const V3 s = unit_sphere(rng);
  return {r * s[0], r * s[1], r * s[2] + (s[2] >= 0 ? len / 2 : -len / 2)};
}

bool inside_cylinder(const V3& p, double r, double h) {
  return p[0] * p[0] + p[1] * p[1] < r * r && std::abs(p[2]) < h / 2;
}

bool inside_capsule(const V3& p, const V3& center, double r, double len) {
  const double dz = std::clamp(p[2] - center[2], -len / 2, len / 2);
  const double dx = p[0] - center[0], dy = p[1] - center[1],
               ez = p[2] - (center[2] + dz);
  return dx * dx + dy * dy + ez * ez < r * r;
}

// Mug: closed cylinder body plus a vertical capsule handle overlapping the
// body wall. Samples inside the other primitive are rejected, which keeps
// the union's surface area-uniform.
V3 sample_composite(const std::vector<double>& d, std::mt19937_64& rng) {
  const double pi = std::numbers::pi;
  const double r = d[0], h = d[1], hr = d[2];
  const double handle_len = 0.5 * h;
  const V3 handle_center{r + 0.8 * hr, 0.0, 0.0};
  const double body_area = 2.0 * pi * r * h + 2.0 * pi * r * r;
  const double handle_area = 2.0 * pi * hr * handle_len + 4.0 * pi * hr * hr;
  for (;;) {
    if (pick({body_area, handle_area}, rng) == 0) {
      const V3 p = sample_cylinder(r, h, rng);
      if (!inside_capsule(p, handle_center, hr, handle_len)) return p;
    } else {
      V3 p = sample_capsule(hr, handle_len, rng);
      for (int i = 0; i < 3; ++i) p[i] += handle_center[i];
      if (!inside_cylinder(p, r, h)) return p;
    }
  }
}

}  // namespace

std::string shape_kind_name(ShapeKind k) {
  switch (k) {
    case ShapeKind::Box: return "box";
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Capsule: return "capsule";
    case ShapeKind::Composite: return "composite";
  }
  return "?";
}

ShapeKind parse_shape_kind(const std::string& name) {
  for (const auto k : {ShapeKind::Box, ShapeKind::Sphere, ShapeKind::Cylinder,
                       ShapeKind::Capsule, ShapeKind::Composite})
    if (shape_kind_name(k) == name) return k;
  fail(ErrorKind::BadSpec, "unknown shape kind '" + name + "'");
}

void ShapeSpec::validate() const {
  if (dims.size() != expected_dims(kind))
    fail(ErrorKind::BadSpec, shape_kind_name(kind) + " needs " +
                                 std::to_string(expected_dims(kind)) +
                                 " dimensions");
  for (const double d : dims)
    if (!(d > 0.0) || !std::isfinite(d))
      fail(ErrorKind::BadSpec, "dimensions must be positive and finite");
  const auto& q = pose.rotation;
  const double norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (std::abs(norm - 1.0) > 1e-6)
    fail(ErrorKind::BadSpec, "pose quaternion is not unit length");
  for (const double t : pose.translation)
    if (!std::isfinite(t)) fail(ErrorKind::BadSpec, "non-finite translation");
}

std::array<double, 3> rotate(const std::array<double, 4>& q,
                             const std::array<double, 3>& v) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  // v' = v + 2w (u x v) + 2 u x (u x v), u = (x, y, z)
  const V3 uv{y * v[2] - z * v[1], z * v[0] - x * v[2], x * v[1] - y * v[0]};
  const V3 uuv{y * uv[2] - z * uv[1], z * uv[0] - x * uv[2],
               x * uv[1] - y * uv[0]};
  return {v[0] + 2.0 * (w * uv[0] + uuv[0]), v[1] + 2.0 * (w * uv[1] + uuv[1]),
          v[2] + 2.0 * (w * uv[2] + uuv[2])};
}

PointCloud sample_surface(const ShapeSpec& spec, std::size_t n,
                          std::uint64_t seed) {
  spec.validate();
  if (n < 1) fail(ErrorKind::BadCount, "sample_surface needs n >= 1");
  std::mt19937_64 rng(seed);
  PointCloud out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    V3 p;
    switch (spec.kind) {
      case ShapeKind::Box: p = sample_box(spec.dims, rng); break;
      case ShapeKind::Sphere: {
        const V3 s = unit_sphere(rng);
        p = {spec.dims[0] * s[0], spec.dims[0] * s[1], spec.dims[0] * s[2]};
        break;
      }
      case ShapeKind::Cylinder:
        p = sample_cylinder(spec.dims[0], spec.dims[1], rng);
        break;
      case ShapeKind::Capsule:
        p = sample_capsule(spec.dims[0], spec.dims[1], rng);
        break;
      case ShapeKind::Composite: p = sample_composite(spec.dims, rng); break;
    }
    const V3 r = rotate(spec.pose.rotation, p);
    const auto& t = spec.pose.translation;
    out.push_back({static_cast<float>(r[0] + t[0]),
                   static_cast<float>(r[1] + t[1]),
                   static_cast<float>(r[2] + t[2])});
  }
  return out;
}

ShapeSpec random_shape(ShapeKind kind, std::mt19937_64& rng) {
  auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  ShapeSpec s;
  s.kind = kind;
  switch (kind) {
    case ShapeKind::Box: s.dims = {u(0.05, 0.25), u(0.05, 0.25), u(0.05, 0.25)}; break;
    case ShapeKind::Sphere: s.dims = {u(0.04, 0.12)}; break;
    case ShapeKind::Cylinder: s.dims = {u(0.03, 0.10), u(0.08, 0.25)}; break;
    case ShapeKind::Capsule: s.dims = {u(0.03, 0.08), u(0.05, 0.20)}; break;
    case ShapeKind::Composite:
      s.dims = {u(0.04, 0.08), u(0.08, 0.18), u(0.015, 0.03)};
      break;
  }
  std::normal_distribution<double> n(0.0, 1.0);
  std::array<double, 4> q{n(rng), n(rng), n(rng), n(rng)};
  const double len = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (auto& c : q) c /= len;
  s.pose.rotation = q;
  s.pose.translation = {u(-0.5, 0.5), u(-0.5, 0.5), u(0.0, 0.5)};
  return s;
}

void to_json(nlohmann::json& j, const ShapeSpec& s) {
  j = nlohmann::json{{"kind", shape_kind_name(s.kind)},
                     {"dims", s.dims},
                     {"rotation", s.pose.rotation},
                     {"translation", s.pose.translation}};
}

void from_json(const nlohmann::json& j, ShapeSpec& s) {
  s.kind = parse_shape_kind(j.at("kind").get<std::string>());
  j.at("dims").get_to(s.dims);
  j.at("rotation").get_to(s.pose.rotation);
  j.at("translation").get_to(s.pose.translation);
}

}  // namespace pcc::data
