#include "pcc/data/scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcc/error.hpp"

namespace pcc::data {
namespace {

using V3 = std::array<double, 3>;

double dot(const V3& a, const V3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

V3 cross(const V3& a, const V3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

V3 unit(const V3& v) {
  const double n = std::sqrt(dot(v, v));
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Mean nearest-neighbour distance over a fixed stride of at most 256 points.
double sample_spacing(const PointCloud& pc) {
  if (pc.size() < 2) return 0.0;
  const std::size_t stride = std::max<std::size_t>(1, pc.size() / 256);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pc.size(); i += stride) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pc.size(); ++j) {
      if (j == i) continue;
      const V3 d{double(pc[i].x) - pc[j].x, double(pc[i].y) - pc[j].y,
                 double(pc[i].z) - pc[j].z};
      best = std::min(best, dot(d, d));
    }
    total += std::sqrt(best);
    ++count;
  }
  return total / double(count);
}

}  // namespace

PointCloud virtual_scan(const PointCloud& full, const std::array<double, 3>& camera,
                        std::size_t resolution,
                        std::vector<std::uint32_t>* kept) {
  if (full.empty()) fail(ErrorKind::EmptyScan, "nothing to scan");
  if (resolution < 1) fail(ErrorKind::BadArgument, "resolution must be >= 1");
  const V3 c = centroid(full);
  double radius = 0.0;
  for (const auto& p : full.points()) {
    const V3 d{p.x - c[0], p.y - c[1], p.z - c[2]};
    radius = std::max(radius, std::sqrt(dot(d, d)));
  }
  const V3 to_center{c[0] - camera[0], c[1] - camera[1], c[2] - camera[2]};
  const double dist = std::sqrt(dot(to_center, to_center));
  if (!(dist > radius))
    fail(ErrorKind::BadArgument, "camera lies inside the bounding sphere");

  const V3 forward = unit(to_center);
  const V3 world_up = std::abs(forward[2]) < 0.9 ? V3{0, 0, 1} : V3{1, 0, 0};
  const V3 right = unit(cross(forward, world_up));
  const V3 up = cross(right, forward);
  const double tan_half =
      radius > 0.0 ? radius / std::sqrt(dist * dist - radius * radius) : 1.0;

  const std::size_t res = resolution;
  std::vector<double> depth(res * res, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> owner(res * res, -1);
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto& p = full[i];
    const V3 v{p.x - camera[0], p.y - camera[1], p.z - camera[2]};
    const double z = dot(v, forward);
    if (!(z > 0.0)) continue;
    const double u = dot(v, right) / z / tan_half;
    const double w = dot(v, up) / z / tan_half;
    const auto to_pixel = [res](double s) {
      const double f = std::floor((s + 1.0) * 0.5 * static_cast<double>(res));
      return static_cast<std::size_t>(
          std::clamp(f, 0.0, static_cast<double>(res - 1)));
    };
    const std::size_t cell = to_pixel(w) * res + to_pixel(u);
    // Strict < keeps the lowest index among equal depths.
    if (z < depth[cell]) {
      depth[cell] = z;
      owner[cell] = static_cast<std::int64_t>(i);
    }
  }

  // A bare point z-buffer lets far surfaces show through the gaps between
  // sparse near samples. Every point also splats its depth over a disk about
  // three sample spacings in radius, and a pixel owner that lies well behind the
  // splatted front is dropped.
  const double spacing = sample_spacing(full);
  const double reach = 3.0 * spacing;
  const double tolerance = 0.1 * radius + reach;
  const double pixel_angle = 2.0 * tan_half / double(res);
  const auto r = static_cast<std::ptrdiff_t>(res);
  std::vector<double> front = depth;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const auto& p = full[i];
    const V3 v{p.x - camera[0], p.y - camera[1], p.z - camera[2]};
    const double z = dot(v, forward);
    if (!(z > 0.0)) continue;
    const double fx = (dot(v, right) / z / tan_half + 1.0) * 0.5 * double(res);
    const double fy = (dot(v, up) / z / tan_half + 1.0) * 0.5 * double(res);
    const double rad = std::min(reach / (z * pixel_angle), 8.0);
    const auto x0 = std::max<std::ptrdiff_t>(0, std::ptrdiff_t(std::floor(fx - rad)));
    const auto x1 = std::min<std::ptrdiff_t>(r - 1, std::ptrdiff_t(std::floor(fx + rad)));
    const auto y0 = std::max<std::ptrdiff_t>(0, std::ptrdiff_t(std::floor(fy - rad)));
    const auto y1 = std::min<std::ptrdiff_t>(r - 1, std::ptrdiff_t(std::floor(fy + rad)));
    for (auto y = y0; y <= y1; ++y)
      for (auto x = x0; x <= x1; ++x) {
        const double dx = double(x) + 0.5 - fx, dy = double(y) + 0.5 - fy;
        if (dx * dx + dy * dy > (rad + 0.5) * (rad + 0.5)) continue;
        auto& f = front[std::size_t(y * r + x)];
        f = std::min(f, z);
      }
  }

  std::vector<bool> survive(full.size(), false);
  for (std::size_t cell = 0; cell < owner.size(); ++cell)
    if (owner[cell] >= 0 && depth[cell] <= front[cell] + tolerance)
      survive[static_cast<std::size_t>(owner[cell])] = true;
  PointCloud out;
  if (kept) kept->clear();
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (!survive[i]) continue;
    out.push_back(full[i]);
    if (kept) kept->push_back(static_cast<std::uint32_t>(i));
  }
  if (out.empty()) fail(ErrorKind::EmptyScan, "no point survived the scan");
  return out;
}

}  // namespace pcc::data
