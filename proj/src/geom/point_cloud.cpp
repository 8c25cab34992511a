#include "pcc/geom/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcc/error.hpp"
#include "pcc/simd/kernels.hpp"

namespace pcc {
namespace {

bool finite(const Vec3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

void check_count(const PointCloud& pc, std::size_t k, const char* what) {
  if (k < 1 || k > pc.size())
    fail(ErrorKind::BadCount, std::string(what) + ": k=" + std::to_string(k) +
                                  " outside [1, " + std::to_string(pc.size()) +
                                  "]");
}

// Index comparison for ties in fps: lexicographically smaller point wins,
// then lower index.
bool tie_prefers(const PointCloud& pc, std::size_t a, std::size_t b) {
  if (lex_less(pc[a], pc[b])) return true;
  if (lex_less(pc[b], pc[a])) return false;
  return a < b;
}

std::size_t argmax_with_ties(const PointCloud& pc,
                             const std::vector<double>& value) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < value.size(); ++i) {
    if (value[i] > value[best] ||
        (value[i] == value[best] && tie_prefers(pc, i, best)))
      best = i;
  }
  return best;
}

}  // namespace

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (!finite(points_[i]))
      fail(ErrorKind::NonFinite,
           "point " + std::to_string(i) + " has a non-finite coordinate");
}

void PointCloud::push_back(const Vec3& p) {
  if (!finite(p)) fail(ErrorKind::NonFinite, "non-finite point");
  points_.push_back(p);
}

PointCloud PointCloud::select(std::span<const std::uint32_t> indices) const {
  PointCloud out;
  out.points_.reserve(indices.size());
  for (const auto i : indices) out.points_.push_back(points_.at(i));
  return out;
}

template <class T>
std::vector<T> PointCloud::soa() const {
  const std::size_t n = points_.size();
  std::vector<T> out(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<T>(points_[i].x);
    out[n + i] = static_cast<T>(points_[i].y);
    out[2 * n + i] = static_cast<T>(points_[i].z);
  }
  return out;
}

template <class T>
std::vector<T> PointCloud::interleaved() const {
  std::vector<T> out(3 * points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    out[3 * i] = static_cast<T>(points_[i].x);
    out[3 * i + 1] = static_cast<T>(points_[i].y);
    out[3 * i + 2] = static_cast<T>(points_[i].z);
  }
  return out;
}

template std::vector<float> PointCloud::soa<float>() const;
template std::vector<double> PointCloud::soa<double>() const;
template std::vector<float> PointCloud::interleaved<float>() const;
template std::vector<double> PointCloud::interleaved<double>() const;

PointCloud concat(const PointCloud& head, const PointCloud& tail) {
  std::vector<Vec3> pts;
  pts.reserve(head.size() + tail.size());
  pts.insert(pts.end(), head.points().begin(), head.points().end());
  pts.insert(pts.end(), tail.points().begin(), tail.points().end());
  return PointCloud(std::move(pts));
}

std::array<double, 3> centroid(const PointCloud& pc) {
  if (pc.empty()) fail(ErrorKind::EmptyCloud, "centroid of an empty cloud");
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  for (const auto& p : pc.points()) {
    sum[0] += p.x;
    sum[1] += p.y;
    sum[2] += p.z;
  }
  const double n = static_cast<double>(pc.size());
  return {sum[0] / n, sum[1] / n, sum[2] / n};
}

NormParams compute_norm_params(const PointCloud& pc) {
  NormParams np;
  np.offset = centroid(pc);
  double max_sq = 0.0;
  for (const auto& p : pc.points()) {
    const double dx = p.x - np.offset[0];
    const double dy = p.y - np.offset[1];
    const double dz = p.z - np.offset[2];
    max_sq = std::max(max_sq, dx * dx + dy * dy + dz * dz);
  }
  np.scale = std::sqrt(max_sq);
  if (!(np.scale > 0.0))
    fail(ErrorKind::DegenerateCloud, "all points coincide; scale would be 0");
  return np;
}

PointCloud normalize(const PointCloud& pc, const NormParams& np) {
  if (!(np.scale > 0.0)) fail(ErrorKind::BadArgument, "scale must be > 0");
  std::vector<Vec3> out;
  out.reserve(pc.size());
  for (const auto& p : pc.points()) {
    out.push_back({static_cast<float>((p.x - np.offset[0]) / np.scale),
                   static_cast<float>((p.y - np.offset[1]) / np.scale),
                   static_cast<float>((p.z - np.offset[2]) / np.scale)});
  }
  return PointCloud(std::move(out));
}

PointCloud denormalize(const PointCloud& pc, const NormParams& np) {
  if (!(np.scale > 0.0)) fail(ErrorKind::BadArgument, "scale must be > 0");
  std::vector<Vec3> out;
  out.reserve(pc.size());
  for (const auto& p : pc.points()) {
    out.push_back({static_cast<float>(p.x * np.scale + np.offset[0]),
                   static_cast<float>(p.y * np.scale + np.offset[1]),
                   static_cast<float>(p.z * np.scale + np.offset[2])});
  }
  return PointCloud(std::move(out));
}

std::vector<std::uint32_t> fps(const PointCloud& pc, std::size_t k) {
  check_count(pc, k, "fps");
  const std::size_t n = pc.size();
  const auto soa = pc.soa<double>();
  const auto& dist = simd::distance<double>();

  const auto c = centroid(pc);
  std::vector<double> d(n);
  dist.sq_dist(soa.data(), n, c.data(), d.data());

  std::vector<std::uint32_t> picks;
  picks.reserve(k);
  std::size_t next = argmax_with_ties(pc, d);
  std::fill(d.begin(), d.end(), std::numeric_limits<double>::infinity());
  for (std::size_t step = 0; step < k; ++step) {
    picks.push_back(static_cast<std::uint32_t>(next));
    if (step + 1 == k) break;
    const double center[3] = {soa[next], soa[n + next], soa[2 * n + next]};
    dist.min_update(soa.data(), n, center, d.data());
    next = argmax_with_ties(pc, d);
  }
  return picks;
}

std::vector<std::uint32_t> knn(const PointCloud& pc, const Vec3& query,
                               std::size_t k) {
  check_count(pc, k, "knn");
  const std::size_t n = pc.size();
  const auto soa = pc.soa<double>();
  const double q[3] = {query.x, query.y, query.z};
  std::vector<double> d(n);
  simd::distance<double>().sq_dist(soa.data(), n, q, d.data());

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k),
                    order.end(), [&](std::uint32_t a, std::uint32_t b) {
                      return d[a] < d[b] || (d[a] == d[b] && a < b);
                    });
  order.resize(k);
  return order;
}

NearestResult nearest_neighbors(const PointCloud& from, const PointCloud& to) {
  if (from.empty() || to.empty())
    fail(ErrorKind::EmptyCloud, "nearest neighbours need non-empty clouds");
  NearestResult r;
  r.sq_dist.resize(from.size());
  r.index.resize(from.size());
  const auto q = from.interleaved<float>();
  const auto ref = to.soa<float>();
  simd::distance<float>().nearest(q.data(), from.size(), ref.data(),
                                  to.size(), r.sq_dist.data(), r.index.data());
  return r;
}

double chamfer_l2(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty())
    fail(ErrorKind::EmptyCloud, "chamfer distance of an empty cloud");
  const auto ab = nearest_neighbors(a, b);
  const auto ba = nearest_neighbors(b, a);
  double sum_ab = 0.0;
  for (const float d : ab.sq_dist) sum_ab += d;
  double sum_ba = 0.0;
  for (const float d : ba.sq_dist) sum_ba += d;
  return sum_ab / static_cast<double>(a.size()) +
         sum_ba / static_cast<double>(b.size());
}

}  // namespace pcc
