#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pcc {

struct Vec3 {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Strict lexicographic (x, y, z) order.
bool lex_less(const Vec3& a, const Vec3& b);

// Ordered list of finite 3D points. Storage is f32; reductions over a cloud
// accumulate in f64.
class PointCloud {
 public:
  PointCloud() = default;
  // Throws Error(NonFinite) if any coordinate is NaN or infinite.
  explicit PointCloud(std::vector<Vec3> points);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Vec3> points() const noexcept { return points_; }

  void push_back(const Vec3& p);
  void reserve(std::size_t n) { points_.reserve(n); }

  // Points at the given indices, in index order.
  PointCloud select(std::span<const std::uint32_t> indices) const;

  // Structure-of-arrays copy (x..., y..., z...) in the requested precision.
  template <class T>
  std::vector<T> soa() const;
  // Interleaved xyz copy in the requested precision.
  template <class T>
  std::vector<T> interleaved() const;

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Vec3> points_;
};

PointCloud concat(const PointCloud& head, const PointCloud& tail);

// Centroid offset and max radius of a partial cloud. The same parameters are
// applied to every cloud that must live in the partial's frame.
struct NormParams {
  std::array<double, 3> offset{0.0, 0.0, 0.0};
  double scale = 1.0;
};

std::array<double, 3> centroid(const PointCloud& pc);

// offset = mean, scale = max distance from the mean. Throws DegenerateCloud
// when every point coincides, EmptyCloud when pc is empty.
NormParams compute_norm_params(const PointCloud& pc);

PointCloud normalize(const PointCloud& pc, const NormParams& np);
PointCloud denormalize(const PointCloud& pc, const NormParams& np);

// Greedy farthest-point sampling. Seed is the point farthest from the
// centroid; every pick maximises the min distance to the chosen set. Ties go
// to the lexicographically smallest point, then the lowest index. Returns
// indices in pick order. Throws BadCount unless 1 <= k <= pc.size().
std::vector<std::uint32_t> fps(const PointCloud& pc, std::size_t k);

// k nearest points to query by Euclidean distance, ascending, ties by the
// lowest index. Throws BadCount unless 1 <= k <= pc.size().
std::vector<std::uint32_t> knn(const PointCloud& pc, const Vec3& query,
                               std::size_t k);

struct NearestResult {
  std::vector<float> sq_dist;
  std::vector<std::uint32_t> index;
};

// For every point of `from`, its nearest point in `to`.
NearestResult nearest_neighbors(const PointCloud& from, const PointCloud& to);

// Symmetric L2 Chamfer distance: mean squared nearest-neighbour distance
// from a to b plus the same from b to a. Throws EmptyCloud.
double chamfer_l2(const PointCloud& a, const PointCloud& b);

}  // namespace pcc
