#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcc/geom/point_cloud.hpp"

namespace pcc::data {

enum class ShapeKind { Box, Sphere, Cylinder, Capsule, Composite };

std::string shape_kind_name(ShapeKind k);
ShapeKind parse_shape_kind(const std::string& name);

struct Pose {
  std::array<double, 4> rotation{1.0, 0.0, 0.0, 0.0};  // unit quaternion w,x,y,z
  std::array<double, 3> translation{0.0, 0.0, 0.0};
};

// Dimensions in meters, all in the shape's local frame (axis along z):
//   Box        [size_x, size_y, size_z]   full extents
//   Sphere     [radius]
//   Cylinder   [radius, height]
//   Capsule    [radius, straight_length]
//   Composite  [body_radius, body_height, handle_radius]  mug-like union of
//              a closed cylinder and a vertical capsule handle
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Sphere;
  std::vector<double> dims{0.1};
  Pose pose;

  // Throws BadSpec: wrong dim count, non-positive dims, quaternion norm off
  // by more than 1e-6.
  void validate() const;
};

void to_json(nlohmann::json& j, const ShapeSpec& s);
void from_json(const nlohmann::json& j, ShapeSpec& s);

std::array<double, 3> rotate(const std::array<double, 4>& q,
                             const std::array<double, 3>& v);

// n area-uniform surface samples, posed. Deterministic per seed.
PointCloud sample_surface(const ShapeSpec& spec, std::size_t n,
                          std::uint64_t seed);

// Random dimensions and pose for a kind; sizes are tabletop-object scale.
ShapeSpec random_shape(ShapeKind kind, std::mt19937_64& rng);

}  // namespace pcc::data
