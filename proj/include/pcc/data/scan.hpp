#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pcc/geom/point_cloud.hpp"

namespace pcc::data {

// Single-view visibility by z-buffer: a pinhole camera at `camera` looks at
// the centroid with a field of view that just frames the bounding sphere;
// each pixel of a resolution x resolution grid keeps only its nearest point.
// Survivors are returned in input order. `kept`, when given, receives their
// input indices. Throws BadArgument if the camera is inside the bounding
// sphere and EmptyScan if nothing survives.
PointCloud virtual_scan(const PointCloud& full,
                        const std::array<double, 3>& camera,
                        std::size_t resolution = 64,
                        std::vector<std::uint32_t>* kept = nullptr);

}  // namespace pcc::data
