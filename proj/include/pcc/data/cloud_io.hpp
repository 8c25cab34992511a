#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcc/geom/point_cloud.hpp"

namespace pcc::data {

// Binary layout, little-endian: "PCDC"  u16 version=1  u32 count
// then count x (f32 x, f32 y, f32 z).
inline constexpr char kCloudMagic[4] = {'P', 'C', 'D', 'C'};
inline constexpr std::uint16_t kCloudVersion = 1;

std::vector<std::uint8_t> encode_cloud(const PointCloud& pc);
// Throws TruncatedFile, BadMagic, NonFinite.
PointCloud decode_cloud(const std::vector<std::uint8_t>& bytes);

// One "x y z" line per point. Blank lines are skipped; anything else that
// is not exactly three numbers throws ParseError with its line number.
std::string format_xyz(const PointCloud& pc);
PointCloud parse_xyz(const std::string& text);

// Files ending in .xyz or .txt use the ASCII form, everything else binary.
void write_cloud(const std::filesystem::path& path, const PointCloud& pc);
PointCloud read_cloud(const std::filesystem::path& path);

}  // namespace pcc::data
