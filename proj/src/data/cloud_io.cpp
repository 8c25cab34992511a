#include "pcc/data/cloud_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pcc/error.hpp"

namespace pcc::data {
namespace {

bool is_ascii_path(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".xyz" || ext == ".txt";
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void dump(const std::filesystem::path& path, const char* data, std::size_t n) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path.string());
  f.write(data, static_cast<std::streamsize>(n));
  if (!f) fail(ErrorKind::IoError, "write failed: " + path.string());
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_cloud(const PointCloud& pc) {
  std::vector<std::uint8_t> out(std::begin(kCloudMagic), std::end(kCloudMagic));
  out.push_back(static_cast<std::uint8_t>(kCloudVersion & 0xff));
  out.push_back(static_cast<std::uint8_t>(kCloudVersion >> 8));
  const auto put = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(static_cast<std::uint32_t>(pc.size()));
  for (const auto& p : pc.points()) {
    put(std::bit_cast<std::uint32_t>(p.x));
    put(std::bit_cast<std::uint32_t>(p.y));
    put(std::bit_cast<std::uint32_t>(p.z));
  }
  return out;
}

PointCloud decode_cloud(const std::vector<std::uint8_t>& bytes) {
  constexpr std::size_t header = 4 + 2 + 4;
  if (bytes.size() < 4) fail(ErrorKind::TruncatedFile, "file too short for magic");
  if (std::memcmp(bytes.data(), kCloudMagic, 4) != 0)
    fail(ErrorKind::BadMagic, "not a PCDC cloud file");
  if (bytes.size() < header) fail(ErrorKind::TruncatedFile, "truncated header");
  const std::uint16_t version =
      static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kCloudVersion)
    fail(ErrorKind::BadMagic, "unsupported PCDC version " + std::to_string(version));
  const std::uint32_t count = get_u32(bytes.data() + 6);
  const std::size_t need = header + std::size_t{12} * count;
  if (bytes.size() < need)
    fail(ErrorKind::TruncatedFile, "header promises " + std::to_string(count) +
                                       " points, file holds " +
                                       std::to_string((bytes.size() - header) / 12));
  if (bytes.size() > need) fail(ErrorKind::TruncatedFile, "trailing bytes after points");
  std::vector<Vec3> pts(count);
  const std::uint8_t* p = bytes.data() + header;
  for (std::uint32_t i = 0; i < count; ++i, p += 12)
    pts[i] = {std::bit_cast<float>(get_u32(p)), std::bit_cast<float>(get_u32(p + 4)),
              std::bit_cast<float>(get_u32(p + 8))};
  return PointCloud(std::move(pts));
}

std::string format_xyz(const PointCloud& pc) {
  std::string out;
  char buf[64];
  for (const auto& p : pc.points()) {
    for (int c = 0; c < 3; ++c) {
      const float v = c == 0 ? p.x : c == 1 ? p.y : p.z;
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out.append(buf, res.ptr);
      out.push_back(c == 2 ? '\n' : ' ');
    }
  }
  return out;
}

PointCloud parse_xyz(const std::string& text) {
  std::vector<Vec3> pts;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    float v[3];
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    for (int c = 0; c < 3; ++c) {
      while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
      const auto res = std::from_chars(cur, end, v[c]);
      if (res.ec != std::errc())
        throw ParseError(lineno, "expected three numbers");
      cur = res.ptr;
      if (cur < end && *cur != ' ' && *cur != '\t')
        throw ParseError(lineno, "malformed number");
    }
    while (cur < end && (*cur == ' ' || *cur == '\t')) ++cur;
    if (cur != end) throw ParseError(lineno, "more than three fields");
    pts.push_back({v[0], v[1], v[2]});
  }
  return PointCloud(std::move(pts));
}

void write_cloud(const std::filesystem::path& path, const PointCloud& pc) {
  if (is_ascii_path(path)) {
    const auto text = format_xyz(pc);
    dump(path, text.data(), text.size());
  } else {
    const auto bytes = encode_cloud(pc);
    dump(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
}

PointCloud read_cloud(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  if (is_ascii_path(path))
    return parse_xyz(std::string(bytes.begin(), bytes.end()));
  return decode_cloud(bytes);
}

}  // namespace pcc::data
