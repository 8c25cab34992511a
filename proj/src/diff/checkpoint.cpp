#include "pcc/diff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "pcc/error.hpp"

namespace pcc::diff {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n)
      fail(ErrorKind::TruncatedFile,
           std::string("checkpoint ends inside ") + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float f32() {
    const std::uint32_t bits = u32("tensor data");
    return std::bit_cast<float>(bits);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic),
                                std::end(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(ckpt.config.size()));
  out.insert(out.end(), ckpt.config.begin(), ckpt.config.end());
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_u32(out, static_cast<std::uint32_t>(t.value.shape().size()));
    for (const auto d : t.value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (const float v : t.value.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    fail(ErrorKind::BadMagic, "not a checkpoint (bad magic)");
  r.str(4, "magic");
  const auto version = r.u32("version");
  if (version != kCheckpointVersion)
    fail(ErrorKind::ConfigMismatch,
         "unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  c.config = r.str(r.u32("config length"), "config");
  const auto count = r.u32("parameter count");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str(r.u32("name length"), "name");
    const auto rank = r.u32("rank");
    if (rank == 0 || rank > 8)
      fail(ErrorKind::TruncatedFile, "implausible rank for " + t.name);
    Shape shape;
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(r.u32("dims"));
      n *= shape.back();
    }
    r.need(4 * n, "tensor data");
    std::vector<float> data(n);
    for (auto& v : data) v = r.f32();
    t.value = Tensor<float>(std::move(shape), std::move(data));
    c.tensors.push_back(std::move(t));
  }
  if (!r.done()) fail(ErrorKind::TruncatedFile, "trailing bytes in checkpoint");
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const auto bytes = encode_checkpoint(c);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorKind::IoError, "write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

Checkpoint snapshot(const ParamStore<float>& store, std::string config) {
  Checkpoint c{std::move(config), {}};
  for (const auto& p : store.all()) c.tensors.push_back({p.name, p.value});
  return c;
}

void restore(ParamStore<float>& store, const Checkpoint& ckpt) {
  for (auto& p : store.all()) {
    const NamedTensor* found = nullptr;
    for (const auto& t : ckpt.tensors)
      if (t.name == p.name) found = &t;
    if (!found)
      fail(ErrorKind::ConfigMismatch, "checkpoint lacks parameter " + p.name);
    if (found->value.shape() != p.value.shape())
      fail(ErrorKind::ConfigMismatch, "shape mismatch for parameter " + p.name);
    p.value = found->value;
  }
}

}  // namespace pcc::diff
