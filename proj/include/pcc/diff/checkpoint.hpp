#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcc/diff/params.hpp"

namespace pcc::diff {

// Binary checkpoint layout (all integers little-endian):
//   "PCCK"  u32 version  u32 blob_len  blob (UTF-8 JSON config)
//   u32 param_count, then per parameter:
//   u32 name_len  name  u32 rank  u32 dims[rank]  f32 data[product(dims)]
inline constexpr char kCheckpointMagic[4] = {'P', 'C', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor<float> value;
};

struct Checkpoint {
  std::string config;  // JSON text
  std::vector<NamedTensor> tensors;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws BadMagic, TruncatedFile, ConfigMismatch (unknown version).
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint snapshot(const ParamStore<float>& store, std::string config);
// Copies tensors into the store by name. Throws ConfigMismatch if a name is
// missing or a shape disagrees.
void restore(ParamStore<float>& store, const Checkpoint& ckpt);

}  // namespace pcc::diff
