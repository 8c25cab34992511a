#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

namespace pcc::model {

struct EmbedConfig {
  std::size_t regions = 128;     // FPS centers, one token each
  std::size_t group_size = 32;   // KNN members per region
  std::size_t edge_k = 8;        // EdgeConv neighbours inside a group
  std::size_t edge_width1 = 64;
  std::size_t edge_width2 = 128;  // FE width
  std::size_t pe_hidden = 64;
  std::size_t pe_width = 128;

  std::size_t token_width() const { return edge_width2 + pe_width; }
};

struct TransformerConfig {
  std::size_t d_model = 256;
  std::size_t heads = 4;
  std::size_t enc_layers = 4;
  std::size_t dec_layers = 4;
  std::size_t global_width = 1024;  // AE
  std::size_t queries = 192;        // query tokens == sparse points
  std::size_t decoder_width = 512;  // AD feature width
  std::size_t query_pe_hidden = 64;
  bool offset_attention = true;
  bool skip_connections = true;
};

struct FoldConfig {
  std::size_t points_per_center = 31;
  std::size_t mix_width = 256;
  std::size_t fold_hidden = 256;
};

// Ablation variants: A plain self-attention, B adds skips, C offset-attention,
// D offset-attention with skips.
enum class Variant { A, B, C, D };

Variant parse_variant(const std::string& name);
char variant_letter(Variant v);

struct ModelConfig {
  std::size_t input_points = 2048;
  EmbedConfig embed;
  TransformerConfig transformer;
  FoldConfig fold;

  std::size_t sparse_count() const { return transformer.queries; }
  std::size_t fold_count() const {
    return transformer.queries * fold.points_per_center;
  }
  std::size_t missing_count() const { return fold_count() + sparse_count(); }
  std::size_t completed_count() const { return input_points + missing_count(); }

  // N=2048, R=128, W=1024, X=S=192, Y=512, M=6144, Z=8192.
  static ModelConfig full_size();
  // Reduced widths and counts for CPU training runs.
  static ModelConfig desk();
  // Smallest shapes that still exercise every path; used for gradient checks.
  static ModelConfig toy();

  void set_variant(Variant v);
  Variant variant() const;

  // Throws BadArgument / LayerCountMismatch on inconsistent settings.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&);
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace pcc::model
