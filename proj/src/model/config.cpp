#include "pcc/model/config.hpp"

#include "pcc/error.hpp"

namespace pcc::model {

Variant parse_variant(const std::string& name) {
  if (name == "A") return Variant::A;
  if (name == "B") return Variant::B;
  if (name == "C") return Variant::C;
  if (name == "D") return Variant::D;
  fail(ErrorKind::BadArgument, "unknown variant '" + name + "' (A|B|C|D)");
}

char variant_letter(Variant v) {
  switch (v) {
    case Variant::A: return 'A';
    case Variant::B: return 'B';
    case Variant::C: return 'C';
    case Variant::D: return 'D';
  }
  return '?';
}

ModelConfig ModelConfig::full_size() { return ModelConfig{}; }

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.input_points = 256;
  c.embed = {32, 16, 4, 32, 32, 32, 32};
  c.transformer.d_model = 64;
  c.transformer.heads = 4;
  c.transformer.enc_layers = 2;
  c.transformer.dec_layers = 2;
  c.transformer.global_width = 128;
  c.transformer.queries = 64;
  c.transformer.decoder_width = 64;
  c.transformer.query_pe_hidden = 32;
  c.fold = {3, 64, 32};
  return c;
}

ModelConfig ModelConfig::toy() {
  ModelConfig c;
  c.input_points = 16;
  c.embed = {16, 4, 2, 4, 6, 4, 6};
  c.transformer.d_model = 8;
  c.transformer.heads = 2;
  c.transformer.enc_layers = 2;
  c.transformer.dec_layers = 2;
  c.transformer.global_width = 8;
  c.transformer.queries = 16;
  c.transformer.decoder_width = 6;
  c.transformer.query_pe_hidden = 4;
  c.fold = {3, 6, 6};
  return c;
}

void ModelConfig::set_variant(Variant v) {
  transformer.skip_connections = v == Variant::B || v == Variant::D;
  transformer.offset_attention = v == Variant::C || v == Variant::D;
}

Variant ModelConfig::variant() const {
  if (transformer.offset_attention)
    return transformer.skip_connections ? Variant::D : Variant::C;
  return transformer.skip_connections ? Variant::B : Variant::A;
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::BadArgument, "invalid model config: " + what);
  };
  const auto& e = embed;
  const auto& t = transformer;
  require(input_points >= 2, "input_points >= 2");
  require(e.regions >= 1 && e.regions <= input_points, "1 <= regions <= input_points");
  require(e.group_size >= 2 && e.group_size <= input_points,
          "2 <= group_size <= input_points");
  require(e.edge_k >= 1 && e.edge_k < e.group_size, "1 <= edge_k < group_size");
  require(e.edge_width1 > 0 && e.edge_width2 > 0 && e.pe_hidden > 0 &&
              e.pe_width > 0,
          "embed widths > 0");
  require(t.d_model > 0 && t.heads > 0 && t.d_model % t.heads == 0,
          "d_model divisible by heads");
  require(t.enc_layers >= 1 && t.dec_layers >= 1, "at least one layer each");
  require(t.global_width > 0 && t.queries > 0 && t.decoder_width > 0 &&
              t.query_pe_hidden > 0,
          "transformer widths > 0");
  require(fold.points_per_center >= 1 && fold.mix_width > 0 &&
              fold.fold_hidden > 0,
          "fold sizes > 0");
  if (t.dec_layers > t.enc_layers)
    fail(ErrorKind::LayerCountMismatch,
         "decoder has " + std::to_string(t.dec_layers) +
             " layers but the encoder only " + std::to_string(t.enc_layers));
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  nlohmann::json ja = a, jb = b;
  return ja == jb;
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{
      {"input_points", c.input_points},
      {"embed",
       {{"regions", c.embed.regions},
        {"group_size", c.embed.group_size},
        {"edge_k", c.embed.edge_k},
        {"edge_width1", c.embed.edge_width1},
        {"edge_width2", c.embed.edge_width2},
        {"pe_hidden", c.embed.pe_hidden},
        {"pe_width", c.embed.pe_width}}},
      {"transformer",
       {{"d_model", c.transformer.d_model},
        {"heads", c.transformer.heads},
        {"enc_layers", c.transformer.enc_layers},
        {"dec_layers", c.transformer.dec_layers},
        {"global_width", c.transformer.global_width},
        {"queries", c.transformer.queries},
        {"decoder_width", c.transformer.decoder_width},
        {"query_pe_hidden", c.transformer.query_pe_hidden},
        {"offset_attention", c.transformer.offset_attention},
        {"skip_connections", c.transformer.skip_connections}}},
      {"fold",
       {{"points_per_center", c.fold.points_per_center},
        {"mix_width", c.fold.mix_width},
        {"fold_hidden", c.fold.fold_hidden}}},
  };
}

// Missing keys keep their defaults so partial JSON overrides work.
void from_json(const nlohmann::json& j, ModelConfig& c) {
  auto get = [](const nlohmann::json& obj, const char* key, auto& field) {
    if (obj.contains(key)) obj.at(key).get_to(field);
  };
  get(j, "input_points", c.input_points);
  if (j.contains("embed")) {
    const auto& e = j.at("embed");
    get(e, "regions", c.embed.regions);
    get(e, "group_size", c.embed.group_size);
    get(e, "edge_k", c.embed.edge_k);
    get(e, "edge_width1", c.embed.edge_width1);
    get(e, "edge_width2", c.embed.edge_width2);
    get(e, "pe_hidden", c.embed.pe_hidden);
    get(e, "pe_width", c.embed.pe_width);
  }
  if (j.contains("transformer")) {
    const auto& t = j.at("transformer");
    get(t, "d_model", c.transformer.d_model);
    get(t, "heads", c.transformer.heads);
    get(t, "enc_layers", c.transformer.enc_layers);
    get(t, "dec_layers", c.transformer.dec_layers);
    get(t, "global_width", c.transformer.global_width);
    get(t, "queries", c.transformer.queries);
    get(t, "decoder_width", c.transformer.decoder_width);
    get(t, "query_pe_hidden", c.transformer.query_pe_hidden);
    get(t, "offset_attention", c.transformer.offset_attention);
    get(t, "skip_connections", c.transformer.skip_connections);
  }
  if (j.contains("fold")) {
    const auto& f = j.at("fold");
    get(f, "points_per_center", c.fold.points_per_center);
    get(f, "mix_width", c.fold.mix_width);
    get(f, "fold_hidden", c.fold.fold_hidden);
  }
}

}  // namespace pcc::model
