#pragma once

#include <cstdint>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>

#include "bwet/embeddings/provider.hpp"
#include "bwet/embeddings/tokenize.hpp"
#include "bwet/encoder/encoder.hpp"
#include "bwet/techword/idcnn.hpp"

namespace bwet {

/// Full model + training configuration. Defaults are the reference
/// hyperparameters: 768-d embeddings, 128 kernel-3 filters with dilations
/// (1,1,2), 4 layers x 16 heads, max length 128, batch 32, 100 epochs,
/// lr 1e-4, dropout 0.5.
struct ModelConfig {
  Tokenization tokenization = Tokenization::character;
  std::size_t d_emb = 768;
  EmbeddingMode embedding_mode = EmbeddingMode::trainable_table;
  std::string embedding_path;
  bool use_fusion = true;
  IdcnnConfig idcnn;
  std::size_t num_layers = 4;
  std::size_t num_heads = 16;
  std::size_t d_ff = 0;
  PositionMode position_mode = PositionMode::relative;
  RelValueTerm rel_value_term = RelValueTerm::literal;
  bool crf_constrained = true;
  bool use_crf = true;
  std::size_t max_len = 128;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double lr = 1e-4;
  double dropout = 0.5;
  double grad_clip = 5.0;
  std::uint64_t seed = 42;

  std::size_t d_model() const { return use_fusion ? d_emb + idcnn.filters : d_emb; }

  EncoderConfig encoder() const {
    EncoderConfig e;
    e.num_layers = num_layers;
    e.num_heads = num_heads;
    e.d_model = d_model();
    e.d_ff = d_ff;
    e.dropout = dropout;
    e.position_mode = position_mode;
    e.rel_value_term = rel_value_term;
    e.max_len = max_len;
    return e;
  }

  void validate() const {
    if (d_emb == 0) throw ConfigError("d_emb must be positive");
    if (embedding_mode == EmbeddingMode::static_pretrained && embedding_path.empty()) {
      throw ConfigError("embedding_path is required for static_pretrained embeddings");
    }
    idcnn.validate();
    if (max_len == 0) throw ConfigError("max_len must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(lr > 0)) throw ConfigError("lr must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)");
    if (grad_clip < 0) throw ConfigError("grad_clip must be non-negative (0 disables clipping)");
    if (position_mode == PositionMode::absolute && d_model() % 2 != 0) {
      throw ConfigError("absolute positions need an even d_model");
    }
    encoder().validate();
  }
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"tokenization", tokenization_name(c.tokenization)},
      {"d_emb", c.d_emb},
      {"embedding_mode", embedding_mode_name(c.embedding_mode)},
      {"embedding_path", c.embedding_path},
      {"use_fusion", c.use_fusion},
      {"idcnn",
       {{"kernel_size", c.idcnn.kernel_size},
        {"filters", c.idcnn.filters},
        {"dilations", c.idcnn.dilations},
        {"iterations", c.idcnn.iterations}}},
      {"encoder",
       {{"num_layers", c.num_layers},
        {"num_heads", c.num_heads},
        {"d_ff", c.d_ff},
        {"position_mode", position_mode_name(c.position_mode)},
        {"rel_value_term", rel_value_term_name(c.rel_value_term)}}},
      {"crf_constrained", c.crf_constrained},
      {"use_crf", c.use_crf},
      {"max_len", c.max_len},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"lr", c.lr},
      {"dropout", c.dropout},
      {"grad_clip", c.grad_clip},
      {"seed", c.seed},
  };
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

template <typename U>
void read_field(const nlohmann::json& j, const char* key, U& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    if constexpr (std::is_same_v<U, std::size_t> || std::is_same_v<U, std::uint64_t>) {
      if (!j.at(key).is_number_unsigned()) throw ConfigError("");
    }
    j.at(key).get_to(out);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Any subset of the fields may be given; missing ones keep their defaults.
/// Unknown keys are an error.
inline ModelConfig config_from_json(const nlohmann::json& j) {
  detail::reject_unknown(j,
                         {"tokenization", "d_emb", "embedding_mode", "embedding_path", "use_fusion", "idcnn",
                          "encoder", "crf_constrained", "use_crf", "max_len", "batch_size", "epochs", "lr",
                          "dropout", "grad_clip", "seed"},
                         "");
  ModelConfig c;
  std::string s;
  if (j.contains("tokenization")) {
    detail::read_field(j, "tokenization", s, "");
    c.tokenization = parse_tokenization(s);
  }
  detail::read_field(j, "d_emb", c.d_emb, "");
  if (j.contains("embedding_mode")) {
    detail::read_field(j, "embedding_mode", s, "");
    c.embedding_mode = parse_embedding_mode(s);
  }
  detail::read_field(j, "embedding_path", c.embedding_path, "");
  detail::read_field(j, "use_fusion", c.use_fusion, "");
  if (j.contains("idcnn")) {
    const auto& d = j.at("idcnn");
    detail::reject_unknown(d, {"kernel_size", "filters", "dilations", "iterations"}, "idcnn.");
    detail::read_field(d, "kernel_size", c.idcnn.kernel_size, "idcnn.");
    detail::read_field(d, "filters", c.idcnn.filters, "idcnn.");
    detail::read_field(d, "dilations", c.idcnn.dilations, "idcnn.");
    detail::read_field(d, "iterations", c.idcnn.iterations, "idcnn.");
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    detail::reject_unknown(e, {"num_layers", "num_heads", "d_ff", "position_mode", "rel_value_term"}, "encoder.");
    detail::read_field(e, "num_layers", c.num_layers, "encoder.");
    detail::read_field(e, "num_heads", c.num_heads, "encoder.");
    detail::read_field(e, "d_ff", c.d_ff, "encoder.");
    if (e.contains("position_mode")) {
      detail::read_field(e, "position_mode", s, "encoder.");
      c.position_mode = parse_position_mode(s);
    }
    if (e.contains("rel_value_term")) {
      detail::read_field(e, "rel_value_term", s, "encoder.");
      c.rel_value_term = parse_rel_value_term(s);
    }
  }
  detail::read_field(j, "crf_constrained", c.crf_constrained, "");
  detail::read_field(j, "use_crf", c.use_crf, "");
  detail::read_field(j, "max_len", c.max_len, "");
  detail::read_field(j, "batch_size", c.batch_size, "");
  detail::read_field(j, "epochs", c.epochs, "");
  detail::read_field(j, "lr", c.lr, "");
  detail::read_field(j, "dropout", c.dropout, "");
  detail::read_field(j, "grad_clip", c.grad_clip, "");
  detail::read_field(j, "seed", c.seed, "");
  c.validate();
  return c;
}

inline ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(path + ": invalid JSON: " + ex.what());
  }
  return config_from_json(j);
}

/// Desk-scale configuration used by the overfit and harness tests:
/// whitespace tokens, 32-d embeddings, 16 filters, 2 layers x 4 heads.
inline ModelConfig toy_config() {
  ModelConfig c;
  c.tokenization = Tokenization::whitespace;
  c.d_emb = 32;
  c.idcnn.filters = 16;
  c.num_layers = 2;
  c.num_heads = 4;
  c.batch_size = 8;
  c.epochs = 200;
  c.lr = 2e-3;
  c.dropout = 0.1;
  c.seed = 7;
  return c;
}

}  // namespace bwet
