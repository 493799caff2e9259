#pragma once

#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "bwet/crf/crf.hpp"
#include "bwet/embeddings/provider.hpp"
#include "bwet/encoder/encoder.hpp"
#include "bwet/numerics/archive.hpp"
#include "bwet/pipeline/config.hpp"
#include "bwet/techword/idcnn.hpp"

namespace bwet {

/// Embedding -> IDCNN word features -> fusion -> Transformer encoder ->
/// emission projection -> linear-chain CRF.
template <typename T>
class BwetModel {
 public:
  BwetModel() = default;

  BwetModel(ModelConfig config, TagVocab tags, EmbeddingProvider<T> embedding)
      : config_(std::move(config)), tags_(std::move(tags)), embedding_(std::move(embedding)) {
    config_.d_emb = embedding_.d_emb();
    config_.embedding_mode = embedding_.mode();
    config_.validate();
    std::mt19937_64 rng(config_.seed);
    if (config_.use_fusion) idcnn_ = IdcnnParams<T>::init(config_.idcnn, config_.d_emb, rng);
    encoder_ = EncoderParams<T>::init(config_.encoder(), rng);
    emit_ = EmissionProjection<T>::init(config_.d_model(), tags_.size(), rng);
    trans_ = TransitionMatrix<T>(tags_, config_.crf_constrained);
  }

  /// Builds a fresh model; trainable embeddings draw from the run seed, static
  /// ones are read from config.embedding_path.
  static BwetModel create(ModelConfig config, TagVocab tags, const Vocab& vocab) {
    if (config.embedding_mode == EmbeddingMode::static_pretrained) {
      auto provider = load_pretrained<T>(config.embedding_path);
      if (provider.d_emb() != config.d_emb) {
        std::cerr << "warning: d_emb " << config.d_emb << " replaced by pretrained dimension " << provider.d_emb()
                  << '\n';
      }
      return BwetModel(std::move(config), std::move(tags), std::move(provider));
    }
    std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ull);
    auto provider = EmbeddingProvider<T>::trainable(vocab, config.d_emb, rng);
    return BwetModel(std::move(config), std::move(tags), std::move(provider));
  }

  const ModelConfig& config() const { return config_; }
  const TagVocab& tags() const { return tags_; }
  const EmbeddingProvider<T>& embedding() const { return embedding_; }
  EmbeddingProvider<T>& embedding() { return embedding_; }
  const TransitionMatrix<T>& transitions() const { return trans_; }
  TransitionMatrix<T>& transitions() { return trans_; }
  EncoderConfig encoder_config() const { return config_.encoder(); }

  /// [L, T] emission scores for `tokens` (L must not exceed max_len).
  Var<T> emissions(const std::vector<std::string>& tokens, bool training, std::mt19937_64& rng) const {
    if (tokens.empty()) throw UsageError("forward: empty sentence");
    if (tokens.size() > config_.max_len) {
      throw DimensionError("forward: sentence of " + std::to_string(tokens.size()) + " tokens exceeds max_len " +
                           std::to_string(config_.max_len) + " (truncate first)");
    }
    Var<T> x = embedding_.encode_tokens(tokens);
    if (config_.use_fusion) {
      x = fuse(x, idcnn_forward(x, idcnn_, config_.idcnn), config_.dropout, training, rng);
    } else {
      x = dropout(x, config_.dropout, training, rng);
    }
    if (config_.position_mode == PositionMode::absolute) x = add_absolute_positions(x);
    x = encode(x, encoder_, config_.encoder(), training, rng);
    return emit_(x);
  }

  Var<T> emissions(const std::vector<std::string>& tokens) const {
    std::mt19937_64 unused(0);
    return emissions(tokens, false, unused);
  }

  /// CRF negative log-likelihood, or summed token cross-entropy without a CRF.
  Var<T> loss(const std::vector<std::string>& tokens, const std::vector<std::size_t>& gold, bool training,
              std::mt19937_64& rng) const {
    Var<T> e = emissions(tokens, training, rng);
    return config_.use_crf ? crf_nll(e, gold, trans_) : softmax_cross_entropy(e, gold);
  }

  /// Viterbi path, or per-position argmax without a CRF.
  std::vector<std::size_t> decode(const std::vector<std::string>& tokens) const {
    Var<T> e = emissions(tokens);
    if (config_.use_crf) return viterbi_decode(e.value(), trans_).tags;
    const std::size_t L = e.shape()[0], K = e.shape()[1];
    std::vector<std::size_t> out(L);
    for (std::size_t t = 0; t < L; ++t) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < K; ++k)
        if (e.value()[t * K + k] > e.value()[t * K + best]) best = k;
      out[t] = best;
    }
    return out;
  }

  /// Every tensor that belongs in a checkpoint, trainable or not.
  std::vector<std::pair<std::string, Var<T>>> named_tensors() const {
    std::vector<std::pair<std::string, Var<T>>> out;
    out.emplace_back("embedding.table", embedding_.table());
    for (auto& p : idcnn_.named()) out.push_back(std::move(p));
    for (auto& p : encoder_.named()) out.push_back(std::move(p));
    out.emplace_back("crf.emit.w", emit_.w);
    out.emplace_back("crf.emit.b", emit_.b);
    if (config_.use_crf) out.emplace_back("crf.transitions", trans_.scores());
    return out;
  }

  /// Tensors updated by the optimizer.
  std::vector<Var<T>> parameters() const {
    std::vector<Var<T>> out;
    for (auto& [name, v] : named_tensors())
      if (v.requires_grad()) out.push_back(v);
    return out;
  }

  void zero_grad() {
    for (auto& [name, v] : named_tensors()) v.zero_grad();
  }

  TensorArchive to_archive() const {
    TensorArchive ar;
    ar.metadata() = {{"kind", "bwet-model"},
                     {"config", to_json(config_)},
                     {"tag_vocab", tags_.tags()},
                     {"vocab", embedding_.vocab().tokens()}};
    for (const auto& [name, v] : named_tensors()) ar.put(name, v.value());
    return ar;
  }

  void save(const std::string& path) const { to_archive().save(path); }

  static BwetModel from_archive(const TensorArchive& ar) {
    const auto& meta = ar.metadata();
    if (!meta.contains("kind") || meta["kind"] != "bwet-model") throw FormatError("checkpoint: not a model archive");
    ModelConfig config = config_from_json(meta.at("config"));
    TagVocab tags(meta.at("tag_vocab").get<std::vector<std::string>>());
    Vocab vocab = Vocab::from_tokens(meta.at("vocab").get<std::vector<std::string>>());
    EmbeddingProvider<T> provider(config.embedding_mode, std::move(vocab), ar.get<T>("embedding.table"));
    BwetModel model(std::move(config), std::move(tags), std::move(provider));
    for (auto& [name, v] : model.named_tensors()) {
      if (name == "embedding.table") continue;
      Tensor<T> t = ar.get<T>(name);
      if (t.shape() != v.shape()) {
        throw FormatError("checkpoint: tensor '" + name + "' has shape " + shape_str(t.shape()) + ", model expects " +
                          shape_str(v.shape()));
      }
      Var<T> handle = v;
      handle.mutable_value() = std::move(t);
    }
    return model;
  }

  static BwetModel load(const std::string& path) { return from_archive(TensorArchive::load(path)); }

 private:
  ModelConfig config_;
  TagVocab tags_;
  EmbeddingProvider<T> embedding_;
  IdcnnParams<T> idcnn_;
  EncoderParams<T> encoder_;
  EmissionProjection<T> emit_;
  TransitionMatrix<T> trans_;
};

}  // namespace bwet
