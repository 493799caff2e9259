#pragma once

#include <random>
#include <string>
#include <vector>

#include "bwet/encoder/attention.hpp"

namespace bwet {

struct EncoderConfig {
  std::size_t num_layers = 4;
  std::size_t num_heads = 16;
  std::size_t d_model = 896;
  std::size_t d_ff = 0;  // 0 selects 4 * d_model
  double dropout = 0.5;
  PositionMode position_mode = PositionMode::relative;
  RelValueTerm rel_value_term = RelValueTerm::literal;
  std::size_t max_len = 128;

  std::size_t d_head() const { return d_model / num_heads; }
  std::size_t ff_width() const { return d_ff ? d_ff : 4 * d_model; }

  void validate() const {
    if (num_heads == 0) throw ConfigError("encoder.num_heads must be positive");
    if (d_model == 0 || d_model % num_heads != 0) {
      throw ConfigError("encoder: d_model " + std::to_string(d_model) +
                        " is not divisible by num_heads " + std::to_string(num_heads));
    }
    if (d_head() % 2 != 0) {
      throw ConfigError("encoder: d_head " + std::to_string(d_head()) +
                        " must be even for sinusoidal encodings");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("encoder.dropout must lie in [0,1)");
    if (max_len == 0) throw ConfigError("encoder.max_len must be positive");
  }
};

template <typename T>
struct EncoderLayerParams {
  std::vector<AttentionParams<T>> heads;
  Var<T> wo;                  // [d_model, d_model]
  Var<T> w1, b1, w2, b2;      // feed-forward
  Var<T> ln1_gain, ln1_shift, ln2_gain, ln2_shift;

  static EncoderLayerParams init(const EncoderConfig& cfg, std::mt19937_64& rng) {
    auto xavier = [&](std::size_t fan_in, std::size_t fan_out) {
      Tensor<T> w({fan_in, fan_out});
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (auto& x : w.buffer()) x = static_cast<T>((detail::uniform01(rng) * 2.0 - 1.0) * bound);
      return Var<T>::param(std::move(w));
    };
    const std::size_t d = cfg.d_model, ff = cfg.ff_width();
    EncoderLayerParams p;
    for (std::size_t h = 0; h < cfg.num_heads; ++h)
      p.heads.push_back(AttentionParams<T>::init(cfg.d_head(), cfg.position_mode, rng));
    p.wo = xavier(d, d);
    p.w1 = xavier(d, ff);
    p.b1 = Var<T>::param(Tensor<T>({ff}));
    p.w2 = xavier(ff, d);
    p.b2 = Var<T>::param(Tensor<T>({d}));
    p.ln1_gain = Var<T>::param(Tensor<T>({d}, T{1}));
    p.ln1_shift = Var<T>::param(Tensor<T>({d}));
    p.ln2_gain = Var<T>::param(Tensor<T>({d}, T{1}));
    p.ln2_shift = Var<T>::param(Tensor<T>({d}));
    return p;
  }
};

template <typename T>
struct EncoderParams {
  std::vector<EncoderLayerParams<T>> layers;
  RelPosTable<T> rel_table;

  static EncoderParams init(const EncoderConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    EncoderParams p;
    for (std::size_t l = 0; l < cfg.num_layers; ++l) p.layers.push_back(EncoderLayerParams<T>::init(cfg, rng));
    p.rel_table = RelPosTable<T>(cfg.max_len, cfg.d_head());
    return p;
  }

  std::vector<std::pair<std::string, Var<T>>> named() const {
    std::vector<std::pair<std::string, Var<T>>> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      const std::string base = "encoder.layer" + std::to_string(l);
      for (std::size_t h = 0; h < L.heads.size(); ++h) {
        const std::string hb = base + ".head" + std::to_string(h);
        out.emplace_back(hb + ".wq", L.heads[h].wq);
        out.emplace_back(hb + ".wk", L.heads[h].wk);
        out.emplace_back(hb + ".wv", L.heads[h].wv);
        if (L.heads[h].u.defined()) {
          out.emplace_back(hb + ".u", L.heads[h].u);
          out.emplace_back(hb + ".v", L.heads[h].v);
        }
      }
      out.emplace_back(base + ".wo", L.wo);
      out.emplace_back(base + ".ffn.w1", L.w1);
      out.emplace_back(base + ".ffn.b1", L.b1);
      out.emplace_back(base + ".ffn.w2", L.w2);
      out.emplace_back(base + ".ffn.b2", L.b2);
      out.emplace_back(base + ".ln1.gain", L.ln1_gain);
      out.emplace_back(base + ".ln1.shift", L.ln1_shift);
      out.emplace_back(base + ".ln2.gain", L.ln2_gain);
      out.emplace_back(base + ".ln2.shift", L.ln2_shift);
    }
    return out;
  }
};

/// Heads read disjoint column slices of x; outputs are concatenated and
/// mixed by W^o.
template <typename T>
Var<T> multi_head_attention(const Var<T>& x, const EncoderLayerParams<T>& p, const EncoderConfig& cfg,
                            const RelPosTable<T>& rel) {
  const std::size_t dh = cfg.d_head();
  std::vector<Var<T>> outs;
  outs.reserve(p.heads.size());
  for (std::size_t h = 0; h < p.heads.size(); ++h) {
    Var<T> slice = p.heads.size() == 1 ? x : slice_columns(x, h * dh, (h + 1) * dh);
    outs.push_back(attention_head(slice, p.heads[h], cfg.position_mode, &rel, cfg.rel_value_term));
  }
  Var<T> joined = outs.size() == 1 ? outs[0] : concat_last_axis(outs);
  return matmul(joined, p.wo);
}

/// Post-norm layer: y = LN(x + Drop(MHA(x))); out = LN(y + Drop(FFN(y))).
template <typename T>
Var<T> encoder_layer(const Var<T>& x, const EncoderLayerParams<T>& p, const EncoderConfig& cfg,
                     const RelPosTable<T>& rel, bool training, std::mt19937_64& rng) {
  if (x.shape().size() != 2 || x.shape()[1] != cfg.d_model) {
    throw DimensionError("encoder_layer: input " + shape_str(x.shape()) + " vs d_model " +
                         std::to_string(cfg.d_model));
  }
  if (x.shape()[0] > cfg.max_len) {
    throw DimensionError("encoder_layer: length " + std::to_string(x.shape()[0]) +
                         " exceeds max_len " + std::to_string(cfg.max_len));
  }
  Var<T> attn = multi_head_attention(x, p, cfg, rel);
  Var<T> y = layer_norm(add(x, dropout(attn, cfg.dropout, training, rng)), p.ln1_gain, p.ln1_shift);
  Var<T> ff = add_bias(matmul(relu(add_bias(matmul(y, p.w1), p.b1)), p.w2), p.b2);
  return layer_norm(add(y, dropout(ff, cfg.dropout, training, rng)), p.ln2_gain, p.ln2_shift);
}

template <typename T>
Var<T> encode(const Var<T>& x, const EncoderParams<T>& params, const EncoderConfig& cfg, bool training,
              std::mt19937_64& rng) {
  Var<T> h = x;
  for (const auto& layer : params.layers) h = encoder_layer(h, layer, cfg, params.rel_table, training, rng);
  return h;
}

/// Adds the absolute sinusoidal table to a [L, d] input (absolute mode only).
template <typename T>
Var<T> add_absolute_positions(const Var<T>& x) {
  return add(x, Var<T>::constant(absolute_position_table<T>(x.shape().at(0), x.shape().at(1))));
}

}  // namespace bwet
