#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bwet/numerics/ops.hpp"

namespace bwet {

struct IdcnnConfig {
  std::size_t kernel_size = 3;
  std::size_t filters = 128;
  std::vector<std::size_t> dilations{1, 1, 2};
  std::size_t iterations = 1;  // repetitions of the dilation unit, each with its own weights

  void validate() const {
    if (kernel_size == 0 || kernel_size % 2 == 0) {
      throw ConfigError("idcnn.kernel_size must be odd and positive, got " + std::to_string(kernel_size));
    }
    if (filters == 0) throw ConfigError("idcnn.filters must be positive");
    if (dilations.empty()) throw ConfigError("idcnn.dilations must not be empty");
    for (auto d : dilations)
      if (d == 0) throw ConfigError("idcnn.dilations entries must be positive");
    if (iterations == 0) throw ConfigError("idcnn.iterations must be positive");
  }

  std::size_t num_layers() const { return dilations.size() * iterations; }
  std::size_t dilation(std::size_t layer) const { return dilations[layer % dilations.size()]; }

  /// Input positions on each side that can reach one output position.
  std::size_t receptive_radius() const {
    std::size_t r = 0;
    for (std::size_t l = 0; l < num_layers(); ++l) r += (kernel_size - 1) / 2 * dilation(l);
    return r;
  }
};

template <typename T>
struct IdcnnParams {
  std::vector<Var<T>> kernels;  // layer 0: [k, d_emb, filters]; later: [k, filters, filters]
  std::vector<Var<T>> biases;   // [filters]

  /// Kaiming-uniform kernels (bound sqrt(6 / fan_in)), zero biases.
  static IdcnnParams init(const IdcnnConfig& cfg, std::size_t d_emb, std::mt19937_64& rng) {
    cfg.validate();
    IdcnnParams p;
    for (std::size_t l = 0; l < cfg.num_layers(); ++l) {
      const std::size_t cin = l == 0 ? d_emb : cfg.filters;
      Tensor<T> k({cfg.kernel_size, cin, cfg.filters});
      const double bound = std::sqrt(6.0 / static_cast<double>(cfg.kernel_size * cin));
      for (auto& x : k.buffer()) x = static_cast<T>((detail::uniform01(rng) * 2.0 - 1.0) * bound);
      p.kernels.push_back(Var<T>::param(std::move(k)));
      p.biases.push_back(Var<T>::param(Tensor<T>({cfg.filters})));
    }
    return p;
  }

  std::vector<std::pair<std::string, Var<T>>> named() const {
    std::vector<std::pair<std::string, Var<T>>> out;
    for (std::size_t l = 0; l < kernels.size(); ++l) {
      out.emplace_back("idcnn.layer" + std::to_string(l) + ".kernel", kernels[l]);
      out.emplace_back("idcnn.layer" + std::to_string(l) + ".bias", biases[l]);
    }
    return out;
  }
};

/// Stack of (dilated conv -> ReLU) layers; sequence length is preserved.
template <typename T>
Var<T> idcnn_forward(const Var<T>& x, const IdcnnParams<T>& params, const IdcnnConfig& cfg) {
  if (params.kernels.size() != cfg.num_layers()) {
    throw DimensionError("idcnn_forward: " + std::to_string(params.kernels.size()) +
                         " kernels for " + std::to_string(cfg.num_layers()) + " layers");
  }
  Var<T> h = x;
  for (std::size_t l = 0; l < cfg.num_layers(); ++l) {
    h = relu(conv1d_dilated(h, params.kernels[l], params.biases[l], cfg.dilation(l)));
  }
  return h;
}

/// Per-position concatenation [x_t ‖ w_t] followed by dropout.
template <typename T>
Var<T> fuse(const Var<T>& x, const Var<T>& w, double dropout_rate, bool training,
            std::mt19937_64& rng) {
  if (x.shape().at(0) != w.shape().at(0)) {
    throw DimensionError("fuse: sequence lengths differ " + shape_str(x.shape()) + " vs " +
                         shape_str(w.shape()));
  }
  return dropout(concat_last_axis(x, w), dropout_rate, training, rng);
}

}  // namespace bwet
