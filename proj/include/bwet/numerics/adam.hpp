#pragma once

#include <cmath>
#include <vector>

#include "bwet/numerics/autodiff.hpp"

namespace bwet {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamOptions options;
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  std::size_t step_count = 0;

  AdamState() = default;
  AdamState(AdamOptions opts, const std::vector<Var<T>>& params) : options(opts) {
    if (!(opts.lr > 0)) throw ConfigError("adam: lr must be positive");
    if (!(opts.beta1 > 0 && opts.beta1 < 1) || !(opts.beta2 > 0 && opts.beta2 < 1)) {
      throw ConfigError("adam: betas must lie in (0,1)");
    }
    if (!(opts.epsilon > 0)) throw ConfigError("adam: epsilon must be positive");
    for (const auto& p : params) {
      first_moment.emplace_back(p.size(), T{0});
      second_moment.emplace_back(p.size(), T{0});
    }
  }
};

/// One bias-corrected Adam update of `params` using `grads`.
///
/// A parameter tensor whose gradient is identically zero is skipped: its
/// values and moments stay untouched. This keeps frozen or unused tensors
/// (and any all-zero gradient step) from drifting on stale momentum.
template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, const std::vector<std::span<const T>>& grads,
               AdamState<T>& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " params, " +
                         std::to_string(grads.size()) + " grads, state for " +
                         std::to_string(state.first_moment.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->size() != grads[k].size() || grads[k].size() != state.first_moment[k].size()) {
      throw DimensionError("adam_step: parameter " + std::to_string(k) + " has shape " +
                           shape_str(params[k]->shape()) + " but gradient/state length differs");
    }
  }
  ++state.step_count;
  const auto& o = state.options;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2 = 1.0 - std::pow(o.beta2, t);
  const T b1 = static_cast<T>(o.beta1), b2 = static_cast<T>(o.beta2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto g = grads[k];
    bool any = false;
    for (T x : g)
      if (x != T{0}) {
        any = true;
        break;
      }
    if (!any) continue;
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    auto& p = params[k]->buffer();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (T{1} - b1) * g[i];
      v[i] = b2 * v[i] + (T{1} - b2) * g[i] * g[i];
      const double mhat = static_cast<double>(m[i]) / bc1;
      const double vhat = static_cast<double>(v[i]) / bc2;
      p[i] -= static_cast<T>(o.lr * mhat / (std::sqrt(vhat) + o.epsilon));
    }
  }
}

/// Convenience overload that reads gradients from the parameters' tape nodes.
template <typename T>
void adam_step(std::vector<Var<T>>& params, AdamState<T>& state) {
  std::vector<Tensor<T>*> values;
  std::vector<std::span<const T>> grads;
  for (auto& p : params) {
    values.push_back(&p.mutable_value());
    grads.push_back(p.grad());
  }
  adam_step(values, grads, state);
}

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(std::vector<Var<T>>& params, double max_norm) {
  double sq = 0.0;
  for (auto& p : params)
    for (T g : p.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto& p : params)
      for (T& g : p.grad()) g *= factor;
  }
  return norm;
}

}  // namespace bwet
