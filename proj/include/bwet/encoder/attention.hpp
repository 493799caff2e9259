#pragma once

#include <cmath>
#include <random>
#include <string>

#include "bwet/encoder/positional.hpp"
#include "bwet/numerics/ops.hpp"

namespace bwet {

enum class PositionMode { absolute, relative };

/// How the position-bias term of the relative score treats r_ij:
/// literal reads it as v·r_ij, projected as v·(r_ij W^k).
enum class RelValueTerm { literal, projected };

inline const char* position_mode_name(PositionMode m) {
  return m == PositionMode::absolute ? "absolute" : "relative";
}
inline PositionMode parse_position_mode(const std::string& s) {
  if (s == "absolute") return PositionMode::absolute;
  if (s == "relative") return PositionMode::relative;
  throw ConfigError("unknown position_mode '" + s + "' (expected absolute|relative)");
}
inline const char* rel_value_term_name(RelValueTerm t) {
  return t == RelValueTerm::literal ? "literal" : "projected";
}
inline RelValueTerm parse_rel_value_term(const std::string& s) {
  if (s == "literal") return RelValueTerm::literal;
  if (s == "projected") return RelValueTerm::projected;
  throw ConfigError("unknown rel_value_term '" + s + "' (expected literal|projected)");
}

/// One attention head. Each head reads its own d_head-wide column slice of
/// the layer input, so all projections are [d_head, d_head] and the relative
/// table lives at d_head.
template <typename T>
struct AttentionParams {
  Var<T> wq, wk, wv;
  Var<T> u, v;  // [d_head]; undefined in absolute mode

  static AttentionParams init(std::size_t d_head, PositionMode mode, std::mt19937_64& rng) {
    auto xavier = [&](std::size_t fan_in, std::size_t fan_out) {
      Tensor<T> w({fan_in, fan_out});
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (auto& x : w.buffer()) x = static_cast<T>((detail::uniform01(rng) * 2.0 - 1.0) * bound);
      return Var<T>::param(std::move(w));
    };
    AttentionParams p;
    p.wq = xavier(d_head, d_head);
    p.wk = xavier(d_head, d_head);
    p.wv = xavier(d_head, d_head);
    if (mode == PositionMode::relative) {
      p.u = Var<T>::param(Tensor<T>({d_head}));
      p.v = Var<T>::param(Tensor<T>({d_head}));
    }
    return p;
  }

  std::size_t d_head() const { return wq.shape()[0]; }
};

/// Unscaled relative attention scores for one head over inputs e [L, d_head]:
///   A_ij = (e_i Wq)·((e_j + r_ij) Wk) + u·(e_j Wk) + v·r_ij
/// with r_ij the table row for offset i-j.
template <typename T>
Var<T> relative_scores(const Var<T>& e, const AttentionParams<T>& p, const RelPosTable<T>& rel,
                       RelValueTerm value_term = RelValueTerm::literal) {
  if (!p.u.defined() || !p.v.defined()) {
    throw ConfigError("relative_scores: head has no u/v biases (absolute-mode parameters)");
  }
  const std::size_t L = e.shape().at(0);
  if (e.shape().at(1) != p.d_head() || rel.dim() != p.d_head()) {
    throw DimensionError("relative_scores: input " + shape_str(e.shape()) + " / table dim " +
                         std::to_string(rel.dim()) + " vs d_head " + std::to_string(p.d_head()));
  }
  const std::size_t dh = p.d_head();
  Var<T> q = matmul(e, p.wq);
  Var<T> k = matmul(e, p.wk);
  Var<T> r = Var<T>::constant(rel.window(L));  // [2L-1, dh]
  Var<T> rk = matmul(r, p.wk);

  Var<T> content = matmul(q, transpose(k));                    // q_i · (e_j Wk)
  Var<T> position = offset_gather(matmul(q, transpose(rk)), L);  // q_i · (r_ij Wk)
  Var<T> key_bias = reshape(matmul(k, reshape(p.u, {dh, 1})), {L});  // u · (e_j Wk)
  Var<T> rel_bias_src = value_term == RelValueTerm::literal ? r : rk;
  Var<T> rel_bias = offset_gather(reshape(matmul(rel_bias_src, reshape(p.v, {dh, 1})), {1, 2 * L - 1}), L);

  return add(add_bias(add(content, position), key_bias), rel_bias);
}

/// Unscaled absolute-mode scores (e_i Wq)·(e_j Wk); positions are expected
/// to be added to the inputs beforehand.
template <typename T>
Var<T> absolute_scores(const Var<T>& e, const AttentionParams<T>& p) {
  return matmul(matmul(e, p.wq), transpose(matmul(e, p.wk)));
}

/// Row-softmax of scores scaled by 1/sqrt(d_head).
template <typename T>
Var<T> attention_weights(const Var<T>& scores, std::size_t d_head) {
  return softmax(scale(scores, static_cast<T>(1.0 / std::sqrt(static_cast<double>(d_head)))), 1);
}

template <typename T>
Var<T> attention_head(const Var<T>& e, const AttentionParams<T>& p, PositionMode mode,
                      const RelPosTable<T>* rel, RelValueTerm value_term) {
  Var<T> scores = mode == PositionMode::relative ? relative_scores(e, p, *rel, value_term)
                                                 : absolute_scores(e, p);
  return matmul(attention_weights(scores, p.d_head()), matmul(e, p.wv));
}

/// Four-way split of the absolute attention score
///   ((e+pe)Wq)((e+pe)Wk)^T = (a) + (b) + (c) + (d)
/// with (a) content-content, (b) position-content, (c) content-position,
/// (d) position-position.
template <typename T>
struct AbsScoreTerms {
  Tensor<T> content_content, position_content, content_position, position_position;
};

template <typename T>
AbsScoreTerms<T> decompose_abs_scores(const Tensor<T>& e, const Tensor<T>& pe, const Tensor<T>& wq,
                                      const Tensor<T>& wk) {
  if (e.shape() != pe.shape()) {
    throw DimensionError("decompose_abs_scores: E " + shape_str(e.shape()) + " vs PE " +
                         shape_str(pe.shape()));
  }
  auto t = [](const Tensor<T>& m) {
    Tensor<T> out({m.cols(), m.rows()});
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) out.at(j, i) = m.at(i, j);
    return out;
  };
  const Tensor<T> eq = matmul_values(e, wq), pq = matmul_values(pe, wq);
  const Tensor<T> ekT = t(matmul_values(e, wk)), pkT = t(matmul_values(pe, wk));
  return {matmul_values(eq, ekT), matmul_values(pq, ekT), matmul_values(eq, pkT),
          matmul_values(pq, pkT)};
}

/// Undecomposed absolute score ((e+pe)Wq)((e+pe)Wk)^T.
template <typename T>
Tensor<T> full_abs_scores(const Tensor<T>& e, const Tensor<T>& pe, const Tensor<T>& wq,
                          const Tensor<T>& wk) {
  Tensor<T> x = e;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += pe[i];
  Tensor<T> k = matmul_values(x, wk);
  Tensor<T> kT({k.cols(), k.rows()});
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) kT.at(j, i) = k.at(i, j);
  return matmul_values(matmul_values(x, wq), kT);
}

}  // namespace bwet
