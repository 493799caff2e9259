#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "bwet/crf/tag_vocab.hpp"
#include "bwet/numerics/ops.hpp"

namespace bwet {

/// Transition scores over tags plus virtual START (= T) and STOP (= T+1).
/// Cells marked disallowed act as -inf: decoding and the partition function
/// skip them outright, and they never receive gradient.
template <typename T>
class TransitionMatrix {
 public:
  TransitionMatrix() = default;

  /// Zero-initialized scores. START is never a destination and STOP never a
  /// source; with `constrained`, I-X may only follow B-X or I-X.
  TransitionMatrix(const TagVocab& vocab, bool constrained)
      : num_tags_(vocab.size()), constrained_(constrained) {
    const std::size_t n = num_tags_ + 2;
    scores_ = Var<T>::param(Tensor<T>({n, n}));
    allowed_.assign(n * n, 1);
    for (std::size_t from = 0; from < n; ++from) {
      allowed_[from * n + start()] = 0;
      allowed_[stop() * n + from] = 0;
    }
    if (!constrained) return;
    for (std::size_t to = 0; to < num_tags_; ++to) {
      BioTag t = parse_bio_tag(vocab.tag(to));
      if (t.prefix != 'I') continue;
      for (std::size_t from = 0; from < n; ++from) {
        bool ok = false;
        if (from < num_tags_) {
          BioTag f = parse_bio_tag(vocab.tag(from));
          ok = f.prefix != 'O' && f.type == t.type;
        }
        if (!ok) allowed_[from * n + to] = 0;
      }
    }
  }

  std::size_t num_tags() const { return num_tags_; }
  std::size_t start() const { return num_tags_; }
  std::size_t stop() const { return num_tags_ + 1; }
  std::size_t width() const { return num_tags_ + 2; }
  bool constrained() const { return constrained_; }

  Var<T>& scores() { return scores_; }
  const Var<T>& scores() const { return scores_; }

  bool allowed(std::size_t from, std::size_t to) const { return allowed_[from * width() + to] != 0; }
  const std::vector<char>& allowed_mask() const { return allowed_; }

  /// Effective score: the stored parameter, or -inf for a disallowed cell.
  T score(std::size_t from, std::size_t to) const {
    return allowed(from, to) ? scores_.value()[from * width() + to]
                             : -std::numeric_limits<T>::infinity();
  }

  /// Fills every allowed cell with draws from U(lo, hi).
  void randomize(std::mt19937_64& rng, double lo, double hi) {
    auto& buf = scores_.mutable_value().buffer();
    for (std::size_t i = 0; i < buf.size(); ++i)
      buf[i] = allowed_[i] ? static_cast<T>(lo + (hi - lo) * detail::uniform01(rng)) : T{0};
  }

 private:
  std::size_t num_tags_ = 0;
  bool constrained_ = false;
  Var<T> scores_;
  std::vector<char> allowed_;
};

template <typename T>
TransitionMatrix<T> build_constrained_transitions(const TagVocab& vocab) {
  return TransitionMatrix<T>(vocab, true);
}

namespace detail {

template <typename T>
void check_emissions(const Tensor<T>& emissions, const TransitionMatrix<T>& trans) {
  if (emissions.rank() != 2 || emissions.cols() != trans.num_tags()) {
    throw DimensionError("crf: emissions " + shape_str(emissions.shape()) + " do not match " +
                         std::to_string(trans.num_tags()) + " tags");
  }
}

inline void check_tags(const std::vector<std::size_t>& tags, std::size_t L, std::size_t num_tags) {
  if (tags.size() != L) {
    throw DimensionError("crf: tag sequence has length " + std::to_string(tags.size()) +
                         ", emissions have " + std::to_string(L) + " rows");
  }
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] >= num_tags) {
      throw DimensionError("crf: tag index " + std::to_string(tags[i]) + " at position " +
                           std::to_string(i) + " is out of range for " + std::to_string(num_tags) + " tags");
    }
  }
}

/// log(sum(exp)) over finite entries; -inf if none.
template <typename T>
T log_sum_exp(const std::vector<T>& xs) {
  T mx = -std::numeric_limits<T>::infinity();
  for (T x : xs) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  T acc{0};
  for (T x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

/// Log-space forward (alpha) table [L, T]; returns log Z.
template <typename T>
T forward_table(const Tensor<T>& P, const TransitionMatrix<T>& A, std::vector<T>& alpha) {
  const std::size_t L = P.rows(), K = A.num_tags();
  alpha.assign(L * K, T{0});
  for (std::size_t y = 0; y < K; ++y) alpha[y] = A.score(A.start(), y) + P[y];
  std::vector<T> terms;
  for (std::size_t t = 1; t < L; ++t)
    for (std::size_t y = 0; y < K; ++y) {
      terms.clear();
      for (std::size_t p = 0; p < K; ++p)
        if (A.allowed(p, y)) terms.push_back(alpha[(t - 1) * K + p] + A.score(p, y));
      alpha[t * K + y] = log_sum_exp(terms) + P[t * K + y];
    }
  terms.clear();
  for (std::size_t y = 0; y < K; ++y)
    if (A.allowed(y, A.stop())) terms.push_back(alpha[(L - 1) * K + y] + A.score(y, A.stop()));
  return log_sum_exp(terms);
}

template <typename T>
void backward_table(const Tensor<T>& P, const TransitionMatrix<T>& A, std::vector<T>& beta) {
  const std::size_t L = P.rows(), K = A.num_tags();
  beta.assign(L * K, T{0});
  for (std::size_t y = 0; y < K; ++y) beta[(L - 1) * K + y] = A.score(y, A.stop());
  std::vector<T> terms;
  for (std::size_t t = L - 1; t-- > 0;)
    for (std::size_t y = 0; y < K; ++y) {
      terms.clear();
      for (std::size_t n = 0; n < K; ++n)
        if (A.allowed(y, n)) terms.push_back(A.score(y, n) + P[(t + 1) * K + n] + beta[(t + 1) * K + n]);
      beta[t * K + y] = log_sum_exp(terms);
    }
}

}  // namespace detail

/// s(x, y) = A(START, y_1) + sum_i A(y_{i-1}, y_i) + A(y_L, STOP) + sum_i P(i, y_i).
/// Accumulation order matches viterbi_decode so the two agree bit-for-bit.
template <typename T>
T score_sequence(const Tensor<T>& emissions, const std::vector<std::size_t>& tags,
                 const TransitionMatrix<T>& trans) {
  detail::check_emissions(emissions, trans);
  const std::size_t K = trans.num_tags();
  detail::check_tags(tags, emissions.rows(), K);
  T s = trans.score(trans.start(), tags[0]) + emissions[tags[0]];
  for (std::size_t i = 1; i < tags.size(); ++i) {
    s = s + trans.score(tags[i - 1], tags[i]);
    s = s + emissions[i * K + tags[i]];
  }
  return s + trans.score(tags.back(), trans.stop());
}

/// log sum_y' exp(s(x, y')) by the forward algorithm.
template <typename T>
T log_partition(const Tensor<T>& emissions, const TransitionMatrix<T>& trans) {
  detail::check_emissions(emissions, trans);
  std::vector<T> alpha;
  return detail::forward_table(emissions, trans, alpha);
}

/// Differentiable negative log-likelihood log Z - s(x, gold) with respect to
/// both the emissions and the transition scores.
template <typename T>
Var<T> crf_nll(const Var<T>& emissions, const std::vector<std::size_t>& gold,
               const TransitionMatrix<T>& trans) {
  const Tensor<T>& P = emissions.value();
  detail::check_emissions(P, trans);
  const std::size_t L = P.rows(), K = trans.num_tags(), W = trans.width();
  detail::check_tags(gold, L, K);

  std::vector<T> alpha, beta;
  const T log_z = detail::forward_table(P, trans, alpha);
  const T gold_score = score_sequence(P, gold, trans);
  const T nll = log_z - gold_score;

  // Gradients are computed eagerly; the closure scales by the upstream grad.
  std::vector<T> d_emit(L * K, T{0}), d_trans(W * W, T{0});
  detail::backward_table(P, trans, beta);
  for (std::size_t t = 0; t < L; ++t)
    for (std::size_t y = 0; y < K; ++y) d_emit[t * K + y] = std::exp(alpha[t * K + y] + beta[t * K + y] - log_z);
  for (std::size_t y = 0; y < K; ++y) {
    if (trans.allowed(trans.start(), y)) d_trans[trans.start() * W + y] += d_emit[y];
    if (trans.allowed(y, trans.stop())) d_trans[y * W + trans.stop()] += d_emit[(L - 1) * K + y];
  }
  for (std::size_t t = 1; t < L; ++t)
    for (std::size_t p = 0; p < K; ++p)
      for (std::size_t y = 0; y < K; ++y) {
        if (!trans.allowed(p, y)) continue;
        d_trans[p * W + y] += std::exp(alpha[(t - 1) * K + p] + trans.score(p, y) + P[t * K + y] +
                                       beta[t * K + y] - log_z);
      }
  for (std::size_t t = 0; t < L; ++t) d_emit[t * K + gold[t]] -= T{1};
  d_trans[trans.start() * W + gold[0]] -= T{1};
  d_trans[gold.back() * W + trans.stop()] -= T{1};
  for (std::size_t t = 1; t < L; ++t) d_trans[gold[t - 1] * W + gold[t]] -= T{1};

  return Var<T>::from_op(Tensor<T>({1}, std::vector<T>{nll}), {emissions, trans.scores()},
                         [d_emit = std::move(d_emit), d_trans = std::move(d_trans)](Node<T>& n) {
                           const T up = n.grad[0];
                           if (auto* g = detail::grad_of(n, 0))
                             for (std::size_t i = 0; i < d_emit.size(); ++i) (*g)[i] += up * d_emit[i];
                           if (auto* g = detail::grad_of(n, 1))
                             for (std::size_t i = 0; i < d_trans.size(); ++i) (*g)[i] += up * d_trans[i];
                         });
}

template <typename T>
T neg_log_likelihood(const Tensor<T>& emissions, const std::vector<std::size_t>& gold,
                     const TransitionMatrix<T>& trans) {
  return log_partition(emissions, trans) - score_sequence(emissions, gold, trans);
}

template <typename T>
struct ViterbiResult {
  std::vector<std::size_t> tags;
  T score;
};

/// Highest-scoring tag sequence. Ties go to the lowest tag index at every
/// comparison.
template <typename T>
ViterbiResult<T> viterbi_decode(const Tensor<T>& emissions, const TransitionMatrix<T>& trans) {
  detail::check_emissions(emissions, trans);
  const std::size_t L = emissions.rows(), K = trans.num_tags();
  constexpr T kNegInf = -std::numeric_limits<T>::infinity();
  std::vector<T> delta(K), next(K);
  std::vector<std::size_t> back(L * K, 0);
  for (std::size_t y = 0; y < K; ++y) {
    delta[y] = trans.allowed(trans.start(), y) ? trans.score(trans.start(), y) + emissions[y] : kNegInf;
  }
  for (std::size_t t = 1; t < L; ++t) {
    for (std::size_t y = 0; y < K; ++y) {
      T best = kNegInf;
      std::size_t arg = 0;
      bool found = false;
      for (std::size_t p = 0; p < K; ++p) {
        if (!trans.allowed(p, y) || delta[p] == kNegInf) continue;
        const T s = delta[p] + trans.score(p, y);
        if (!found || s > best) {
          best = s;
          arg = p;
          found = true;
        }
      }
      next[y] = found ? best + emissions[t * K + y] : kNegInf;
      back[t * K + y] = arg;
    }
    std::swap(delta, next);
  }
  T best = kNegInf;
  std::size_t last = 0;
  bool found = false;
  for (std::size_t y = 0; y < K; ++y) {
    if (!trans.allowed(y, trans.stop()) || delta[y] == kNegInf) continue;
    const T s = delta[y] + trans.score(y, trans.stop());
    if (!found || s > best) {
      best = s;
      last = y;
      found = true;
    }
  }
  ViterbiResult<T> out{std::vector<std::size_t>(L), best};
  out.tags[L - 1] = last;
  for (std::size_t t = L - 1; t > 0; --t) out.tags[t - 1] = back[t * K + out.tags[t]];
  return out;
}

/// Affine map from encoder features to per-tag emission scores.
template <typename T>
struct EmissionProjection {
  Var<T> w;  // [d_model, T]
  Var<T> b;  // [T]

  static EmissionProjection init(std::size_t d_model, std::size_t num_tags, std::mt19937_64& rng) {
    Tensor<T> w({d_model, num_tags});
    const double bound = std::sqrt(6.0 / static_cast<double>(d_model + num_tags));
    for (auto& x : w.buffer()) x = static_cast<T>((detail::uniform01(rng) * 2.0 - 1.0) * bound);
    return {Var<T>::param(std::move(w)), Var<T>::param(Tensor<T>({num_tags}))};
  }

  Var<T> operator()(const Var<T>& features) const { return add_bias(matmul(features, w), b); }
};

}  // namespace bwet
