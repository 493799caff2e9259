#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <tuple>
#include <random>
#include <string>
#include <vector>

#include "bwet/bwet.hpp"

namespace bwet::test {

using D = double;
using VarD = Var<double>;
using TensorD = Tensor<double>;

inline TensorD random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  TensorD t(shape);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& x : t.buffer()) x = dist(rng);
  return t;
}

/// Random values bounded away from zero, for piecewise-linear ops.
inline TensorD random_nonzero(const Shape& shape, std::mt19937_64& rng) {
  TensorD t = random_tensor(shape, rng, 0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (auto& x : t.buffer())
    if (sign(rng)) x = -x;
  return t;
}

/// sum(y * W) with fixed random W. A plain sum would hide errors in ops whose
/// outputs sum to a constant (softmax, layer norm).
inline VarD weighted_sum(const VarD& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sum(mul(y, VarD::constant(random_tensor(y.shape(), rng))));
}

using Fn = std::function<VarD(const std::vector<VarD>&)>;

inline GradCheckResult check(const Fn& f, std::vector<TensorD> inputs, double h = 1e-5) {
  std::vector<VarD> vars;
  for (auto& t : inputs) vars.push_back(VarD::param(std::move(t)));
  return grad_check<double>(f, vars, h);
}

/// Fresh scratch directory under the system temp dir.
inline std::string temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bwet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// ---------------------------------------------------------------------------
// Independent oracles shared by the unit tests and the acceptance binary.

inline AttentionParams<double> random_head(std::size_t dh, std::mt19937_64& rng) {
  AttentionParams<double> p;
  p.wq = VarD::param(random_tensor({dh, dh}, rng));
  p.wk = VarD::param(random_tensor({dh, dh}, rng));
  p.wv = VarD::param(random_tensor({dh, dh}, rng));
  p.u = VarD::param(random_tensor({dh}, rng));
  p.v = VarD::param(random_tensor({dh}, rng));
  return p;
}

/// Direct per-(i,j) evaluation of the relative score.
inline TensorD scalar_relative_scores(const TensorD& e, const AttentionParams<double>& p, const RelPosTable<double>& rel,
                               RelValueTerm term) {
  const std::size_t L = e.rows(), d = e.cols();
  const auto& wq = p.wq.value();
  const auto& wk = p.wk.value();
  auto row_times = [&](const std::vector<double>& x, const TensorD& w) {
    std::vector<double> out(d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) out[b] += x[a] * w.at(a, b);
    return out;
  };
  TensorD s({L, L});
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = 0; j < L; ++j) {
      std::vector<double> ei(d), ej(d), r(d), ejr(d);
      auto rr = rel.row(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j));
      for (std::size_t c = 0; c < d; ++c) {
        ei[c] = e.at(i, c);
        ej[c] = e.at(j, c);
        r[c] = rr[c];
        ejr[c] = ej[c] + r[c];
      }
      auto q = row_times(ei, wq), k = row_times(ejr, wk), kj = row_times(ej, wk), rk = row_times(r, wk);
      double a = 0;
      for (std::size_t c = 0; c < d; ++c) {
        a += q[c] * k[c];
        a += p.u.value()[c] * kj[c];
        a += p.v.value()[c] * (term == RelValueTerm::literal ? r[c] : rk[c]);
      }
      s.at(i, j) = a;
    }
  return s;
}

inline EncoderConfig small_encoder(PositionMode mode, RelValueTerm term = RelValueTerm::literal, std::size_t layers = 2) {
  EncoderConfig c;
  c.num_layers = layers;
  c.num_heads = 2;
  c.d_model = 8;
  c.dropout = 0.0;
  c.position_mode = mode;
  c.rel_value_term = term;
  c.max_len = 16;
  return c;
}

/// Nonzero u, v and layer-norm affine terms so every parameter is exercised.
inline EncoderParams<double> random_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto p = EncoderParams<double>::init(cfg, rng);
  for (auto& [name, v] : p.named()) {
    if (name.ends_with(".u") || name.ends_with(".v") || name.ends_with("shift") || name.ends_with(".b1") ||
        name.ends_with(".b2")) {
      VarD h = v;
      h.mutable_value() = random_tensor(v.shape(), rng, -0.5, 0.5);
    } else if (name.ends_with("gain")) {
      VarD h = v;
      h.mutable_value() = random_tensor(v.shape(), rng, 0.5, 1.5);
    }
  }
  return p;
}

/// Biases are drawn too so that ReLUs are not all silenced at zero input.
inline IdcnnParams<double> random_idcnn(const IdcnnConfig& cfg, std::size_t d_emb, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto p = IdcnnParams<double>::init(cfg, d_emb, rng);
  for (auto& b : p.biases) b.mutable_value() = random_tensor(b.shape(), rng, 0.1, 0.5);
  return p;
}

/// BIO vocab of exactly `n` tags (2..5): O, then alternating B-/I- pairs.
inline TagVocab vocab_of_size(std::size_t n) {
  const std::vector<std::string> all{"O", "B-A", "I-A", "B-B", "I-B"};
  return TagVocab(std::vector<std::string>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)));
}

struct Brute {
  double log_z;
  double best_score;
  std::vector<std::size_t> best_path;  // lexicographically first among maxima
};

// Exhaustive oracle over all K^L sequences in lexicographic order.
inline Brute brute_force(const TensorD& P, const TransitionMatrix<double>& A) {
  const std::size_t L = P.rows(), K = A.num_tags();
  std::vector<std::size_t> y(L, 0);
  std::vector<double> scores;
  Brute out{0, -std::numeric_limits<double>::infinity(), {}};
  while (true) {
    const double s = score_sequence(P, y, A);
    scores.push_back(s);
    if (s > out.best_score) {
      out.best_score = s;
      out.best_path = y;
    }
    std::size_t pos = L;
    while (pos > 0 && ++y[pos - 1] == K) y[--pos] = 0;
    if (pos == 0) break;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (double s : scores) mx = std::max(mx, s);
  double acc = 0;
  for (double s : scores) acc += std::exp(s - mx);
  out.log_z = mx + std::log(acc);
  return out;
}

/// Uniform draws from {O, B-A, I-A, B-B, I-B}; not necessarily valid BIO.
inline std::vector<std::string> random_tags(std::mt19937_64& rng, std::size_t len) {
  static const std::vector<std::string> pool{"O", "B-A", "I-A", "B-B", "I-B"};
  std::vector<std::string> t(len);
  for (auto& x : t) x = pool[rng() % pool.size()];
  return t;
}

/// True positives, predicted and gold counts from explicit
/// (sentence, type, start, end) sets.
inline std::tuple<std::size_t, std::size_t, std::size_t> span_set_counts(
    const std::vector<std::vector<std::string>>& gold, const std::vector<std::vector<std::string>>& pred) {
  std::set<std::tuple<std::size_t, std::string, std::size_t, std::size_t>> gs, ps;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (const auto& sp : spans_from_bio(gold[s])) gs.emplace(s, sp.entity_type, sp.start, sp.end);
    for (const auto& sp : spans_from_bio(pred[s])) ps.emplace(s, sp.entity_type, sp.start, sp.end);
  }
  std::size_t tp = 0;
  for (const auto& x : ps) tp += gs.count(x);
  return {tp, ps.size(), gs.size()};
}

}  // namespace bwet::test
