#pragma once

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bwet/embeddings/vocab.hpp"
#include "bwet/numerics/ops.hpp"

namespace bwet {

enum class EmbeddingMode { trainable_table, static_pretrained };

inline const char* embedding_mode_name(EmbeddingMode m) {
  return m == EmbeddingMode::trainable_table ? "trainable_table" : "static_pretrained";
}

inline EmbeddingMode parse_embedding_mode(const std::string& name) {
  if (name == "trainable_table") return EmbeddingMode::trainable_table;
  if (name == "static_pretrained") return EmbeddingMode::static_pretrained;
  throw ConfigError("unknown embedding mode '" + name +
                    "' (expected trainable_table|static_pretrained)");
}

/// Token-to-vector lookup standing in for a frozen contextual encoder.
/// In static_pretrained mode the table is a tape constant and never receives
/// gradient.
template <typename T>
class EmbeddingProvider {
 public:
  EmbeddingProvider() = default;
  EmbeddingProvider(EmbeddingMode mode, Vocab vocab, Tensor<T> table)
      : mode_(mode), vocab_(std::move(vocab)) {
    if (table.rank() != 2 || table.rows() != vocab_.size()) {
      throw DimensionError("embedding table " + shape_str(table.shape()) + " does not match vocab of " +
                           std::to_string(vocab_.size()));
    }
    if (!table.all_finite()) throw FormatError("embedding table contains non-finite entries");
    table_ = mode == EmbeddingMode::trainable_table ? Var<T>::param(std::move(table))
                                                    : Var<T>::constant(std::move(table));
  }

  /// Uniform [-0.05, 0.05] initialization; the PAD row is zero.
  static EmbeddingProvider trainable(Vocab vocab, std::size_t d_emb, std::mt19937_64& rng) {
    Tensor<T> table({vocab.size(), d_emb});
    for (std::size_t r = 0; r < vocab.size(); ++r)
      for (std::size_t c = 0; c < d_emb; ++c)
        table.at(r, c) = r == Vocab::kPad ? T{0} : static_cast<T>(detail::uniform01(rng) * 0.1 - 0.05);
    return EmbeddingProvider(EmbeddingMode::trainable_table, std::move(vocab), std::move(table));
  }

  EmbeddingMode mode() const { return mode_; }
  bool trainable() const { return mode_ == EmbeddingMode::trainable_table; }
  const Vocab& vocab() const { return vocab_; }
  std::size_t d_emb() const { return table_.shape()[1]; }
  const Var<T>& table() const { return table_; }
  Var<T>& table() { return table_; }

  std::vector<std::size_t> ids(const std::vector<std::string>& tokens) const {
    std::vector<std::size_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(vocab_.id(t));
    return out;
  }

  /// [L, d_emb] embedding of `tokens`; unknown tokens read the UNK row.
  Var<T> encode_tokens(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) throw UsageError("encode_tokens: empty token sequence");
    return gather_rows(table_, ids(tokens));
  }

 private:
  EmbeddingMode mode_ = EmbeddingMode::static_pretrained;
  Vocab vocab_;
  Var<T> table_;
};

/// Reads the "<count> <dim>" + "token v1 ... vdim" text layout.
template <typename T>
EmbeddingProvider<T> load_pretrained(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pretrained vectors '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ":1: empty vector file");
  std::istringstream head(line);
  long long count = -1, dim = -1;
  if (!(head >> count >> dim) || count < 0 || dim <= 0) {
    throw FormatError(path + ":1: expected '<count> <dim>' header");
  }
  Vocab vocab;
  std::vector<T> rows(2 * static_cast<std::size_t>(dim), T{0});
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<T> values;
    std::string field;
    while (ls >> field) {
      try {
        std::size_t used = 0;
        T v;
        if constexpr (std::is_same_v<T, float>) v = std::stof(field, &used);
        else v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        values.push_back(v);
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
      }
    }
    if (values.size() != static_cast<std::size_t>(dim)) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": row has " +
                        std::to_string(values.size()) + " values, expected " + std::to_string(dim));
    }
    if (vocab.contains(token)) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": duplicate token '" + token + "'");
    }
    vocab.add(token);
    rows.insert(rows.end(), values.begin(), values.end());
  }
  const std::size_t n = vocab.size() - 2;
  if (n == 0) throw FormatError(path + ": no vectors in file");
  if (n != static_cast<std::size_t>(count)) {
    throw FormatError(path + ": header declares " + std::to_string(count) + " vectors, found " +
                      std::to_string(n));
  }
  Tensor<T> table({vocab.size(), static_cast<std::size_t>(dim)}, std::move(rows));
  return EmbeddingProvider<T>(EmbeddingMode::static_pretrained, std::move(vocab), std::move(table));
}

/// Writes every non-reserved row in the text layout, round-trip exact.
template <typename T>
void save_pretrained(const EmbeddingProvider<T>& provider, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const auto& vocab = provider.vocab();
  const auto& table = provider.table().value();
  const std::size_t d = provider.d_emb();
  out << (vocab.size() - 2) << ' ' << d << '\n';
  char buf[64];
  const char* fmt = std::is_same_v<T, float> ? "%.9g" : "%.17g";
  for (std::size_t r = 2; r < vocab.size(); ++r) {
    out << vocab.token(r);
    for (std::size_t c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, fmt, static_cast<double>(table.at(r, c)));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

}  // namespace bwet
