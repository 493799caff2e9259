#pragma once

#include <cmath>
#include <cstdlib>
#include <vector>

#include "bwet/numerics/tensor.hpp"

namespace bwet {

namespace detail {
inline void require_even_dim(std::size_t d, const char* what) {
  if (d == 0 || d % 2 != 0) {
    throw ConfigError(std::string(what) + ": dimension must be even and positive, got " +
                      std::to_string(d));
  }
}
}  // namespace detail

/// Interleaved sinusoid at (possibly negative) position `x`:
/// out[2m] = sin(x / 10000^(2m/d)), out[2m+1] = cos(x / 10000^(2m/d)).
inline std::vector<double> sinusoid(double x, std::size_t d) {
  std::vector<double> out(d);
  for (std::size_t m = 0; m < d / 2; ++m) {
    const double freq = std::pow(10000.0, static_cast<double>(2 * m) / static_cast<double>(d));
    out[2 * m] = std::sin(x / freq);
    out[2 * m + 1] = std::cos(x / freq);
  }
  return out;
}

/// Absolute sinusoidal encoding of position `p`.
inline std::vector<double> sinusoidal_abs(std::size_t p, std::size_t d) {
  detail::require_even_dim(d, "sinusoidal_abs");
  return sinusoid(static_cast<double>(p), d);
}

/// [L, d] table of absolute encodings for positions 0..L-1.
template <typename T>
Tensor<T> absolute_position_table(std::size_t length, std::size_t d) {
  detail::require_even_dim(d, "absolute_position_table");
  Tensor<T> out({length, d});
  for (std::size_t p = 0; p < length; ++p) {
    auto row = sinusoid(static_cast<double>(p), d);
    for (std::size_t c = 0; c < d; ++c) out.at(p, c) = static_cast<T>(row[c]);
  }
  return out;
}

/// Relative encodings r(o) for offsets o = i - j in [-(max_len-1), max_len-1],
/// precomputed once. Row index of offset o is o + max_len - 1.
template <typename T>
class RelPosTable {
 public:
  RelPosTable() = default;
  RelPosTable(std::size_t max_len, std::size_t d_head) : max_len_(max_len), d_(d_head) {
    detail::require_even_dim(d_head, "RelPosTable");
    if (max_len == 0) throw ConfigError("RelPosTable: max_len must be positive");
    table_ = Tensor<T>({2 * max_len - 1, d_head});
    for (std::size_t r = 0; r < 2 * max_len - 1; ++r) {
      const double offset = static_cast<double>(r) - static_cast<double>(max_len - 1);
      auto row = sinusoid(offset, d_head);
      for (std::size_t c = 0; c < d_head; ++c) table_.at(r, c) = static_cast<T>(row[c]);
    }
  }

  std::size_t max_len() const { return max_len_; }
  std::size_t dim() const { return d_; }
  const Tensor<T>& table() const { return table_; }

  std::span<const T> row(std::ptrdiff_t offset) const {
    const auto limit = static_cast<std::ptrdiff_t>(max_len_) - 1;
    if (offset < -limit || offset > limit) {
      throw DimensionError("relpos: offset " + std::to_string(offset) + " outside [-" +
                           std::to_string(limit) + "," + std::to_string(limit) + "]");
    }
    const auto r = static_cast<std::size_t>(offset + limit);
    return table_.data().subspan(r * d_, d_);
  }

  /// [2L-1, d_head] slice whose row c holds offset c - (L-1); this is the
  /// column convention of offset_gather.
  Tensor<T> window(std::size_t length) const {
    if (length == 0 || length > max_len_) {
      throw DimensionError("relpos window: length " + std::to_string(length) + " exceeds max_len " +
                           std::to_string(max_len_));
    }
    const std::size_t first = max_len_ - length;
    const std::size_t rows = 2 * length - 1;
    std::vector<T> data(table_.data().begin() + static_cast<std::ptrdiff_t>(first * d_),
                        table_.data().begin() + static_cast<std::ptrdiff_t>((first + rows) * d_));
    return Tensor<T>({rows, d_}, std::move(data));
  }

 private:
  std::size_t max_len_ = 0;
  std::size_t d_ = 0;
  Tensor<T> table_;
};

}  // namespace bwet
