#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "bwet/numerics/autodiff.hpp"

namespace bwet {

namespace detail {

template <typename T>
std::vector<T>* grad_of(Node<T>& n, std::size_t parent) {
  auto& p = n.parents[parent];
  return p->requires_grad ? &p->grad : nullptr;
}

inline void require_rank(const Shape& s, std::size_t rank, const char* op) {
  if (s.size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(s));
  }
}

/// Portable uniform [0,1) draw from a 64-bit engine.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

template <typename T>
Tensor<T> matmul_values(const Tensor<T>& a, const Tensor<T>& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor<T> c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = &c[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = a[i * k + p];
      if (aip == T{0}) continue;
      const T* brow = &b[p * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  detail::require_rank(a.shape(), 2, "matmul");
  detail::require_rank(b.shape(), 2, "matmul");
  if (a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
  }
  return Var<T>::from_op(matmul_values(a.value(), b.value()), {a, b}, [](Node<T>& n) {
    const auto& A = n.parents[0]->value;
    const auto& B = n.parents[1]->value;
    const std::size_t m = A.rows(), k = A.cols(), cols = B.cols();
    const auto& G = n.grad;
    if (auto* ga = detail::grad_of(n, 0)) {
      // dA = G * B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          T acc{0};
          for (std::size_t j = 0; j < cols; ++j) acc += G[i * cols + j] * B[p * cols + j];
          (*ga)[i * k + p] += acc;
        }
    }
    if (auto* gb = detail::grad_of(n, 1)) {
      // dB = A^T * G
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const T aip = A[i * k + p];
          for (std::size_t j = 0; j < cols; ++j) (*gb)[p * cols + j] += aip * G[i * cols + j];
        }
    }
  });
}

template <typename T>
Var<T> transpose(const Var<T>& a) {
  detail::require_rank(a.shape(), 2, "transpose");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  Tensor<T> out({n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.value()[i * n + j];
  return Var<T>::from_op(std::move(out), {a}, [m, n](Node<T>& node) {
    auto* g = detail::grad_of(node, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) (*g)[i * n + j] += node.grad[j * m + i];
  });
}

// ---------------------------------------------------------------------------
// Elementwise

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes differ " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return Var<T>::from_op(std::move(out), {a, b}, [](Node<T>& n) {
    for (std::size_t p = 0; p < 2; ++p)
      if (auto* g = detail::grad_of(n, p))
        for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("mul: shapes differ " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var<T>::from_op(std::move(out), {a, b}, [](Node<T>& n) {
    const auto& A = n.parents[0]->value;
    const auto& B = n.parents[1]->value;
    if (auto* g = detail::grad_of(n, 0))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * B[i];
    if (auto* g = detail::grad_of(n, 1))
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * A[i];
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> out = a.value();
  for (auto& x : out.buffer()) x *= factor;
  return Var<T>::from_op(std::move(out), {a}, [factor](Node<T>& n) {
    auto* g = detail::grad_of(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * factor;
  });
}

/// Adds `bias` (n values) to every row of the [m, n] matrix `a`.
template <typename T>
Var<T> add_bias(const Var<T>& a, const Var<T>& bias) {
  detail::require_rank(a.shape(), 2, "add_bias");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (bias.size() != n) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not fit rows of " +
                         shape_str(a.shape()));
  }
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias.value()[j];
  return Var<T>::from_op(std::move(out), {a, bias}, [m, n](Node<T>& node) {
    if (auto* g = detail::grad_of(node, 0))
      for (std::size_t i = 0; i < node.grad.size(); ++i) (*g)[i] += node.grad[i];
    if (auto* g = detail::grad_of(node, 1))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) (*g)[j] += node.grad[i * n + j];
  });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  Tensor<T> out = a.value();
  for (auto& x : out.buffer()) x = x > T{0} ? x : T{0};
  return Var<T>::from_op(std::move(out), {a}, [](Node<T>& n) {
    auto* g = detail::grad_of(n, 0);
    const auto& X = n.parents[0]->value;
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      if (X[i] > T{0}) (*g)[i] += n.grad[i];
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T total{0};
  for (T x : a.value().data()) total += x;
  return Var<T>::from_op(Tensor<T>({1}, std::vector<T>{total}), {a}, [](Node<T>& n) {
    auto* g = detail::grad_of(n, 0);
    for (auto& x : *g) x += n.grad[0];
  });
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  Tensor<T> out = a.value();
  out.reshape(std::move(shape));
  return Var<T>::from_op(std::move(out), {a}, [](Node<T>& n) {
    auto* g = detail::grad_of(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Normalization

/// Softmax along `axis`, max-subtracted. Entries equal to -inf get weight 0.
template <typename T>
Tensor<T> softmax_values(const Tensor<T>& x, std::size_t axis) {
  const Shape& s = x.shape();
  std::size_t n = s[axis], outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  Tensor<T> y(s);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, x[base + k * inner]);
      T z{0};
      for (std::size_t k = 0; k < n; ++k) {
        T e = std::isinf(x[base + k * inner]) && x[base + k * inner] < 0
                  ? T{0}
                  : std::exp(x[base + k * inner] - mx);
        y[base + k * inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < n; ++k) y[base + k * inner] /= z;
    }
  return y;
}

template <typename T>
Var<T> softmax(const Var<T>& x, std::size_t axis) {
  if (axis >= x.shape().size()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                         shape_str(x.shape()));
  }
  const Shape s = x.shape();
  std::size_t n = s[axis], outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  return Var<T>::from_op(softmax_values(x.value(), axis), {x}, [n, outer, inner](Node<T>& node) {
    auto* g = detail::grad_of(node, 0);
    const auto& Y = node.value;
    const auto& G = node.grad;
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * n * inner + in;
        T dot{0};
        for (std::size_t k = 0; k < n; ++k) dot += G[base + k * inner] * Y[base + k * inner];
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t i = base + k * inner;
          (*g)[i] += Y[i] * (G[i] - dot);
        }
      }
  });
}

inline constexpr double kLayerNormEps = 1e-6;

/// Normalizes each row of the [m, n] input to mean 0 / variance 1, then
/// applies per-column gain and shift.
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gain, const Var<T>& shift) {
  detail::require_rank(x.shape(), 2, "layer_norm");
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  if (gain.size() != n || shift.size() != n) {
    throw DimensionError("layer_norm: gain/shift must have " + std::to_string(n) + " entries");
  }
  Tensor<T> xhat({m, n});
  std::vector<T> inv_std(m);
  const auto& X = x.value();
  for (std::size_t i = 0; i < m; ++i) {
    T mean{0};
    for (std::size_t j = 0; j < n; ++j) mean += X[i * n + j];
    mean /= static_cast<T>(n);
    T var{0};
    for (std::size_t j = 0; j < n; ++j) {
      T d = X[i * n + j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(n);
    inv_std[i] = T{1} / std::sqrt(var + static_cast<T>(kLayerNormEps));
    for (std::size_t j = 0; j < n; ++j) xhat[i * n + j] = (X[i * n + j] - mean) * inv_std[i];
  }
  Tensor<T> out({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = xhat[i * n + j] * gain.value()[j] + shift.value()[j];

  return Var<T>::from_op(
      std::move(out), {x, gain, shift},
      [m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node<T>& node) {
        const auto& G = node.grad;
        const auto& gamma = node.parents[1]->value;
        if (auto* gg = detail::grad_of(node, 1))
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) (*gg)[j] += G[i * n + j] * xhat[i * n + j];
        if (auto* gs = detail::grad_of(node, 2))
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) (*gs)[j] += G[i * n + j];
        if (auto* gx = detail::grad_of(node, 0)) {
          const T inv_n = T{1} / static_cast<T>(n);
          for (std::size_t i = 0; i < m; ++i) {
            T mean_d{0}, mean_dx{0};
            for (std::size_t j = 0; j < n; ++j) {
              T d = G[i * n + j] * gamma[j];
              mean_d += d;
              mean_dx += d * xhat[i * n + j];
            }
            mean_d *= inv_n;
            mean_dx *= inv_n;
            for (std::size_t j = 0; j < n; ++j) {
              T d = G[i * n + j] * gamma[j];
              (*gx)[i * n + j] += inv_std[i] * (d - mean_d - xhat[i * n + j] * mean_dx);
            }
          }
        }
      });
}

/// Inverted dropout: survivors are scaled by 1/(1-p); identity when not training.
template <typename T>
Var<T> dropout(const Var<T>& x, double p, bool training, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout rate must lie in [0,1), got " + std::to_string(p));
  }
  if (!training || p == 0.0) return x;
  std::vector<T> mask(x.size());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  for (auto& m : mask) m = detail::uniform01(rng) < p ? T{0} : keep_scale;
  Tensor<T> out = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return Var<T>::from_op(std::move(out), {x}, [mask = std::move(mask)](Node<T>& n) {
    auto* g = detail::grad_of(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * mask[i];
  });
}

// ---------------------------------------------------------------------------
// Structural

/// Concatenates rank-2 tensors with equal row counts along the column axis.
template <typename T>
Var<T> concat_last_axis(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw UsageError("concat_last_axis: no inputs");
  const std::size_t m = parts[0].shape().at(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    detail::require_rank(p.shape(), 2, "concat_last_axis");
    if (p.shape()[0] != m) {
      throw DimensionError("concat_last_axis: row counts differ " + shape_str(parts[0].shape()) +
                           " vs " + shape_str(p.shape()));
    }
    widths.push_back(p.shape()[1]);
    total += p.shape()[1];
  }
  Tensor<T> out({m, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = parts[k].value();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(&v[i * widths[k]], widths[k], &out[i * total + offset]);
    offset += widths[k];
  }
  return Var<T>::from_op(std::move(out), parts, [m, total, widths](Node<T>& n) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (auto* g = detail::grad_of(n, k))
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < widths[k]; ++j)
            (*g)[i * widths[k] + j] += n.grad[i * total + offset + j];
      offset += widths[k];
    }
  });
}

template <typename T>
Var<T> concat_last_axis(const Var<T>& a, const Var<T>& b) {
  return concat_last_axis(std::vector<Var<T>>{a, b});
}

/// Columns [begin, end) of a rank-2 tensor.
template <typename T>
Var<T> slice_columns(const Var<T>& a, std::size_t begin, std::size_t end) {
  detail::require_rank(a.shape(), 2, "slice_columns");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  if (begin >= end || end > n) {
    throw DimensionError("slice_columns: bad range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") for " + shape_str(a.shape()));
  }
  const std::size_t w = end - begin;
  Tensor<T> out({m, w});
  for (std::size_t i = 0; i < m; ++i) std::copy_n(&a.value()[i * n + begin], w, &out[i * w]);
  return Var<T>::from_op(std::move(out), {a}, [m, n, w, begin](Node<T>& node) {
    auto* g = detail::grad_of(node, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) (*g)[i * n + begin + j] += node.grad[i * w + j];
  });
}

/// Row lookup: out[t] = table[ids[t]].
template <typename T>
Var<T> gather_rows(const Var<T>& table, const std::vector<std::size_t>& ids) {
  detail::require_rank(table.shape(), 2, "gather_rows");
  const std::size_t rows = table.shape()[0], d = table.shape()[1];
  if (ids.empty()) throw UsageError("gather_rows: empty index list");
  Tensor<T> out({ids.size(), d});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] >= rows) throw DimensionError("gather_rows: id " + std::to_string(ids[t]) +
                                             " out of range for " + shape_str(table.shape()));
    std::copy_n(&table.value()[ids[t] * d], d, &out[t * d]);
  }
  return Var<T>::from_op(std::move(out), {table}, [ids, d](Node<T>& n) {
    auto* g = detail::grad_of(n, 0);
    for (std::size_t t = 0; t < ids.size(); ++t)
      for (std::size_t j = 0; j < d; ++j) (*g)[ids[t] * d + j] += n.grad[t * d + j];
  });
}

/// Offset gather used by relative attention. `m` is [R, 2L-1] with R = L or
/// R = 1 (broadcast over rows); out[i][j] = m[R==1 ? 0 : i][i - j + L - 1].
template <typename T>
Var<T> offset_gather(const Var<T>& m, std::size_t length) {
  detail::require_rank(m.shape(), 2, "offset_gather");
  const std::size_t R = m.shape()[0], W = m.shape()[1], L = length;
  if (W != 2 * L - 1 || (R != L && R != 1)) {
    throw DimensionError("offset_gather: " + shape_str(m.shape()) + " incompatible with length " +
                         std::to_string(L));
  }
  Tensor<T> out({L, L});
  for (std::size_t i = 0; i < L; ++i) {
    const std::size_t r = R == 1 ? 0 : i;
    for (std::size_t j = 0; j < L; ++j) out[i * L + j] = m.value()[r * W + (i + L - 1 - j)];
  }
  return Var<T>::from_op(std::move(out), {m}, [R, W, L](Node<T>& n) {
    auto* g = detail::grad_of(n, 0);
    for (std::size_t i = 0; i < L; ++i) {
      const std::size_t r = R == 1 ? 0 : i;
      for (std::size_t j = 0; j < L; ++j) (*g)[r * W + (i + L - 1 - j)] += n.grad[i * L + j];
    }
  });
}

// ---------------------------------------------------------------------------
// Convolution

/// Same-padded 1-D dilated convolution over a [L, c_in] sequence with a
/// [k, c_in, c_out] kernel. Taps falling outside the sequence read zero.
template <typename T>
Var<T> conv1d_dilated(const Var<T>& x, const Var<T>& kernel, const Var<T>& bias,
                      std::size_t dilation) {
  detail::require_rank(x.shape(), 2, "conv1d_dilated");
  detail::require_rank(kernel.shape(), 3, "conv1d_dilated");
  const std::size_t L = x.shape()[0], cin = x.shape()[1];
  const std::size_t k = kernel.shape()[0], cout = kernel.shape()[2];
  if (k % 2 == 0) throw ConfigError("conv1d_dilated: kernel size must be odd, got " + std::to_string(k));
  if (dilation == 0) throw ConfigError("conv1d_dilated: dilation must be positive");
  if (kernel.shape()[1] != cin) {
    throw DimensionError("conv1d_dilated: kernel " + shape_str(kernel.shape()) +
                         " does not match input " + shape_str(x.shape()));
  }
  if (bias.size() != cout) {
    throw DimensionError("conv1d_dilated: bias " + shape_str(bias.shape()) + " needs " +
                         std::to_string(cout) + " entries");
  }
  const auto half = static_cast<std::ptrdiff_t>((k - 1) / 2);
  const auto dil = static_cast<std::ptrdiff_t>(dilation);
  const auto len = static_cast<std::ptrdiff_t>(L);

  Tensor<T> out({L, cout});
  const auto& X = x.value();
  const auto& K = kernel.value();
  for (std::size_t t = 0; t < L; ++t) {
    T* orow = &out[t * cout];
    for (std::size_t o = 0; o < cout; ++o) orow[o] = bias.value()[o];
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + (static_cast<std::ptrdiff_t>(j) - half) * dil;
      if (src < 0 || src >= len) continue;
      for (std::size_t i = 0; i < cin; ++i) {
        const T xv = X[static_cast<std::size_t>(src) * cin + i];
        const T* krow = &K[(j * cin + i) * cout];
        for (std::size_t o = 0; o < cout; ++o) orow[o] += xv * krow[o];
      }
    }
  }
  return Var<T>::from_op(std::move(out), {x, kernel, bias}, [=](Node<T>& n) {
    const auto& Xv = n.parents[0]->value;
    const auto& Kv = n.parents[1]->value;
    const auto& G = n.grad;
    auto* gx = detail::grad_of(n, 0);
    auto* gk = detail::grad_of(n, 1);
    auto* gb = detail::grad_of(n, 2);
    for (std::size_t t = 0; t < L; ++t) {
      const T* grow = &G[t * cout];
      if (gb)
        for (std::size_t o = 0; o < cout; ++o) (*gb)[o] += grow[o];
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + (static_cast<std::ptrdiff_t>(j) - half) * dil;
        if (src < 0 || src >= len) continue;
        const auto s = static_cast<std::size_t>(src);
        for (std::size_t i = 0; i < cin; ++i) {
          const std::size_t kb = (j * cin + i) * cout;
          if (gx) {
            T acc{0};
            for (std::size_t o = 0; o < cout; ++o) acc += grow[o] * Kv[kb + o];
            (*gx)[s * cin + i] += acc;
          }
          if (gk) {
            const T xv = Xv[s * cin + i];
            for (std::size_t o = 0; o < cout; ++o) (*gk)[kb + o] += xv * grow[o];
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Losses

/// Summed token-level cross entropy: sum_t -log softmax(logits[t])[gold[t]].
template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, const std::vector<std::size_t>& gold) {
  detail::require_rank(logits.shape(), 2, "softmax_cross_entropy");
  const std::size_t L = logits.shape()[0], C = logits.shape()[1];
  if (gold.size() != L) throw DimensionError("softmax_cross_entropy: gold length mismatch");
  Tensor<T> probs = softmax_values(logits.value(), 1);
  T loss{0};
  for (std::size_t t = 0; t < L; ++t) {
    if (gold[t] >= C) throw DimensionError("softmax_cross_entropy: gold index out of range");
    // log-softmax computed directly for accuracy
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t c = 0; c < C; ++c) mx = std::max(mx, logits.value()[t * C + c]);
    T z{0};
    for (std::size_t c = 0; c < C; ++c) z += std::exp(logits.value()[t * C + c] - mx);
    loss += mx + std::log(z) - logits.value()[t * C + gold[t]];
  }
  return Var<T>::from_op(Tensor<T>({1}, std::vector<T>{loss}), {logits},
                         [probs = std::move(probs), gold, C](Node<T>& n) {
                           auto* g = detail::grad_of(n, 0);
                           const T up = n.grad[0];
                           for (std::size_t t = 0; t < gold.size(); ++t)
                             for (std::size_t c = 0; c < C; ++c)
                               (*g)[t * C + c] +=
                                   up * (probs[t * C + c] - (c == gold[t] ? T{1} : T{0}));
                         });
}

}  // namespace bwet
