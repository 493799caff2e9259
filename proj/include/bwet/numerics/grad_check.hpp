#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "bwet/numerics/autodiff.hpp"

namespace bwet {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t input_index = 0;  // location of the worst coordinate
  std::size_t coordinate = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates_checked = 0;
};

/// Compares reverse-mode gradients of the scalar `f` against central
/// differences with step `h`. Relative error per coordinate is
/// |a - n| / max(|a|, |n|, 1e-8). Intended for double precision.
template <typename T>
GradCheckResult grad_check(const std::function<Var<T>(const std::vector<Var<T>>&)>& f,
                           std::vector<Var<T>> inputs, double h = 1e-5) {
  for (auto& in : inputs) {
    in.set_requires_grad(true);
    in.zero_grad();
  }
  Var<T> out = f(inputs);
  if (out.size() != 1) {
    throw UsageError("grad_check: function must return a scalar, got shape " +
                     shape_str(out.shape()));
  }
  backward(out);

  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::vector<T> analytic(inputs[k].grad().begin(), inputs[k].grad().end());
    auto& values = inputs[k].mutable_value().buffer();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T saved = values[i];
      values[i] = saved + static_cast<T>(h);
      const T up = f(inputs).value()[0];
      values[i] = saved - static_cast<T>(h);
      const T down = f(inputs).value()[0];
      values[i] = saved;
      const double numeric = static_cast<double>((up - down) / (2 * static_cast<T>(h)));
      const double a = static_cast<double>(analytic[i]);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coordinates_checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.input_index = k;
        result.coordinate = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace bwet
