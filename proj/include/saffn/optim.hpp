#pragma once

#include <cstdint>
#include <vector>

#include "saffn/autodiff.hpp"

namespace saffn {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.9;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// First and second moments, one pair per parameter in model order.
template <typename T>
struct OptimState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t step = 0;

  /// Zero moments matching `params`.
  static OptimState init(const std::vector<Parameter<T>*>& params);
};

/// One bias-corrected AdamW update with decoupled decay (w -= lr * wd * w).
/// Throws NumericError naming the parameter if a gradient is not finite.
template <typename T>
void adamw_step(const std::vector<Parameter<T>*>& params, OptimState<T>& state, double lr,
                const AdamWConfig& cfg);

struct CosineSchedule {
  double lr0 = 1e-3;
  double eta_min = 1e-7;
  int total_iters = 5000;
  /// The curve is sampled at t rounded down to a multiple of this.
  int step = 1000;
};

/// eta_min + (lr0 - eta_min) * (1 + cos(pi * t' / total)) / 2 with t' = floor(t / step) * step.
/// Throws UsageError outside 0 <= t <= total_iters.
double cosine_lr(int t, const CosineSchedule& s);

}  // namespace saffn
