#include "saffn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace saffn {

template <typename T>
OptimState<T> OptimState<T>::init(const std::vector<Parameter<T>*>& params) {
  OptimState s;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const auto* p : params) {
    s.m.push_back(Tensor<T>::zeros(p->value.dims()));
    s.v.push_back(Tensor<T>::zeros(p->value.dims()));
  }
  return s;
}

template <typename T>
void adamw_step(const std::vector<Parameter<T>*>& params, OptimState<T>& state, double lr,
                const AdamWConfig& cfg) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw UsageError("adamw_step: optimizer state has " + std::to_string(state.m.size()) +
                     " slots for " + std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter<T>& p = *params[i];
    require_same_dims(p.value.dims(), state.m[i].dims(), "adamw_step moment");
    require_same_dims(p.value.dims(), p.grad.dims(), "adamw_step grad");
    for (std::size_t j = 0; j < p.grad.size(); ++j) {
      if (!std::isfinite(static_cast<double>(p.grad[j]))) {
        throw NumericError("adamw_step: non-finite gradient in '" + p.id + "' at element " +
                           std::to_string(j));
      }
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const double decay = 1.0 - lr * cfg.weight_decay;
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    T* w = p.value.data();
    const T* g = p.grad.data();
    T* m = state.m[i].data();
    T* v = state.v[i].data();
    const std::size_t n = p.value.size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const double mhat = static_cast<double>(m[j]) / bc1;
      const double vhat = static_cast<double>(v[j]) / bc2;
      const double updated = static_cast<double>(w[j]) * decay - lr * mhat / (std::sqrt(vhat) + cfg.eps);
      w[j] = static_cast<T>(updated);
    }
  }
}

double cosine_lr(int t, const CosineSchedule& s) {
  if (s.total_iters < 1) throw ConfigError("cosine_lr: total_iters must be >= 1");
  if (t < 0 || t > s.total_iters) {
    throw UsageError("cosine_lr: t=" + std::to_string(t) + " outside [0, " +
                     std::to_string(s.total_iters) + "]");
  }
  const int step = std::max(1, s.step);
  const int sampled = t == s.total_iters ? t : (t / step) * step;
  const double phase = std::numbers::pi * sampled / s.total_iters;
  return s.eta_min + (s.lr0 - s.eta_min) * (1.0 + std::cos(phase)) / 2.0;
}

template struct OptimState<float>;
template struct OptimState<double>;
template void adamw_step(const std::vector<Parameter<float>*>&, OptimState<float>&, double,
                         const AdamWConfig&);
template void adamw_step(const std::vector<Parameter<double>*>&, OptimState<double>&, double,
                         const AdamWConfig&);

}  // namespace saffn
