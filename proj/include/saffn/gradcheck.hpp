#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "saffn/autodiff.hpp"

namespace saffn {

struct GradCheckOptions {
  double step = 1e-3;
  /// Coordinates probed per parameter tensor; 0 probes all of them. When
  /// subsampling, the coordinates are drawn deterministically from `seed`.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// Scalar-valued function of the parameters it closes over. Called with a tape
/// for the analytic pass and with nullptr for the finite-difference probes.
template <typename T>
using ScalarFn = std::function<Var<T>(Tape<T>*)>;

/// Compares reverse-mode gradients against central differences,
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8), maximised over the
/// probed coordinates of every listed parameter. Parameter values are restored
/// on return; their grads are overwritten with the analytic gradient.
/// Throws NumericError naming the coordinate if a probe is non-finite.
template <typename T>
GradCheckResult finite_diff_check(const ScalarFn<T>& f, const std::vector<Parameter<T>*>& wrt,
                                  const GradCheckOptions& options = {});

/// Single-input form: f maps x to a scalar.
template <typename T>
GradCheckResult finite_diff_check(const std::function<Var<T>(const Var<T>&)>& f,
                                  const Tensor<T>& x, double step);

}  // namespace saffn
