#include "saffn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "saffn/rng.hpp"

namespace saffn {

namespace {

template <typename T>
double evaluate(const ScalarFn<T>& f) {
  Var<T> out = f(nullptr);
  if (out.dims() != Dims{1, 1, 1, 1}) {
    throw UsageError("finite_diff_check: function must return a scalar, got " + out.dims().str());
  }
  return static_cast<double>(out.value()[0]);
}

std::vector<std::size_t> probe_indices(std::size_t count, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit == 0 || limit >= count) return idx;
  // Partial Fisher-Yates: the first `limit` entries become a uniform sample.
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(count - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

template <typename T>
GradCheckResult finite_diff_check(const ScalarFn<T>& f, const std::vector<Parameter<T>*>& wrt,
                                  const GradCheckOptions& options) {
  for (auto* p : wrt) p->zero_grad();
  {
    Tape<T> tape;
    Var<T> loss = f(&tape);
    tape.backward(loss);
  }

  GradCheckResult result;
  Rng rng(options.seed);
  const T step = static_cast<T>(options.step);
  for (auto* p : wrt) {
    const auto indices = probe_indices(p->value.size(), options.max_coords_per_param, rng);
    for (std::size_t i : indices) {
      const T saved = p->value[i];
      p->value[i] = saved + step;
      const double plus = evaluate(f);
      p->value[i] = saved - step;
      const double minus = evaluate(f);
      p->value[i] = saved;
      // Divide by the step actually realised in T, not the nominal one.
      const double realised = static_cast<double>((saved + step) - (saved - step));
      const double numeric = (plus - minus) / realised;
      const double analytic = static_cast<double>(p->grad[i]);
      if (!std::isfinite(plus) || !std::isfinite(minus) || !std::isfinite(analytic)) {
        throw NumericError("finite_diff_check: non-finite value at " + p->id + "[" +
                           std::to_string(i) + "]");
      }
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.coords_checked;
      if (result.coords_checked == 1 || rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p->id;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

template <typename T>
GradCheckResult finite_diff_check(const std::function<Var<T>(const Var<T>&)>& f,
                                  const Tensor<T>& x, double step) {
  Parameter<T> input("x", x);
  ScalarFn<T> wrapped = [&](Tape<T>* tape) { return f(bind(tape, input)); };
  GradCheckOptions options;
  options.step = step;
  return finite_diff_check<T>(wrapped, {&input}, options);
}

template GradCheckResult finite_diff_check<float>(const ScalarFn<float>&,
                                                  const std::vector<Parameter<float>*>&,
                                                  const GradCheckOptions&);
template GradCheckResult finite_diff_check<double>(const ScalarFn<double>&,
                                                   const std::vector<Parameter<double>*>&,
                                                   const GradCheckOptions&);
template GradCheckResult finite_diff_check<float>(const std::function<Var<float>(const Var<float>&)>&,
                                                  const Tensor<float>&, double);
template GradCheckResult finite_diff_check<double>(
    const std::function<Var<double>(const Var<double>&)>&, const Tensor<double>&, double);

}  // namespace saffn
