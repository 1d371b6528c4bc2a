#include "saffn/gradsuite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "saffn/blocks.hpp"
#include "saffn/edge.hpp"
#include "saffn/fourier.hpp"
#include "saffn/network.hpp"
#include "saffn/ops.hpp"
#include "saffn/rng.hpp"
#include "saffn/train.hpp"

namespace saffn {

namespace {

template <typename T>
struct Instance {
  std::vector<std::unique_ptr<Parameter<T>>> owned;
  std::shared_ptr<void> keep;
  std::vector<Parameter<T>*> params;
  std::function<Var<T>(Tape<T>*)> f;
};

// Values are rounded through float so the f32 and f64 instances coincide.
template <typename T>
Tensor<T> random_tensor(Dims d, Rng& rng, double lo, double hi) {
  Tensor<T> t(d);
  for (auto& v : t.span()) v = static_cast<T>(static_cast<float>(rng.uniform(lo, hi)));
  return t;
}

template <typename T>
Parameter<T>* add_param(Instance<T>& inst, const std::string& id, Dims d, Rng& rng,
                        double lo = -1.0, double hi = 1.0) {
  inst.owned.push_back(std::make_unique<Parameter<T>>(id, random_tensor<T>(d, rng, lo, hi)));
  inst.params.push_back(inst.owned.back().get());
  return inst.owned.back().get();
}

// Weights keep a fan-in scale; per-channel vectors land in [0.5, 1.5].
template <typename T>
void randomize(Parameter<T>& p, Rng& rng) {
  const Dims d = p.value.dims();
  if (d.n == 1 && d.h == 1 && d.w == 1) {
    p.value = random_tensor<T>(d, rng, 0.5, 1.5);
  } else {
    const double s = 1.0 / std::sqrt(static_cast<double>(d.c) * d.h * d.w);
    p.value = random_tensor<T>(d, rng, -s, s);
  }
  p.zero_grad();
}

template <typename T>
Var<T> readout(const Var<T>& y, std::uint64_t tag = 0) {
  Rng rng(0x5EEDULL + tag);
  const Var<T> r = Var<T>::constant(random_tensor<T>(y.dims(), rng, -1.0, 1.0));
  return sum(hadamard(y, r));
}

template <typename T>
Var<T> undefined_bias() {
  return Var<T>();
}

template <typename T>
using Maker = Instance<T> (*)(Rng&);

template <typename T>
Instance<T> conv_case(Rng& rng, int ci, int co, int k, int stride, int groups, bool bias, int h,
                      int w) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{2, ci, h, w}, rng);
  auto* wt = add_param(inst, "weight", Dims{co, ci / groups, k, k}, rng, -0.5, 0.5);
  Parameter<T>* b = bias ? add_param(inst, "bias", Dims{1, co, 1, 1}, rng) : nullptr;
  inst.f = [=](Tape<T>* t) {
    const Var<T> bv = b ? bind(t, *b) : undefined_bias<T>();
    return readout(conv2d(bind(t, *x), bind(t, *wt), bv, stride, k / 2, groups));
  };
  return inst;
}

template <typename T>
Instance<T> conv_dense(Rng& rng) { return conv_case<T>(rng, 3, 4, 3, 1, 1, true, 5, 6); }
template <typename T>
Instance<T> conv_pointwise(Rng& rng) { return conv_case<T>(rng, 4, 3, 1, 1, 1, true, 4, 5); }
template <typename T>
Instance<T> conv_strided(Rng& rng) { return conv_case<T>(rng, 3, 4, 3, 2, 1, true, 7, 6); }
template <typename T>
Instance<T> conv_depthwise(Rng& rng) { return conv_case<T>(rng, 4, 4, 3, 1, 4, true, 5, 5); }
template <typename T>
Instance<T> conv_grouped(Rng& rng) { return conv_case<T>(rng, 4, 6, 3, 1, 2, false, 4, 6); }

template <typename T, typename Op>
Instance<T> binary_case(Rng& rng, Dims da, Dims db, Op op) {
  Instance<T> inst;
  auto* a = add_param(inst, "a", da, rng);
  auto* b = add_param(inst, "b", db, rng);
  inst.f = [=](Tape<T>* t) { return readout(op(bind(t, *a), bind(t, *b))); };
  return inst;
}

template <typename T, typename Op>
Instance<T> unary_case(Rng& rng, Dims d, Op op, double lo = -1.0, double hi = 1.0) {
  Instance<T> inst;
  auto* a = add_param(inst, "x", d, rng, lo, hi);
  inst.f = [=](Tape<T>* t) { return readout(op(bind(t, *a))); };
  return inst;
}

constexpr Dims kBasic{2, 3, 4, 5};
constexpr Dims kChannelVec{1, 3, 1, 1};

template <typename T>
Instance<T> op_add(Rng& rng) {
  return binary_case<T>(rng, kBasic, kBasic, [](auto a, auto b) { return add(a, b); });
}
template <typename T>
Instance<T> op_add_broadcast(Rng& rng) {
  return binary_case<T>(rng, kBasic, kChannelVec, [](auto a, auto b) { return add(a, b); });
}
template <typename T>
Instance<T> op_add_scalar(Rng& rng) {
  return unary_case<T>(rng, kBasic, [](auto a) { return add(a, T(0.75)); });
}
template <typename T>
Instance<T> op_sub(Rng& rng) {
  return binary_case<T>(rng, kBasic, kBasic, [](auto a, auto b) { return sub(a, b); });
}
template <typename T>
Instance<T> op_hadamard(Rng& rng) {
  return binary_case<T>(rng, kBasic, kBasic, [](auto a, auto b) { return hadamard(a, b); });
}
template <typename T>
Instance<T> op_hadamard_broadcast(Rng& rng) {
  return binary_case<T>(rng, kBasic, kChannelVec, [](auto a, auto b) { return hadamard(a, b); });
}
template <typename T>
Instance<T> op_scale(Rng& rng) {
  return unary_case<T>(rng, kBasic, [](auto a) { return scale(a, T(-1.5)); });
}

// Inputs stay at least 0.1 away from the kink.
template <typename T>
Instance<T> op_relu(Rng& rng) {
  Instance<T> inst;
  Tensor<T> v(kBasic);
  for (auto& e : v.span()) {
    const double mag = rng.uniform(0.1, 1.0);
    e = static_cast<T>(static_cast<float>(rng.uniform() < 0.5 ? -mag : mag));
  }
  inst.owned.push_back(std::make_unique<Parameter<T>>("x", std::move(v)));
  auto* x = inst.owned.back().get();
  inst.params.push_back(x);
  inst.f = [=](Tape<T>* t) { return readout(relu(bind(t, *x))); };
  return inst;
}

template <typename T>
Instance<T> op_split(Rng& rng) {
  return unary_case<T>(rng, Dims{2, 4, 3, 3}, [](auto a) {
    auto [lo, hi] = channel_split2(a);
    return add(readout(lo, 1), readout(hi, 2));
  });
}
template <typename T>
Instance<T> op_concat(Rng& rng) {
  return binary_case<T>(rng, Dims{2, 2, 3, 4}, Dims{2, 3, 3, 4},
                        [](auto a, auto b) { return concat_channels(a, b); });
}

template <typename T>
Instance<T> op_layer_norm(Rng& rng) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{2, 4, 3, 3}, rng);
  auto* g = add_param(inst, "gain", Dims{1, 4, 1, 1}, rng, 0.5, 1.5);
  auto* s = add_param(inst, "shift", Dims{1, 4, 1, 1}, rng);
  inst.f = [=](Tape<T>* t) {
    return readout(layer_norm_2d(bind(t, *x), bind(t, *g), bind(t, *s)));
  };
  return inst;
}

template <typename T>
Instance<T> op_shuffle_up(Rng& rng) {
  return unary_case<T>(rng, Dims{1, 8, 2, 3}, [](auto a) { return pixel_shuffle_up(a, 2); });
}
template <typename T>
Instance<T> op_shuffle_down(Rng& rng) {
  return unary_case<T>(rng, Dims{1, 2, 4, 6}, [](auto a) { return pixel_shuffle_down(a, 2); });
}
template <typename T>
Instance<T> op_avg_pool(Rng& rng) {
  return unary_case<T>(rng, Dims{2, 2, 4, 6}, [](auto a) { return avg_pool2(a); });
}
template <typename T>
Instance<T> op_reflect_pad(Rng& rng) {
  return unary_case<T>(rng, Dims{1, 2, 3, 4}, [](auto a) { return reflect_pad(a, 2, 5); });
}
template <typename T>
Instance<T> op_crop(Rng& rng) {
  return unary_case<T>(rng, Dims{1, 2, 5, 6}, [](auto a) { return crop(a, 3, 4); });
}
template <typename T>
Instance<T> op_sum(Rng& rng) {
  return unary_case<T>(rng, kBasic, [](auto a) { return scale(sum(a), T(0.5)); });
}
template <typename T>
Instance<T> op_mean(Rng& rng) {
  return unary_case<T>(rng, kBasic, [](auto a) { return scale(mean(a), T(3)); });
}
template <typename T>
Instance<T> op_rfft(Rng& rng) {
  return unary_case<T>(rng, Dims{1, 2, 5, 6}, [](auto a) { return rfft2_stacked(a); });
}
template <typename T>
Instance<T> op_irfft(Rng& rng) {
  return unary_case<T>(rng, Dims{1, 4, 5, 4}, [](auto a) { return irfft2_stacked(a, 7); });
}

template <typename T>
Instance<T> op_psnr_loss(Rng& rng) {
  Instance<T> inst;
  auto* x = add_param(inst, "pred", Dims{1, 1, 4, 5}, rng, 0.0, 1.0);
  auto target = std::make_shared<Tensor<T>>(random_tensor<T>(Dims{1, 1, 4, 5}, rng, 0.0, 1.0));
  inst.keep = target;
  inst.f = [=](Tape<T>* t) { return psnr_loss(bind(t, *x), *target); };
  return inst;
}

template <typename T, typename Block>
void adopt_block(Instance<T>& inst, std::shared_ptr<Block> block, Rng& rng) {
  visit_parameters(*block, [&](Parameter<T>& p) {
    randomize(p, rng);
    inst.params.push_back(&p);
  });
  inst.keep = std::move(block);
}

template <typename T>
Instance<T> op_edge_conv(Rng& rng) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{1, 2, 5, 6}, rng);
  auto bank = std::make_shared<EdgeKernelBank<T>>(make_kernel_bank<T>(4, 5, T(1)));
  bank->gamma.value = random_tensor<T>(bank->gamma.value.dims(), rng, 0.5, 1.5);
  inst.params.push_back(&bank->gamma);
  inst.keep = bank;
  inst.f = [=](Tape<T>* t) {
    return readout(edge_conv(bind(t, *x), *bank));
  };
  return inst;
}

template <typename T>
Instance<T> op_depthwise_edge_conv(Rng& rng) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{1, 8, 4, 5}, rng);
  auto bank = std::make_shared<EdgeKernelBank<T>>(make_kernel_bank<T>(8, 8, T(1)));
  bank->gamma.value = random_tensor<T>(bank->gamma.value.dims(), rng, 0.5, 1.5);
  inst.params.push_back(&bank->gamma);
  inst.keep = bank;
  inst.f = [=](Tape<T>* t) { return readout(depthwise_edge_conv(bind(t, *x), *bank)); };
  return inst;
}

template <typename T>
Instance<T> block_simple_gate(Rng& rng) {
  return unary_case<T>(rng, Dims{2, 4, 3, 3}, [](auto a) { return simple_gate(a); });
}

template <typename T>
Instance<T> sffb_case(Rng& rng, FreqVariant variant) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{1, 3, 5, 6}, rng);
  auto block = std::make_shared<Sffb<T>>(make_sffb<T>("sffb", 3, variant, rng));
  adopt_block(inst, block, rng);
  const Sffb<T>* b = block.get();
  inst.f = [=](Tape<T>* t) { return readout(sffb_forward(bind(t, *x), *b)); };
  return inst;
}

template <typename T>
Instance<T> block_sffb(Rng& rng) { return sffb_case<T>(rng, FreqVariant::simplified); }
template <typename T>
Instance<T> block_cffb(Rng& rng) { return sffb_case<T>(rng, FreqVariant::complex); }

template <typename T>
Instance<T> affb_case(Rng& rng, FreqVariant variant) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{1, 4, 4, 5}, rng);
  auto block = std::make_shared<Affb<T>>(make_affb<T>("affb", 4, variant, rng));
  adopt_block(inst, block, rng);
  const Affb<T>* b = block.get();
  inst.f = [=](Tape<T>* t) { return readout(affb_forward(bind(t, *x), *b)); };
  return inst;
}

template <typename T>
Instance<T> block_affb(Rng& rng) { return affb_case<T>(rng, FreqVariant::simplified); }
template <typename T>
Instance<T> block_affb_complex(Rng& rng) { return affb_case<T>(rng, FreqVariant::complex); }
template <typename T>
Instance<T> block_affb_plain(Rng& rng) { return affb_case<T>(rng, FreqVariant::none); }

template <typename T>
Instance<T> block_smb(Rng& rng) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{1, 1, 8, 8}, rng, 0.0, 1.0);
  auto block = std::make_shared<Smb<T>>(make_smb<T>("smb", 4, {4, 8, 16}, rng));
  adopt_block(inst, block, rng);
  const Smb<T>* b = block.get();
  inst.f = [=](Tape<T>* t) {
    const auto levels = smb_forward(bind(t, *x), *b);
    Var<T> total = readout(levels[0], 0);
    for (std::size_t k = 1; k < levels.size(); ++k) total = add(total, readout(levels[k], k));
    return total;
  };
  return inst;
}

template <typename T>
Instance<T> network_micro(Rng& rng) {
  Instance<T> inst;
  auto* x = add_param(inst, "x", Dims{1, 1, 6, 7}, rng, 0.0, 1.0);
  auto model = std::make_shared<Model<T>>(build<T>(tiny_config(8, {1, 1}, 1, {1, 1}), 1));
  for (auto* p : model->parameters()) {
    randomize(*p, rng);
    inst.params.push_back(p);
  }
  inst.keep = model;
  const Model<T>* m = model.get();
  inst.f = [=](Tape<T>* t) { return readout(forward(*m, bind(t, *x))); };
  return inst;
}

struct Case {
  const char* name;
  Maker<float> make32;
  Maker<double> make64;
};

#define SAFFN_CASE(label, fn) Case{label, &fn<float>, &fn<double>}

const std::vector<Case>& cases() {
  static const std::vector<Case> all = {
      SAFFN_CASE("conv2d 3x3", conv_dense),
      SAFFN_CASE("conv2d 1x1", conv_pointwise),
      SAFFN_CASE("conv2d stride 2", conv_strided),
      SAFFN_CASE("conv2d depthwise", conv_depthwise),
      SAFFN_CASE("conv2d grouped", conv_grouped),
      SAFFN_CASE("add", op_add),
      SAFFN_CASE("add channel vector", op_add_broadcast),
      SAFFN_CASE("add scalar", op_add_scalar),
      SAFFN_CASE("sub", op_sub),
      SAFFN_CASE("hadamard", op_hadamard),
      SAFFN_CASE("hadamard channel vector", op_hadamard_broadcast),
      SAFFN_CASE("scale", op_scale),
      SAFFN_CASE("relu", op_relu),
      SAFFN_CASE("channel_split2", op_split),
      SAFFN_CASE("concat_channels", op_concat),
      SAFFN_CASE("layer_norm_2d", op_layer_norm),
      SAFFN_CASE("pixel_shuffle_up", op_shuffle_up),
      SAFFN_CASE("pixel_shuffle_down", op_shuffle_down),
      SAFFN_CASE("avg_pool2", op_avg_pool),
      SAFFN_CASE("reflect_pad", op_reflect_pad),
      SAFFN_CASE("crop", op_crop),
      SAFFN_CASE("sum", op_sum),
      SAFFN_CASE("mean", op_mean),
      SAFFN_CASE("rfft2_stacked", op_rfft),
      SAFFN_CASE("irfft2_stacked", op_irfft),
      SAFFN_CASE("psnr_loss", op_psnr_loss),
      SAFFN_CASE("edge_conv", op_edge_conv),
      SAFFN_CASE("depthwise_edge_conv", op_depthwise_edge_conv),
      SAFFN_CASE("simple_gate", block_simple_gate),
      SAFFN_CASE("sffb", block_sffb),
      SAFFN_CASE("cffb", block_cffb),
      SAFFN_CASE("affb", block_affb),
      SAFFN_CASE("affb cffb", block_affb_complex),
      SAFFN_CASE("affb no fft", block_affb_plain),
      SAFFN_CASE("smb", block_smb),
      SAFFN_CASE("saffn w8 [1,1]+1+[1,1]", network_micro),
  };
  return all;
}

#undef SAFFN_CASE

template <typename T>
void analytic_pass(Instance<T>& inst) {
  for (auto* p : inst.params) p->zero_grad();
  Tape<T> tape;
  const Var<T> loss = inst.f(&tape);
  tape.backward(loss);
}

double eval_at(Instance<double>& ref, Parameter<double>& p, std::size_t i, double v) {
  const double saved = p.value[i];
  p.value[i] = v;
  const Var<double> out = ref.f(nullptr);
  p.value[i] = saved;
  return out.value()[0];
}

std::vector<std::size_t> probe_indices(std::size_t count, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit == 0 || limit >= count) return idx;
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(count - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double fourth_order(Instance<double>& ref, Parameter<double>& p, std::size_t i, double h) {
  const double x = p.value[i];
  // Differences first so an unaffected output gives exactly zero.
  const double d1 = eval_at(ref, p, i, x + h) - eval_at(ref, p, i, x - h);
  const double d2 = eval_at(ref, p, i, x + 2 * h) - eval_at(ref, p, i, x - 2 * h);
  return (8 * d1 - d2) / (12 * h);
}

// Estimates at h, h/10, h/100 and h/1000. The larger step of the adjacent pair
// that agrees best is kept: large steps lose to curvature or kinks, small ones
// to rounding in the forward pass.
double reference_derivative(Instance<double>& ref, Parameter<double>& p, std::size_t i,
                            double h) {
  double d[4];
  for (double& di : d) {
    di = fourth_order(ref, p, i, h);
    h /= 10;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k + 1 < 4; ++k) {
    if (std::abs(d[k] - d[k + 1]) < std::abs(d[best] - d[best + 1])) best = k;
  }
  return d[best];
}

struct Reference {
  std::vector<std::vector<std::size_t>> probes;  // per parameter
  std::vector<std::vector<double>> numeric;
};

Reference reference_for(Instance<double>& ref, const GradSuiteOptions& options,
                        std::uint64_t seed) {
  Reference r;
  Rng pick(seed ^ 0xC0FFEEULL);
  for (auto* p : ref.params) {
    r.probes.push_back(probe_indices(p->value.size(), options.max_coords_per_param, pick));
    std::vector<double> numeric;
    for (std::size_t i : r.probes.back()) {
      numeric.push_back(reference_derivative(ref, *p, i, options.step));
      if (!std::isfinite(numeric.back())) {
        throw NumericError("gradcheck: non-finite reference derivative at " + p->id + "[" +
                           std::to_string(i) + "]");
      }
    }
    r.numeric.push_back(std::move(numeric));
  }
  return r;
}

template <typename T>
void score(const Instance<T>& analytic, const Reference& ref, std::uint64_t seed,
           GradSuiteRow& row) {
  if (analytic.params.size() != ref.probes.size()) {
    throw UsageError("gradcheck: instances disagree on the parameter list");
  }
  for (std::size_t k = 0; k < ref.probes.size(); ++k) {
    const Parameter<T>& p = *analytic.params[k];
    const auto& probes = ref.probes[k];
    const auto& numeric = ref.numeric[k];
    double scale = 0.0;
    for (double n : numeric) scale = std::max(scale, std::abs(n));
    const double floor = std::max(1e-8, row.precision == Precision::f32 ? 1e-2 * scale : 0.0);
    for (std::size_t j = 0; j < probes.size(); ++j) {
      const double a = static_cast<double>(p.grad[probes[j]]);
      if (!std::isfinite(a)) {
        throw NumericError("gradcheck: non-finite gradient at " + p.id + "[" +
                           std::to_string(probes[j]) + "]");
      }
      const double n = numeric[j];
      const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      ++row.coords;
      if (rel > row.max_rel_error || row.worst.empty()) {
        row.max_rel_error = std::max(row.max_rel_error, rel);
        row.worst = p.id + "[" + std::to_string(probes[j]) + "] @ " + std::to_string(seed);
      }
    }
  }
}

}  // namespace

std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

double gradcheck_tolerance(Precision p) { return p == Precision::f32 ? 1e-3 : 1e-6; }

std::vector<std::string> gradcheck_case_names() {
  std::vector<std::string> names;
  for (const auto& c : cases()) names.emplace_back(c.name);
  return names;
}

std::vector<GradSuiteRow> run_gradcheck_suite(const GradSuiteOptions& options) {
  if (options.seeds < 1) throw ConfigError("gradcheck: seeds must be >= 1");
  if (!(options.step > 0.0)) throw ConfigError("gradcheck: step must be > 0");
  if (options.precisions.empty()) throw ConfigError("gradcheck: no precision selected");
  const auto names = gradcheck_case_names();
  for (const auto& name : options.only) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("gradcheck: unknown case '" + name + "'");
    }
  }
  std::vector<GradSuiteRow> rows;
  for (const auto& c : cases()) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), c.name) == options.only.end()) {
      continue;
    }
    std::vector<GradSuiteRow> per;
    for (Precision p : options.precisions) {
      GradSuiteRow row;
      row.name = c.name;
      row.precision = p;
      row.tolerance = gradcheck_tolerance(p);
      per.push_back(std::move(row));
    }
    for (int s = 0; s < options.seeds; ++s) {
      const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(s);
      Rng ref_rng(seed);
      Instance<double> ref = c.make64(ref_rng);
      analytic_pass(ref);
      const Reference reference = reference_for(ref, options, seed);
      for (auto& row : per) {
        if (row.precision == Precision::f64) {
          score(ref, reference, seed, row);
        } else {
          Rng rng(seed);
          Instance<float> inst = c.make32(rng);
          analytic_pass(inst);
          score(inst, reference, seed, row);
        }
      }
    }
    for (auto& row : per) {
      row.pass = row.max_rel_error < row.tolerance;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_gradcheck_table(const std::vector<GradSuiteRow>& rows, std::ostream& os) {
  std::size_t width = 4;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << "case" << "  " << std::setw(6)
     << "prec" << std::setw(12)
     << "max_rel_err" << std::setw(10) << "tol" << std::setw(8) << "coords" << "result  worst\n";
  for (const auto& r : rows) {
    std::ostringstream err, tol;
    err << std::scientific << std::setprecision(3) << r.max_rel_error;
    tol << std::scientific << std::setprecision(0) << r.tolerance;
    os << std::setw(static_cast<int>(width)) << r.name << "  " << std::setw(6)
       << to_string(r.precision) << std::setw(12) << err.str()
       << std::setw(10) << tol.str() << std::setw(8) << r.coords << std::setw(8)
       << (r.pass ? "PASS" : "FAIL") << r.worst << "\n";
  }
  os << std::right;
}

}  // namespace saffn
