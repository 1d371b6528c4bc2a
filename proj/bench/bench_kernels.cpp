// Serial reference vs OpenMP conv kernels on layer shapes from the default
// network. Set OMP_NUM_THREADS to compare thread counts.
#include <benchmark/benchmark.h>

#include <saffn/kernels.hpp>
#include <saffn/rng.hpp>

#include <vector>

namespace {

using saffn::kernels::ConvGeometry;

struct Shape {
  int c_in, hw, c_out, kernel, stride, groups;
};

// 3x3 full, 3x3 depthwise, 1x1 projection, 2x2 strided downsample.
constexpr Shape kShapes[] = {
    {32, 64, 32, 3, 1, 1},
    {64, 64, 64, 3, 1, 64},
    {64, 64, 128, 1, 1, 1},
    {64, 64, 128, 2, 2, 1},
};

struct Fixture {
  ConvGeometry g;
  std::vector<float> x, w, b, y;

  explicit Fixture(const Shape& s) {
    const int pad = s.kernel == 3 ? 1 : 0;
    g = ConvGeometry::make({1, s.c_in, s.hw, s.hw}, {s.c_out, s.c_in / s.groups, s.kernel, s.kernel},
                           s.stride, pad, s.groups);
    saffn::Rng rng(1);
    auto fill = [&](std::vector<float>& v, std::size_t n) {
      v.resize(n);
      for (float& e : v) e = static_cast<float>(rng.uniform(-0.5, 0.5));
    };
    fill(x, g.input_dims().numel());
    fill(w, g.weight_dims().numel());
    fill(b, static_cast<std::size_t>(g.c_out));
    y.assign(g.output_dims().numel(), 0.0f);
  }
};

enum class Pass { forward, input, weight };

template <bool Parallel, Pass P>
void conv(benchmark::State& state) {
  Fixture f(kShapes[state.range(0)]);
  std::vector<float> gx(f.x.size()), gw(f.w.size());
  namespace k = saffn::kernels;
  for (auto _ : state) {
    if constexpr (P == Pass::forward) {
      if constexpr (Parallel) k::parallel::conv2d_forward(f.g, f.x.data(), f.w.data(), f.b.data(), f.y.data());
      else k::reference::conv2d_forward(f.g, f.x.data(), f.w.data(), f.b.data(), f.y.data());
      benchmark::DoNotOptimize(f.y.data());
    } else if constexpr (P == Pass::input) {
      if constexpr (Parallel) k::parallel::conv2d_backward_input(f.g, f.w.data(), f.y.data(), gx.data());
      else k::reference::conv2d_backward_input(f.g, f.w.data(), f.y.data(), gx.data());
      benchmark::DoNotOptimize(gx.data());
    } else {
      if constexpr (Parallel) k::parallel::conv2d_backward_weight(f.g, f.x.data(), f.y.data(), gw.data());
      else k::reference::conv2d_backward_weight(f.g, f.x.data(), f.y.data(), gw.data());
      benchmark::DoNotOptimize(gw.data());
    }
    benchmark::ClobberMemory();
  }
  const auto& g = f.g;
  state.counters["MAC/s"] = benchmark::Counter(
      static_cast<double>(g.output_dims().numel()) * g.c_in_per_group() * g.kernel * g.kernel,
      benchmark::Counter::kIsIterationInvariantRate);
}

#define SAFFN_CONV_BENCH(name, par, pass) \
  BENCHMARK_TEMPLATE(conv, par, pass)->Name(name)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond)

SAFFN_CONV_BENCH("reference/forward", false, Pass::forward);
SAFFN_CONV_BENCH("parallel/forward", true, Pass::forward);
SAFFN_CONV_BENCH("reference/backward_input", false, Pass::input);
SAFFN_CONV_BENCH("parallel/backward_input", true, Pass::input);
SAFFN_CONV_BENCH("reference/backward_weight", false, Pass::weight);
SAFFN_CONV_BENCH("parallel/backward_weight", true, Pass::weight);

}  // namespace

BENCHMARK_MAIN();
