#include "saffn/edge.hpp"

#include <algorithm>
#include <vector>

namespace saffn {

namespace {

constexpr std::array<Stencil, 4> kStencils = {{
    {-1, -2, -1, 0, 0, 0, 1, 2, 1},  // vertical
    {-1, 0, 1, -2, 0, 2, -1, 0, 1},  // horizontal
    {-2, -1, 0, -1, 0, 1, 0, 1, 2},  // diagonal, main direction
    {0, 1, 2, -1, 0, 1, -2, -1, 0},  // diagonal, anti direction
}};

Stencil negated(const Stencil& s) {
  Stencil out{};
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = -s[i];
  return out;
}

const std::array<Stencil, 8>& all_stencils() {
  static const std::array<Stencil, 8> table = {
      kStencils[0],          kStencils[1],          kStencils[2],          kStencils[3],
      negated(kStencils[0]), negated(kStencils[1]), negated(kStencils[2]), negated(kStencils[3]),
  };
  return table;
}

// Stencil taps split by sign, each half ordered by magnitude. Summing both
// halves in the same order makes the response to a constant exactly zero.
struct Taps {
  struct Tap {
    int di, dj, weight;
  };
  std::vector<Tap> pos, neg;
};

const Taps& taps(int index) {
  static const std::array<Taps, 8> table = [] {
    std::array<Taps, 8> t{};
    for (std::size_t s = 0; s < 8; ++s) {
      for (int k = 0; k < 9; ++k) {
        const int v = all_stencils()[s][static_cast<std::size_t>(k)];
        if (v > 0) t[s].pos.push_back({k / 3 - 1, k % 3 - 1, v});
        if (v < 0) t[s].neg.push_back({k / 3 - 1, k % 3 - 1, -v});
      }
      for (auto* half : {&t[s].pos, &t[s].neg}) {
        std::stable_sort(half->begin(), half->end(),
                         [](const Taps::Tap& a, const Taps::Tap& b) { return a.weight < b.weight; });
      }
    }
    return t;
  }();
  return table[static_cast<std::size_t>(index)];
}

double tap_sum(const std::vector<Taps::Tap>& half, const double* plane, int h, int w, int i, int j) {
  double acc = 0.0;
  for (const auto& t : half) {
    const int y = i + t.di;
    const int x = j + t.dj;
    if (y < 0 || y >= h || x < 0 || x >= w) continue;
    acc += t.weight * plane[static_cast<std::size_t>(y) * w + x];
  }
  return acc;
}

// Unscaled stencil response of one plane, zero padded.
void respond(const Taps& t, const double* plane, int h, int w, double* out) {
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      out[static_cast<std::size_t>(i) * w + j] =
          tap_sum(t.pos, plane, h, w, i, j) - tap_sum(t.neg, plane, h, w, i, j);
    }
  }
}

// Adds scale * (adjoint stencil correlation of g) into dst.
template <typename T>
void respond_adjoint(const Taps& t, const T* g, int h, int w, double scale, double* dst) {
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double gv = scale * static_cast<double>(g[static_cast<std::size_t>(i) * w + j]);
      if (gv == 0.0) continue;
      for (const auto& tap : t.pos) {
        const int y = i + tap.di, x = j + tap.dj;
        if (y >= 0 && y < h && x >= 0 && x < w) dst[static_cast<std::size_t>(y) * w + x] += tap.weight * gv;
      }
      for (const auto& tap : t.neg) {
        const int y = i + tap.di, x = j + tap.dj;
        if (y >= 0 && y < h && x >= 0 && x < w) dst[static_cast<std::size_t>(y) * w + x] -= tap.weight * gv;
      }
    }
  }
}

// y[n,c] = gamma[c] * stencil(c) applied to the channel sum of x (or to x[n,c]
// alone when depthwise). Responses are accumulated in double.
template <typename T>
Var<T> stencil_conv(const Var<T>& x, const EdgeKernelBank<T>& bank, bool depthwise) {
  const Dims d = x.dims();
  const int c_out = bank.out_channels;
  const int kinds = bank.kinds;
  const std::size_t plane = d.plane();
  Var<T> gamma = bind(x.tape(), bank.gamma);
  const T* g = gamma.value().data();
  const T* xs = x.value().data();

  // Input planes in double: the channel sum, or every channel when depthwise.
  const int planes_per_n = depthwise ? d.c : 1;
  std::vector<double> src(static_cast<std::size_t>(d.n) * planes_per_n * plane, 0.0);
  for (int n = 0; n < d.n; ++n) {
    for (int c = 0; c < d.c; ++c) {
      const T* in = xs + (static_cast<std::size_t>(n) * d.c + c) * plane;
      double* dst = src.data() + (static_cast<std::size_t>(n) * planes_per_n + (depthwise ? c : 0)) * plane;
      for (std::size_t k = 0; k < plane; ++k) dst[k] += static_cast<double>(in[k]);
    }
  }

  Tensor<T> response(Dims{d.n, c_out, d.h, d.w});
  Tensor<T> y(Dims{d.n, c_out, d.h, d.w});
  const int total = d.n * c_out;
#pragma omp parallel
  {
    std::vector<double> r(plane);
#pragma omp for schedule(static)
    for (int nc = 0; nc < total; ++nc) {
      const int n = nc / c_out;
      const int c = nc % c_out;
      const double* in = src.data() + (static_cast<std::size_t>(n) * planes_per_n + (depthwise ? c : 0)) * plane;
      respond(taps(c % kinds), in, d.h, d.w, r.data());
      const double gc = static_cast<double>(g[c]);
      T* ro = response.data() + static_cast<std::size_t>(nc) * plane;
      T* yo = y.data() + static_cast<std::size_t>(nc) * plane;
      for (std::size_t k = 0; k < plane; ++k) {
        ro[k] = static_cast<T>(r[k]);
        yo[k] = static_cast<T>(gc * r[k]);
      }
    }
  }

  return record<T>(std::move(y), {x, gamma},
                   [response = std::move(response), d, c_out, kinds, depthwise](Node<T>& self) {
    const std::size_t plane = d.plane();
    const T* gy = self.grad.data();
    if (Tensor<T>* gg = input_grad(self, 1)) {
      for (int c = 0; c < c_out; ++c) {
        double acc = 0.0;
        for (int n = 0; n < d.n; ++n) {
          const std::size_t off = (static_cast<std::size_t>(n) * c_out + c) * plane;
          for (std::size_t k = 0; k < plane; ++k) {
            acc += static_cast<double>(gy[off + k]) * static_cast<double>(response[off + k]);
          }
        }
        (*gg)[static_cast<std::size_t>(c)] += static_cast<T>(acc);
      }
    }
    if (Tensor<T>* gx = input_grad(self, 0)) {
      const T* gamma = self.inputs[1]->value.data();
      if (depthwise) {
        const int total = d.n * d.c;
#pragma omp parallel
        {
          std::vector<double> acc(plane);
#pragma omp for schedule(static)
          for (int nc = 0; nc < total; ++nc) {
            const int c = nc % d.c;
            std::fill(acc.begin(), acc.end(), 0.0);
            respond_adjoint(taps(c % kinds), gy + static_cast<std::size_t>(nc) * plane, d.h, d.w,
                            static_cast<double>(gamma[c]), acc.data());
            T* dst = gx->data() + static_cast<std::size_t>(nc) * plane;
            for (std::size_t k = 0; k < plane; ++k) dst[k] += static_cast<T>(acc[k]);
          }
        }
      } else {
#pragma omp parallel
        {
          std::vector<double> acc(plane);
#pragma omp for schedule(static)
          for (int n = 0; n < d.n; ++n) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int c = 0; c < c_out; ++c) {
              respond_adjoint(taps(c % kinds), gy + (static_cast<std::size_t>(n) * c_out + c) * plane, d.h,
                              d.w, static_cast<double>(gamma[c]), acc.data());
            }
            for (int ci = 0; ci < d.c; ++ci) {
              T* dst = gx->data() + (static_cast<std::size_t>(n) * d.c + ci) * plane;
              for (std::size_t k = 0; k < plane; ++k) dst[k] += static_cast<T>(acc[k]);
            }
          }
        }
      }
    }
  });
}

}  // namespace

const Stencil& base_stencil(int index) {
  if (index < 0 || index >= 8) throw ConfigError("base_stencil: index out of range");
  return all_stencils()[static_cast<std::size_t>(index)];
}

template <typename T>
const Stencil& EdgeKernelBank<T>::stencil(int channel) const {
  return all_stencils()[static_cast<std::size_t>(channel % kinds)];
}

template <typename T>
Tensor<T> EdgeKernelBank<T>::realized(int per_channel_inputs) const {
  Tensor<T> weight(Dims{out_channels, per_channel_inputs, 3, 3});
  for (int c = 0; c < out_channels; ++c) {
    const Stencil& s = stencil(c);
    const T g = gamma.value[static_cast<std::size_t>(c)];
    for (int ci = 0; ci < per_channel_inputs; ++ci) {
      T* w = weight.data() + (static_cast<std::size_t>(c) * per_channel_inputs + ci) * 9;
      for (int k = 0; k < 9; ++k) w[k] = g * static_cast<T>(s[static_cast<std::size_t>(k)]);
    }
  }
  return weight;
}

template <typename T>
EdgeKernelBank<T> make_kernel_bank(int kinds, int out_channels, T gamma_init,
                                   const std::string& name) {
  if (kinds != 2 && kinds != 4 && kinds != 8) {
    throw ConfigError("edge kernel kinds must be 2, 4 or 8, got " + std::to_string(kinds));
  }
  if (out_channels < 1) throw ConfigError("edge kernel bank needs >= 1 output channel");
  EdgeKernelBank<T> bank;
  bank.kinds = kinds;
  bank.out_channels = out_channels;
  bank.gamma = Parameter<T>(name + ".gamma", Tensor<T>(Dims{1, out_channels, 1, 1}, gamma_init));
  return bank;
}

template <typename T>
Var<T> edge_conv(const Var<T>& x, const EdgeKernelBank<T>& bank) {
  return stencil_conv(x, bank, false);
}

template <typename T>
Var<T> depthwise_edge_conv(const Var<T>& x, const EdgeKernelBank<T>& bank) {
  const int c_in = x.dims().c;
  if (bank.out_channels != c_in) {
    throw ConfigError("depthwise_edge_conv: bank has " + std::to_string(bank.out_channels) +
                      " channels but input has " + std::to_string(c_in));
  }
  return stencil_conv(x, bank, true);
}

template struct EdgeKernelBank<float>;
template struct EdgeKernelBank<double>;
template EdgeKernelBank<float> make_kernel_bank(int, int, float, const std::string&);
template EdgeKernelBank<double> make_kernel_bank(int, int, double, const std::string&);
template Var<float> edge_conv(const Var<float>&, const EdgeKernelBank<float>&);
template Var<double> edge_conv(const Var<double>&, const EdgeKernelBank<double>&);
template Var<float> depthwise_edge_conv(const Var<float>&, const EdgeKernelBank<float>&);
template Var<double> depthwise_edge_conv(const Var<double>&, const EdgeKernelBank<double>&);

}  // namespace saffn
