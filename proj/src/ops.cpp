#include "saffn/ops.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "saffn/kernels.hpp"

namespace saffn {

namespace {

enum class Broadcast { same, per_channel };

Broadcast broadcast_kind(const Dims& a, const Dims& b, const char* op) {
  if (a == b) return Broadcast::same;
  if (b.n == 1 && b.c == a.c && b.h == 1 && b.w == 1) return Broadcast::per_channel;
  throw ShapeError(std::string(op) + ": cannot broadcast " + b.str() + " onto " + a.str());
}

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src, T factor = T(1)) {
  T* d = dst.data();
  const T* s = src.data();
  const std::size_t count = src.size();
  for (std::size_t i = 0; i < count; ++i) d[i] += factor * s[i];
}

// Reduces a full-size tensor onto a per-channel vector: dst[c] += factor * sum_{n,h,w} src.
template <typename T>
void accumulate_per_channel(Tensor<T>& dst, const Tensor<T>& src, const T* weights = nullptr) {
  const Dims& d = src.dims();
  const std::size_t plane = d.plane();
  for (int c = 0; c < d.c; ++c) {
    T total = 0;
    for (int n = 0; n < d.n; ++n) {
      const T* s = src.plane(n, c);
      const T* wgt = weights ? weights + (static_cast<std::size_t>(n) * d.c + c) * plane : nullptr;
      T acc = 0;
      if (wgt) {
        for (std::size_t p = 0; p < plane; ++p) acc += s[p] * wgt[p];
      } else {
        for (std::size_t p = 0; p < plane; ++p) acc += s[p];
      }
      total += acc;
    }
    dst[static_cast<std::size_t>(c)] += total;
  }
}

template <typename T, typename F>
Tensor<T> binary_map(const Tensor<T>& a, const Tensor<T>& b, Broadcast kind, F f) {
  Tensor<T> out(a.dims());
  const std::size_t count = a.size();
  const T* pa = a.data();
  const T* pb = b.data();
  T* po = out.data();
  if (kind == Broadcast::same) {
    for (std::size_t i = 0; i < count; ++i) po[i] = f(pa[i], pb[i]);
  } else {
    const Dims& d = a.dims();
    const std::size_t plane = d.plane();
    for (int n = 0; n < d.n; ++n) {
      for (int c = 0; c < d.c; ++c) {
        const std::size_t base = (static_cast<std::size_t>(n) * d.c + c) * plane;
        const T bv = pb[c];
        for (std::size_t p = 0; p < plane; ++p) po[base + p] = f(pa[base + p], bv);
      }
    }
  }
  return out;
}

}  // namespace

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad,
              int groups) {
  const auto g = kernels::ConvGeometry::make(x.dims(), weight.dims(), stride, pad, groups);
  if (bias.defined() && bias.dims() != Dims{1, g.c_out, 1, 1}) {
    throw ShapeError("conv2d: bias dims " + bias.dims().str() + " expected (1," +
                     std::to_string(g.c_out) + ",1,1)");
  }
  Tensor<T> y(g.output_dims());
  kernels::parallel::conv2d_forward(g, x.value().data(), weight.value().data(),
                                    bias.defined() ? bias.value().data() : nullptr, y.data());
  return record<T>(std::move(y), {x, weight, bias}, [g](Node<T>& self) {
    const Tensor<T>& gy = self.grad;
    if (auto* gx = input_grad(self, 0)) {
      kernels::parallel::conv2d_backward_input(g, self.inputs[1]->value.data(), gy.data(),
                                               gx->data());
    }
    if (auto* gw = input_grad(self, 1)) {
      kernels::parallel::conv2d_backward_weight(g, self.inputs[0]->value.data(), gy.data(),
                                                gw->data());
    }
    if (auto* gb = input_grad(self, 2)) {
      kernels::conv2d_backward_bias(g, gy.data(), gb->data());
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  const Broadcast kind = broadcast_kind(a.dims(), b.dims(), "add");
  auto out = binary_map(a.value(), b.value(), kind, [](T u, T v) { return u + v; });
  return record<T>(std::move(out), {a, b}, [kind](Node<T>& self) {
    if (auto* ga = input_grad(self, 0)) accumulate(*ga, self.grad);
    if (auto* gb = input_grad(self, 1)) {
      if (kind == Broadcast::same) {
        accumulate(*gb, self.grad);
      } else {
        accumulate_per_channel(*gb, self.grad);
      }
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, T scalar) {
  Tensor<T> out = a.value();
  for (auto& v : out.span()) v += scalar;
  return record<T>(std::move(out), {a}, [](Node<T>& self) {
    if (auto* ga = input_grad(self, 0)) accumulate(*ga, self.grad);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  const Broadcast kind = broadcast_kind(a.dims(), b.dims(), "sub");
  auto out = binary_map(a.value(), b.value(), kind, [](T u, T v) { return u - v; });
  return record<T>(std::move(out), {a, b}, [kind](Node<T>& self) {
    if (auto* ga = input_grad(self, 0)) accumulate(*ga, self.grad);
    if (auto* gb = input_grad(self, 1)) {
      if (kind == Broadcast::same) {
        accumulate(*gb, self.grad, T(-1));
      } else {
        Tensor<T> neg = self.grad;
        for (auto& v : neg.span()) v = -v;
        accumulate_per_channel(*gb, neg);
      }
    }
  });
}

template <typename T>
Var<T> hadamard(const Var<T>& a, const Var<T>& b) {
  const Broadcast kind = broadcast_kind(a.dims(), b.dims(), "hadamard");
  auto out = binary_map(a.value(), b.value(), kind, [](T u, T v) { return u * v; });
  return record<T>(std::move(out), {a, b}, [kind](Node<T>& self) {
    const Tensor<T>& av = self.inputs[0]->value;
    const Tensor<T>& bv = self.inputs[1]->value;
    if (auto* ga = input_grad(self, 0)) {
      auto term = binary_map(self.grad, bv, kind, [](T g, T v) { return g * v; });
      accumulate(*ga, term);
    }
    if (auto* gb = input_grad(self, 1)) {
      if (kind == Broadcast::same) {
        T* d = gb->data();
        const T* g = self.grad.data();
        const T* x = av.data();
        for (std::size_t i = 0; i < av.size(); ++i) d[i] += g[i] * x[i];
      } else {
        accumulate_per_channel(*gb, self.grad, av.data());
      }
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.span()) v *= factor;
  return record<T>(std::move(out), {a}, [factor](Node<T>& self) {
    if (auto* ga = input_grad(self, 0)) accumulate(*ga, self.grad, factor);
  });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  Tensor<T> out = a.value();
  for (auto& v : out.span()) v = v > T(0) ? v : T(0);
  return record<T>(std::move(out), {a}, [](Node<T>& self) {
    if (auto* ga = input_grad(self, 0)) {
      const T* x = self.inputs[0]->value.data();
      const T* g = self.grad.data();
      T* d = ga->data();
      for (std::size_t i = 0; i < ga->size(); ++i) d[i] += x[i] > T(0) ? g[i] : T(0);
    }
  });
}

namespace {

// Copies channels [c0, c0+count) of src into dst channels starting at d0 (or the reverse
// direction with accumulation when `add` is set).
template <typename T>
void copy_channels(const Tensor<T>& src, int c0, int count, Tensor<T>& dst, int d0, bool add) {
  const std::size_t block = static_cast<std::size_t>(count) * src.dims().plane();
  for (int n = 0; n < src.n(); ++n) {
    const T* s = src.plane(n, c0);
    T* d = dst.plane(n, d0);
    if (add) {
      for (std::size_t i = 0; i < block; ++i) d[i] += s[i];
    } else {
      std::copy(s, s + block, d);
    }
  }
}

}  // namespace

template <typename T>
std::pair<Var<T>, Var<T>> channel_split2(const Var<T>& x) {
  const Dims d = x.dims();
  if (d.c % 2 != 0) {
    throw ShapeError("channel_split2: channel count must be even, got dims " + d.str());
  }
  const int half = d.c / 2;
  const Dims hd{d.n, half, d.h, d.w};
  Tensor<T> first(hd);
  Tensor<T> second(hd);
  copy_channels(x.value(), 0, half, first, 0, false);
  copy_channels(x.value(), half, half, second, 0, false);
  auto lhs = record<T>(std::move(first), {x}, [half](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) copy_channels(self.grad, 0, half, *gx, 0, true);
  });
  auto rhs = record<T>(std::move(second), {x}, [half](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) copy_channels(self.grad, 0, half, *gx, half, true);
  });
  return {lhs, rhs};
}

template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b) {
  const Dims da = a.dims();
  const Dims db = b.dims();
  if (da.n != db.n || da.h != db.h || da.w != db.w) {
    throw ShapeError("concat_channels: dims " + da.str() + " vs " + db.str());
  }
  Tensor<T> out(Dims{da.n, da.c + db.c, da.h, da.w});
  copy_channels(a.value(), 0, da.c, out, 0, false);
  copy_channels(b.value(), 0, db.c, out, da.c, false);
  const int ca = da.c;
  const int cb = db.c;
  return record<T>(std::move(out), {a, b}, [ca, cb](Node<T>& self) {
    if (auto* ga = input_grad(self, 0)) copy_channels(self.grad, 0, ca, *ga, 0, true);
    if (auto* gb = input_grad(self, 1)) copy_channels(self.grad, ca, cb, *gb, 0, true);
  });
}

template <typename T>
Var<T> layer_norm_2d(const Var<T>& x, const Var<T>& gain, const Var<T>& shift, T eps) {
  const Dims d = x.dims();
  const Dims vd{1, d.c, 1, 1};
  require_same_dims(gain.dims(), vd, "layer_norm_2d gain");
  require_same_dims(shift.dims(), vd, "layer_norm_2d shift");
  if (!(eps > T(0))) throw ConfigError("layer_norm_2d: eps must be > 0");
  const std::size_t plane = d.plane();
  const T inv_c = T(1) / static_cast<T>(d.c);
  // Per-site statistics, kept for the backward pass.
  auto mean = std::make_shared<std::vector<T>>(static_cast<std::size_t>(d.n) * plane);
  auto rstd = std::make_shared<std::vector<T>>(static_cast<std::size_t>(d.n) * plane);
  Tensor<T> out(d);
  const Tensor<T>& xv = x.value();
  const T* g = gain.value().data();
  const T* b = shift.value().data();
#pragma omp parallel for schedule(static)
  for (int n = 0; n < d.n; ++n) {
    T* mu = mean->data() + static_cast<std::size_t>(n) * plane;
    T* rs = rstd->data() + static_cast<std::size_t>(n) * plane;
    std::fill(mu, mu + plane, T(0));
    std::fill(rs, rs + plane, T(0));
    for (int c = 0; c < d.c; ++c) {
      const T* xp = xv.plane(n, c);
      for (std::size_t p = 0; p < plane; ++p) mu[p] += xp[p];
    }
    for (std::size_t p = 0; p < plane; ++p) mu[p] *= inv_c;
    for (int c = 0; c < d.c; ++c) {
      const T* xp = xv.plane(n, c);
      for (std::size_t p = 0; p < plane; ++p) {
        const T dev = xp[p] - mu[p];
        rs[p] += dev * dev;
      }
    }
    for (std::size_t p = 0; p < plane; ++p) rs[p] = T(1) / std::sqrt(rs[p] * inv_c + eps);
    for (int c = 0; c < d.c; ++c) {
      const T* xp = xv.plane(n, c);
      T* yp = out.plane(n, c);
      for (std::size_t p = 0; p < plane; ++p) yp[p] = (xp[p] - mu[p]) * rs[p] * g[c] + b[c];
    }
  }
  return record<T>(std::move(out), {x, gain, shift}, [mean, rstd, d, inv_c](Node<T>& self) {
    const std::size_t plane = d.plane();
    const Tensor<T>& xv = self.inputs[0]->value;
    const T* g = self.inputs[1]->value.data();
    const Tensor<T>& gy = self.grad;
    if (auto* gx = input_grad(self, 0)) {
#pragma omp parallel for schedule(static)
      for (int n = 0; n < d.n; ++n) {
        const T* mu = mean->data() + static_cast<std::size_t>(n) * plane;
        const T* rs = rstd->data() + static_cast<std::size_t>(n) * plane;
        std::vector<T> m1(plane, T(0));
        std::vector<T> m2(plane, T(0));
        for (int c = 0; c < d.c; ++c) {
          const T* xp = xv.plane(n, c);
          const T* gp = gy.plane(n, c);
          for (std::size_t p = 0; p < plane; ++p) {
            const T dxhat = gp[p] * g[c];
            m1[p] += dxhat;
            m2[p] += dxhat * (xp[p] - mu[p]) * rs[p];
          }
        }
        for (int c = 0; c < d.c; ++c) {
          const T* xp = xv.plane(n, c);
          const T* gp = gy.plane(n, c);
          T* dp = gx->plane(n, c);
          for (std::size_t p = 0; p < plane; ++p) {
            const T xhat = (xp[p] - mu[p]) * rs[p];
            dp[p] += rs[p] * (gp[p] * g[c] - m1[p] * inv_c - xhat * m2[p] * inv_c);
          }
        }
      }
    }
    Tensor<T>* gg = input_grad(self, 1);
    Tensor<T>* gb = input_grad(self, 2);
    if (gg || gb) {
      for (int c = 0; c < d.c; ++c) {
        T sum_gx = 0;
        T sum_g = 0;
        for (int n = 0; n < d.n; ++n) {
          const T* mu = mean->data() + static_cast<std::size_t>(n) * plane;
          const T* rs = rstd->data() + static_cast<std::size_t>(n) * plane;
          const T* xp = xv.plane(n, c);
          const T* gp = gy.plane(n, c);
          T acc_gx = 0;
          T acc_g = 0;
          for (std::size_t p = 0; p < plane; ++p) {
            acc_gx += gp[p] * (xp[p] - mu[p]) * rs[p];
            acc_g += gp[p];
          }
          sum_gx += acc_gx;
          sum_g += acc_g;
        }
        if (gg) (*gg)[static_cast<std::size_t>(c)] += sum_gx;
        if (gb) (*gb)[static_cast<std::size_t>(c)] += sum_g;
      }
    }
  });
}

namespace {

// Maps every element of the shuffled-up layout to its source in the packed layout.
// up: out(n, c, i*r+a, j*r+b) = in(n, c*r*r + a*r + b, i, j).
template <typename T, typename F>
void for_each_shuffle(const Dims& packed, int r, F f) {
  const int c_out = packed.c / (r * r);
  for (int n = 0; n < packed.n; ++n) {
    for (int c = 0; c < c_out; ++c) {
      for (int a = 0; a < r; ++a) {
        for (int b = 0; b < r; ++b) {
          const int cp = c * r * r + a * r + b;
          for (int i = 0; i < packed.h; ++i) {
            for (int j = 0; j < packed.w; ++j) {
              const std::size_t src =
                  ((static_cast<std::size_t>(n) * packed.c + cp) * packed.h + i) * packed.w + j;
              const std::size_t dst =
                  ((static_cast<std::size_t>(n) * c_out + c) * packed.h * r + i * r + a) *
                      static_cast<std::size_t>(packed.w) * r +
                  static_cast<std::size_t>(j) * r + b;
              f(src, dst);
            }
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> pixel_shuffle_up(const Var<T>& x, int r) {
  const Dims d = x.dims();
  if (r < 1 || d.c % (r * r) != 0) {
    throw ShapeError("pixel_shuffle up: channels of " + d.str() + " not divisible by r^2, r=" +
                     std::to_string(r));
  }
  Tensor<T> out(Dims{d.n, d.c / (r * r), d.h * r, d.w * r});
  const T* in = x.value().data();
  T* o = out.data();
  for_each_shuffle<T>(d, r, [&](std::size_t src, std::size_t dst) { o[dst] = in[src]; });
  return record<T>(std::move(out), {x}, [d, r](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) {
      T* gi = gx->data();
      const T* go = self.grad.data();
      for_each_shuffle<T>(d, r, [&](std::size_t src, std::size_t dst) { gi[src] += go[dst]; });
    }
  });
}

template <typename T>
Var<T> pixel_shuffle_down(const Var<T>& x, int r) {
  const Dims d = x.dims();
  if (r < 1 || d.h % r != 0 || d.w % r != 0) {
    throw ShapeError("pixel_shuffle down: spatial dims of " + d.str() + " not divisible by r=" +
                     std::to_string(r));
  }
  const Dims packed{d.n, d.c * r * r, d.h / r, d.w / r};
  Tensor<T> out(packed);
  const T* in = x.value().data();
  T* o = out.data();
  for_each_shuffle<T>(packed, r, [&](std::size_t src, std::size_t dst) { o[src] = in[dst]; });
  return record<T>(std::move(out), {x}, [packed, r](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) {
      T* gi = gx->data();
      const T* go = self.grad.data();
      for_each_shuffle<T>(packed, r, [&](std::size_t src, std::size_t dst) { gi[dst] += go[src]; });
    }
  });
}

template <typename T>
Var<T> avg_pool2(const Var<T>& x) {
  const Dims d = x.dims();
  if (d.h % 2 != 0 || d.w % 2 != 0) {
    throw ShapeError("avg_pool2: spatial dims of " + d.str() + " must be even");
  }
  const Dims od{d.n, d.c, d.h / 2, d.w / 2};
  Tensor<T> out(od);
  for (int n = 0; n < d.n; ++n) {
    for (int c = 0; c < d.c; ++c) {
      const T* ip = x.value().plane(n, c);
      T* op = out.plane(n, c);
      for (int i = 0; i < od.h; ++i) {
        const T* r0 = ip + static_cast<std::size_t>(2 * i) * d.w;
        const T* r1 = r0 + d.w;
        for (int j = 0; j < od.w; ++j) {
          op[static_cast<std::size_t>(i) * od.w + j] =
              T(0.25) * (r0[2 * j] + r0[2 * j + 1] + r1[2 * j] + r1[2 * j + 1]);
        }
      }
    }
  }
  return record<T>(std::move(out), {x}, [d, od](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) {
      for (int n = 0; n < d.n; ++n) {
        for (int c = 0; c < d.c; ++c) {
          T* gp = gx->plane(n, c);
          const T* go = self.grad.plane(n, c);
          for (int i = 0; i < od.h; ++i) {
            for (int j = 0; j < od.w; ++j) {
              const T v = T(0.25) * go[static_cast<std::size_t>(i) * od.w + j];
              T* r0 = gp + static_cast<std::size_t>(2 * i) * d.w + 2 * j;
              r0[0] += v;
              r0[1] += v;
              r0[d.w] += v;
              r0[d.w + 1] += v;
            }
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> reflect_pad(const Var<T>& x, int pad_bottom, int pad_right) {
  if (pad_bottom < 0 || pad_right < 0) throw ConfigError("reflect_pad: negative padding");
  const Dims d = x.dims();
  if (pad_bottom == 0 && pad_right == 0) return x;
  const Dims od{d.n, d.c, d.h + pad_bottom, d.w + pad_right};
  std::vector<int> rows(static_cast<std::size_t>(od.h));
  std::vector<int> cols(static_cast<std::size_t>(od.w));
  for (int i = 0; i < od.h; ++i) rows[static_cast<std::size_t>(i)] = reflect_index(i, d.h);
  for (int j = 0; j < od.w; ++j) cols[static_cast<std::size_t>(j)] = reflect_index(j, d.w);
  Tensor<T> out(od);
  for (int n = 0; n < d.n; ++n) {
    for (int c = 0; c < d.c; ++c) {
      const T* ip = x.value().plane(n, c);
      T* op = out.plane(n, c);
      for (int i = 0; i < od.h; ++i) {
        const T* src = ip + static_cast<std::size_t>(rows[static_cast<std::size_t>(i)]) * d.w;
        for (int j = 0; j < od.w; ++j) {
          op[static_cast<std::size_t>(i) * od.w + j] = src[cols[static_cast<std::size_t>(j)]];
        }
      }
    }
  }
  return record<T>(std::move(out), {x}, [d, od, rows, cols](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) {
      for (int n = 0; n < d.n; ++n) {
        for (int c = 0; c < d.c; ++c) {
          T* gp = gx->plane(n, c);
          const T* go = self.grad.plane(n, c);
          for (int i = 0; i < od.h; ++i) {
            T* dst = gp + static_cast<std::size_t>(rows[static_cast<std::size_t>(i)]) * d.w;
            for (int j = 0; j < od.w; ++j) {
              dst[cols[static_cast<std::size_t>(j)]] += go[static_cast<std::size_t>(i) * od.w + j];
            }
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> crop(const Var<T>& x, int h, int w) {
  const Dims d = x.dims();
  if (h < 1 || w < 1 || h > d.h || w > d.w) {
    throw ShapeError("crop: window " + std::to_string(h) + "x" + std::to_string(w) +
                     " outside dims " + d.str());
  }
  if (h == d.h && w == d.w) return x;
  const Dims od{d.n, d.c, h, w};
  Tensor<T> out(od);
  for (int n = 0; n < d.n; ++n) {
    for (int c = 0; c < d.c; ++c) {
      for (int i = 0; i < h; ++i) {
        const T* src = x.value().plane(n, c) + static_cast<std::size_t>(i) * d.w;
        std::copy(src, src + w, out.plane(n, c) + static_cast<std::size_t>(i) * w);
      }
    }
  }
  return record<T>(std::move(out), {x}, [d, od](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) {
      for (int n = 0; n < d.n; ++n) {
        for (int c = 0; c < d.c; ++c) {
          for (int i = 0; i < od.h; ++i) {
            T* dst = gx->plane(n, c) + static_cast<std::size_t>(i) * d.w;
            const T* src = self.grad.plane(n, c) + static_cast<std::size_t>(i) * od.w;
            for (int j = 0; j < od.w; ++j) dst[j] += src[j];
          }
        }
      }
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  double total = 0.0;
  for (T v : x.value().span()) total += static_cast<double>(v);
  Tensor<T> out(Dims{1, 1, 1, 1}, static_cast<T>(total));
  return record<T>(std::move(out), {x}, [](Node<T>& self) {
    if (auto* gx = input_grad(self, 0)) {
      const T g = self.grad[0];
      for (auto& v : gx->span()) v += g;
    }
  });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  return scale(sum(x), static_cast<T>(1.0 / static_cast<double>(x.value().size())));
}

#define SAFFN_INSTANTIATE_OPS(T)                                                                \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int, int);           \
  template Var<T> add(const Var<T>&, const Var<T>&);                                            \
  template Var<T> add(const Var<T>&, T);                                                        \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                            \
  template Var<T> hadamard(const Var<T>&, const Var<T>&);                                       \
  template Var<T> scale(const Var<T>&, T);                                                      \
  template Var<T> relu(const Var<T>&);                                                          \
  template std::pair<Var<T>, Var<T>> channel_split2(const Var<T>&);                             \
  template Var<T> concat_channels(const Var<T>&, const Var<T>&);                                \
  template Var<T> layer_norm_2d(const Var<T>&, const Var<T>&, const Var<T>&, T);                \
  template Var<T> pixel_shuffle_up(const Var<T>&, int);                                         \
  template Var<T> pixel_shuffle_down(const Var<T>&, int);                                       \
  template Var<T> avg_pool2(const Var<T>&);                                                     \
  template Var<T> reflect_pad(const Var<T>&, int, int);                                         \
  template Var<T> crop(const Var<T>&, int, int);                                                \
  template Var<T> sum(const Var<T>&);                                                           \
  template Var<T> mean(const Var<T>&);

SAFFN_INSTANTIATE_OPS(float)
SAFFN_INSTANTIATE_OPS(double)

#undef SAFFN_INSTANTIATE_OPS

}  // namespace saffn
