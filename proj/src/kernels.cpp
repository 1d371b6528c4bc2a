#include "saffn/kernels.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace saffn::kernels {

ConvGeometry ConvGeometry::make(const Dims& x, const Dims& weight, int stride, int pad,
                                int groups) {
  if (!x.valid() || !weight.valid()) {
    throw ShapeError("conv2d: invalid dims x=" + x.str() + " weight=" + weight.str());
  }
  if (stride < 1) throw ConfigError("conv2d: stride must be >= 1, got " + std::to_string(stride));
  if (pad < 0) throw ConfigError("conv2d: pad must be >= 0, got " + std::to_string(pad));
  if (groups < 1 || x.c % groups != 0 || weight.n % groups != 0) {
    throw ConfigError("conv2d: groups=" + std::to_string(groups) + " must divide c_in=" +
                      std::to_string(x.c) + " and c_out=" + std::to_string(weight.n));
  }
  if (weight.h != weight.w) {
    throw ShapeError("conv2d: kernel must be square, weight dims " + weight.str());
  }
  if (weight.c != x.c / groups) {
    throw ShapeError("conv2d: weight dims " + weight.str() + " incompatible with input dims " +
                     x.str() + " at groups=" + std::to_string(groups));
  }
  ConvGeometry g;
  g.batch = x.n;
  g.c_in = x.c;
  g.h_in = x.h;
  g.w_in = x.w;
  g.c_out = weight.n;
  g.kernel = weight.h;
  g.stride = stride;
  g.pad = pad;
  g.groups = groups;
  const int span_h = x.h + 2 * pad - g.kernel;
  const int span_w = x.w + 2 * pad - g.kernel;
  if (span_h < 0 || span_w < 0) {
    throw ShapeError("conv2d: kernel " + weight.str() + " larger than padded input " + x.str());
  }
  g.h_out = span_h / stride + 1;
  g.w_out = span_w / stride + 1;
  return g;
}

namespace {

std::size_t plane_offset(int n, int c, int channels, int h, int w) {
  return (static_cast<std::size_t>(n) * channels + c) * static_cast<std::size_t>(h) * w;
}

/// Half-open range of output indices o whose input index o*stride - pad + k lies in [0, extent).
struct Range {
  int lo;
  int hi;
};

Range valid_outputs(int k, int pad, int stride, int extent, int out_extent) {
  // o*stride >= pad - k  and  o*stride <= extent - 1 + pad - k
  const int lo_num = pad - k;
  int lo = lo_num <= 0 ? 0 : (lo_num + stride - 1) / stride;
  const int hi_num = extent - 1 + pad - k;
  int hi = hi_num < 0 ? 0 : hi_num / stride + 1;
  lo = std::min(lo, out_extent);
  hi = std::clamp(hi, lo, out_extent);
  return {lo, hi};
}

bool is_pointwise(const ConvGeometry& g) {
  return g.kernel == 1 && g.stride == 1 && g.pad == 0 && g.groups == 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// reference

namespace reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* weight, const T* bias, T* y) {
  const int cin_g = g.c_in_per_group();
  const int cout_g = g.c_out_per_group();
  for (int n = 0; n < g.batch; ++n) {
    for (int co = 0; co < g.c_out; ++co) {
      const int group = co / cout_g;
      for (int oy = 0; oy < g.h_out; ++oy) {
        for (int ox = 0; ox < g.w_out; ++ox) {
          T acc = bias ? bias[co] : T(0);
          for (int cl = 0; cl < cin_g; ++cl) {
            const int ci = group * cin_g + cl;
            for (int ky = 0; ky < g.kernel; ++ky) {
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int iy = oy * g.stride - g.pad + ky;
                const int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= g.h_in || ix < 0 || ix >= g.w_in) continue;
                const T xv = x[plane_offset(n, ci, g.c_in, g.h_in, g.w_in) +
                               static_cast<std::size_t>(iy) * g.w_in + ix];
                const T wv = weight[((static_cast<std::size_t>(co) * cin_g + cl) * g.kernel + ky) *
                                        g.kernel +
                                    kx];
                acc += xv * wv;
              }
            }
          }
          y[plane_offset(n, co, g.c_out, g.h_out, g.w_out) +
            static_cast<std::size_t>(oy) * g.w_out + ox] = acc;
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(const ConvGeometry& g, const T* weight, const T* grad_y, T* grad_x) {
  const int cin_g = g.c_in_per_group();
  const int cout_g = g.c_out_per_group();
  for (int n = 0; n < g.batch; ++n) {
    for (int co = 0; co < g.c_out; ++co) {
      const int group = co / cout_g;
      for (int oy = 0; oy < g.h_out; ++oy) {
        for (int ox = 0; ox < g.w_out; ++ox) {
          const T gy = grad_y[plane_offset(n, co, g.c_out, g.h_out, g.w_out) +
                              static_cast<std::size_t>(oy) * g.w_out + ox];
          for (int cl = 0; cl < cin_g; ++cl) {
            const int ci = group * cin_g + cl;
            for (int ky = 0; ky < g.kernel; ++ky) {
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int iy = oy * g.stride - g.pad + ky;
                const int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= g.h_in || ix < 0 || ix >= g.w_in) continue;
                const T wv = weight[((static_cast<std::size_t>(co) * cin_g + cl) * g.kernel + ky) *
                                        g.kernel +
                                    kx];
                grad_x[plane_offset(n, ci, g.c_in, g.h_in, g.w_in) +
                       static_cast<std::size_t>(iy) * g.w_in + ix] += wv * gy;
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_weight(const ConvGeometry& g, const T* x, const T* grad_y, T* grad_w) {
  const int cin_g = g.c_in_per_group();
  const int cout_g = g.c_out_per_group();
  for (int co = 0; co < g.c_out; ++co) {
    const int group = co / cout_g;
    for (int cl = 0; cl < cin_g; ++cl) {
      const int ci = group * cin_g + cl;
      for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
          T acc = 0;
          for (int n = 0; n < g.batch; ++n) {
            for (int oy = 0; oy < g.h_out; ++oy) {
              for (int ox = 0; ox < g.w_out; ++ox) {
                const int iy = oy * g.stride - g.pad + ky;
                const int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= g.h_in || ix < 0 || ix >= g.w_in) continue;
                acc += grad_y[plane_offset(n, co, g.c_out, g.h_out, g.w_out) +
                              static_cast<std::size_t>(oy) * g.w_out + ox] *
                       x[plane_offset(n, ci, g.c_in, g.h_in, g.w_in) +
                         static_cast<std::size_t>(iy) * g.w_in + ix];
              }
            }
          }
          grad_w[((static_cast<std::size_t>(co) * cin_g + cl) * g.kernel + ky) * g.kernel + kx] +=
              acc;
        }
      }
    }
  }
}

}  // namespace reference

// ---------------------------------------------------------------------------
// parallel

namespace parallel {

namespace {

constexpr int kChannelBlock = 4;
constexpr int kPixelBlock = 64;
constexpr int kLanes = 16;

// Dot product with kLanes independent partial sums so the loop vectorises
// without reassociating; the summation order is fixed.
template <typename T>
inline T lane_dot(const T* a, const T* b, std::size_t n) {
  T acc[kLanes] = {};
  std::size_t p = 0;
  for (; p + kLanes <= n; p += kLanes) {
    for (int l = 0; l < kLanes; ++l) acc[l] += a[p + l] * b[p + l];
  }
  T total = 0;
  for (; p < n; ++p) total += a[p] * b[p];
  for (int l = 0; l < kLanes; ++l) total += acc[l];
  return total;
}

// out[i][j] += sum_p a[i][p] * b[j][p] for a 4 x 4 tile.
template <typename T>
void lane_dot_tile(const T* const* a, const T* const* b, std::size_t n,
                   T out[kChannelBlock][kChannelBlock]) {
  static_assert(kChannelBlock == 4);
  alignas(64) T acc[16][kLanes] = {};
  std::size_t p = 0;
  for (; p + kLanes <= n; p += kLanes) {
    const T* a0 = a[0] + p;
    const T* a1 = a[1] + p;
    const T* a2 = a[2] + p;
    const T* a3 = a[3] + p;
    const T* b0 = b[0] + p;
    const T* b1 = b[1] + p;
    const T* b2 = b[2] + p;
    const T* b3 = b[3] + p;
#pragma omp simd
    for (int l = 0; l < kLanes; ++l) {
      acc[0][l] += a0[l] * b0[l];
      acc[1][l] += a0[l] * b1[l];
      acc[2][l] += a0[l] * b2[l];
      acc[3][l] += a0[l] * b3[l];
      acc[4][l] += a1[l] * b0[l];
      acc[5][l] += a1[l] * b1[l];
      acc[6][l] += a1[l] * b2[l];
      acc[7][l] += a1[l] * b3[l];
      acc[8][l] += a2[l] * b0[l];
      acc[9][l] += a2[l] * b1[l];
      acc[10][l] += a2[l] * b2[l];
      acc[11][l] += a2[l] * b3[l];
      acc[12][l] += a3[l] * b0[l];
      acc[13][l] += a3[l] * b1[l];
      acc[14][l] += a3[l] * b2[l];
      acc[15][l] += a3[l] * b3[l];
    }
  }
  for (int i = 0; i < kChannelBlock; ++i) {
    for (int j = 0; j < kChannelBlock; ++j) {
      T total = 0;
      for (std::size_t q = p; q < n; ++q) total += a[i][q] * b[j][q];
      for (int l = 0; l < kLanes; ++l) total += acc[i * kChannelBlock + j][l];
      out[i][j] += total;
    }
  }
}

// out[i * k + j] += sum_p a[i][p] * b[j][p] with rows of length `pixels`.
template <typename T>
void accumulate_abt(int m, int k, std::size_t pixels, const T* a, const T* b, T* out) {
  const int m_blocks = (m + kChannelBlock - 1) / kChannelBlock;
  const int k_blocks = (k + kChannelBlock - 1) / kChannelBlock;
#pragma omp parallel for collapse(2) schedule(static)
  for (int bi = 0; bi < m_blocks; ++bi) {
    for (int bj = 0; bj < k_blocks; ++bj) {
      const int i0 = bi * kChannelBlock;
      const int j0 = bj * kChannelBlock;
      const int ni = std::min(kChannelBlock, m - i0);
      const int nj = std::min(kChannelBlock, k - j0);
      T total[kChannelBlock][kChannelBlock] = {};
      if (ni == kChannelBlock && nj == kChannelBlock) {
        const T* rows_a[kChannelBlock];
        const T* rows_b[kChannelBlock];
        for (int r = 0; r < kChannelBlock; ++r) {
          rows_a[r] = a + static_cast<std::size_t>(i0 + r) * pixels;
          rows_b[r] = b + static_cast<std::size_t>(j0 + r) * pixels;
        }
        lane_dot_tile(rows_a, rows_b, pixels, total);
      } else {
        for (int i = 0; i < ni; ++i) {
          for (int j = 0; j < nj; ++j) {
            total[i][j] = lane_dot(a + static_cast<std::size_t>(i0 + i) * pixels,
                                   b + static_cast<std::size_t>(j0 + j) * pixels, pixels);
          }
        }
      }
      for (int i = 0; i < ni; ++i) {
        for (int j = 0; j < nj; ++j) {
          out[static_cast<std::size_t>(i0 + i) * k + j0 + j] += total[i][j];
        }
      }
    }
  }
}

// y[co] = bias[co] + sum_ci W[co][ci] * x[ci], over planes of length `pixels`.
// Tiles of kChannelBlock outputs x kPixelBlock pixels stay resident in L1.
template <typename T>
void pointwise_gemm(int c_out, int c_in, std::size_t pixels, const T* weight, std::size_t w_co_stride,
                    std::size_t w_ci_stride, const T* bias, const T* x, T* y, bool accumulate) {
  const int blocks = (c_out + kChannelBlock - 1) / kChannelBlock;
  const auto tiles = static_cast<long long>((pixels + kPixelBlock - 1) / kPixelBlock);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < blocks; ++b) {
    for (long long tile = 0; tile < tiles; ++tile) {
      const int co0 = b * kChannelBlock;
      const int nco = std::min(kChannelBlock, c_out - co0);
      const std::size_t p0 = static_cast<std::size_t>(tile) * kPixelBlock;
      const std::size_t np = std::min<std::size_t>(kPixelBlock, pixels - p0);
      alignas(64) T acc[kChannelBlock][kPixelBlock];
      for (int k = 0; k < nco; ++k) {
        T* a = acc[k];
        const T* yp = y + static_cast<std::size_t>(co0 + k) * pixels + p0;
        const T init = bias ? bias[co0 + k] : T(0);
        if (accumulate) {
          for (std::size_t p = 0; p < np; ++p) a[p] = yp[p] + init;
        } else {
          for (std::size_t p = 0; p < np; ++p) a[p] = init;
        }
      }
      for (int ci = 0; ci < c_in; ++ci) {
        const T* xp = x + static_cast<std::size_t>(ci) * pixels + p0;
        if (nco == kChannelBlock && np == kPixelBlock) {
          const T w0 = weight[(co0 + 0) * w_co_stride + ci * w_ci_stride];
          const T w1 = weight[(co0 + 1) * w_co_stride + ci * w_ci_stride];
          const T w2 = weight[(co0 + 2) * w_co_stride + ci * w_ci_stride];
          const T w3 = weight[(co0 + 3) * w_co_stride + ci * w_ci_stride];
          for (int p = 0; p < kPixelBlock; ++p) {
            const T xv = xp[p];
            acc[0][p] += w0 * xv;
            acc[1][p] += w1 * xv;
            acc[2][p] += w2 * xv;
            acc[3][p] += w3 * xv;
          }
        } else {
          for (int k = 0; k < nco; ++k) {
            const T wv = weight[(co0 + k) * w_co_stride + ci * w_ci_stride];
            T* a = acc[k];
            for (std::size_t p = 0; p < np; ++p) a[p] += wv * xp[p];
          }
        }
      }
      for (int k = 0; k < nco; ++k) {
        T* yp = y + static_cast<std::size_t>(co0 + k) * pixels + p0;
        std::copy(acc[k], acc[k] + np, yp);
      }
    }
  }
}

// out_plane[oy][ox] += w * in_plane[oy*s - pad + ky][ox*s - pad + kx] over valid sites.
template <typename T>
inline void correlate_tap(const ConvGeometry& g, int ky, int kx, T wv, const T* in_plane,
                          T* out_plane) {
  const Range ry = valid_outputs(ky, g.pad, g.stride, g.h_in, g.h_out);
  const Range rx = valid_outputs(kx, g.pad, g.stride, g.w_in, g.w_out);
  for (int oy = ry.lo; oy < ry.hi; ++oy) {
    const T* in_row = in_plane + static_cast<std::size_t>(oy * g.stride - g.pad + ky) * g.w_in;
    T* out_row = out_plane + static_cast<std::size_t>(oy) * g.w_out;
    if (g.stride == 1) {
      const T* src = in_row + (kx - g.pad);
      for (int ox = rx.lo; ox < rx.hi; ++ox) out_row[ox] += wv * src[ox];
    } else {
      for (int ox = rx.lo; ox < rx.hi; ++ox) {
        out_row[ox] += wv * in_row[ox * g.stride - g.pad + kx];
      }
    }
  }
}

// in_plane[...] += w * out_plane[oy][ox]; the adjoint of correlate_tap.
template <typename T>
inline void scatter_tap(const ConvGeometry& g, int ky, int kx, T wv, const T* out_plane,
                        T* in_plane) {
  const Range ry = valid_outputs(ky, g.pad, g.stride, g.h_in, g.h_out);
  const Range rx = valid_outputs(kx, g.pad, g.stride, g.w_in, g.w_out);
  for (int oy = ry.lo; oy < ry.hi; ++oy) {
    T* in_row = in_plane + static_cast<std::size_t>(oy * g.stride - g.pad + ky) * g.w_in;
    const T* out_row = out_plane + static_cast<std::size_t>(oy) * g.w_out;
    if (g.stride == 1) {
      T* dst = in_row + (kx - g.pad);
      for (int ox = rx.lo; ox < rx.hi; ++ox) dst[ox] += wv * out_row[ox];
    } else {
      for (int ox = rx.lo; ox < rx.hi; ++ox) {
        in_row[ox * g.stride - g.pad + kx] += wv * out_row[ox];
      }
    }
  }
}

template <typename T>
inline T dot_tap(const ConvGeometry& g, int ky, int kx, const T* in_plane, const T* out_plane) {
  const Range ry = valid_outputs(ky, g.pad, g.stride, g.h_in, g.h_out);
  const Range rx = valid_outputs(kx, g.pad, g.stride, g.w_in, g.w_out);
  T total = 0;
  for (int oy = ry.lo; oy < ry.hi; ++oy) {
    const T* in_row = in_plane + static_cast<std::size_t>(oy * g.stride - g.pad + ky) * g.w_in;
    const T* out_row = out_plane + static_cast<std::size_t>(oy) * g.w_out;
    T row = 0;
    if (g.stride == 1) {
      const T* src = in_row + (kx - g.pad);
      row = lane_dot(out_row + rx.lo, src + rx.lo, static_cast<std::size_t>(rx.hi - rx.lo));
    } else {
      for (int ox = rx.lo; ox < rx.hi; ++ox) row += out_row[ox] * in_row[ox * g.stride - g.pad + kx];
    }
    total += row;
  }
  return total;
}

// col[(ci * k + ky) * k + kx][oy * w_out + ox] = x[ci][oy*s - pad + ky][ox*s - pad + kx], zero outside.
template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
  const int k = g.kernel;
  const int rows = g.c_in * k * k;
  const std::size_t in_plane = static_cast<std::size_t>(g.h_in) * g.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int ci = r / (k * k);
    const int ky = (r / k) % k;
    const int kx = r % k;
    const T* xp = x + static_cast<std::size_t>(ci) * in_plane;
    T* dst = col + static_cast<std::size_t>(r) * out_plane;
    std::fill(dst, dst + out_plane, T(0));
    const Range ry = valid_outputs(ky, g.pad, g.stride, g.h_in, g.h_out);
    const Range rx = valid_outputs(kx, g.pad, g.stride, g.w_in, g.w_out);
    for (int oy = ry.lo; oy < ry.hi; ++oy) {
      const T* in_row = xp + static_cast<std::size_t>(oy * g.stride - g.pad + ky) * g.w_in;
      T* out_row = dst + static_cast<std::size_t>(oy) * g.w_out;
      for (int ox = rx.lo; ox < rx.hi; ++ox) out_row[ox] = in_row[ox * g.stride - g.pad + kx];
    }
  }
}

// Adjoint of im2col: gx[ci][...] += col[...]. Parallel over input channels so
// every element of gx has a single writer.
template <typename T>
void col2im_add(const ConvGeometry& g, const T* col, T* gx) {
  const int k = g.kernel;
  const std::size_t in_plane = static_cast<std::size_t>(g.h_in) * g.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < g.c_in; ++ci) {
    T* dst = gx + static_cast<std::size_t>(ci) * in_plane;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + (static_cast<std::size_t>(ci) * k * k + ky * k + kx) * out_plane;
        const Range ry = valid_outputs(ky, g.pad, g.stride, g.h_in, g.h_out);
        const Range rx = valid_outputs(kx, g.pad, g.stride, g.w_in, g.w_out);
        for (int oy = ry.lo; oy < ry.hi; ++oy) {
          T* in_row = dst + static_cast<std::size_t>(oy * g.stride - g.pad + ky) * g.w_in;
          const T* out_row = src + static_cast<std::size_t>(oy) * g.w_out;
          for (int ox = rx.lo; ox < rx.hi; ++ox) in_row[ox * g.stride - g.pad + kx] += out_row[ox];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* weight, const T* bias, T* y) {
  if (is_pointwise(g)) {
    const std::size_t pixels = static_cast<std::size_t>(g.h_in) * g.w_in;
    for (int n = 0; n < g.batch; ++n) {
      pointwise_gemm(g.c_out, g.c_in, pixels, weight, static_cast<std::size_t>(g.c_in), 1, bias,
                     x + static_cast<std::size_t>(n) * g.c_in * pixels,
                     y + static_cast<std::size_t>(n) * g.c_out * pixels, false);
    }
    return;
  }
  if (g.groups == 1) {
    const int rows = g.c_in * g.kernel * g.kernel;
    const std::size_t in_plane = static_cast<std::size_t>(g.h_in) * g.w_in;
    const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
    std::vector<T> col(static_cast<std::size_t>(rows) * out_plane);
    for (int n = 0; n < g.batch; ++n) {
      im2col(g, x + static_cast<std::size_t>(n) * g.c_in * in_plane, col.data());
      pointwise_gemm(g.c_out, rows, out_plane, weight, static_cast<std::size_t>(rows), 1, bias,
                     col.data(), y + static_cast<std::size_t>(n) * g.c_out * out_plane, false);
    }
    return;
  }
  const int cin_g = g.c_in_per_group();
  const int cout_g = g.c_out_per_group();
  const std::size_t in_plane = static_cast<std::size_t>(g.h_in) * g.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
  const int kk = g.kernel * g.kernel;
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < g.batch; ++n) {
    for (int co = 0; co < g.c_out; ++co) {
      T* yp = y + (static_cast<std::size_t>(n) * g.c_out + co) * out_plane;
      std::fill(yp, yp + out_plane, bias ? bias[co] : T(0));
      const int group = co / cout_g;
      for (int cl = 0; cl < cin_g; ++cl) {
        const int ci = group * cin_g + cl;
        const T* xp = x + (static_cast<std::size_t>(n) * g.c_in + ci) * in_plane;
        const T* wp = weight + (static_cast<std::size_t>(co) * cin_g + cl) * kk;
        for (int ky = 0; ky < g.kernel; ++ky) {
          for (int kx = 0; kx < g.kernel; ++kx) {
            correlate_tap(g, ky, kx, wp[ky * g.kernel + kx], xp, yp);
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(const ConvGeometry& g, const T* weight, const T* grad_y, T* grad_x) {
  if (is_pointwise(g)) {
    // grad_x[ci] += sum_co W[co][ci] * grad_y[co]: the same GEMM with W transposed.
    const std::size_t pixels = static_cast<std::size_t>(g.h_in) * g.w_in;
    for (int n = 0; n < g.batch; ++n) {
      pointwise_gemm(g.c_in, g.c_out, pixels, weight, 1, static_cast<std::size_t>(g.c_in),
                     static_cast<const T*>(nullptr),
                     grad_y + static_cast<std::size_t>(n) * g.c_out * pixels,
                     grad_x + static_cast<std::size_t>(n) * g.c_in * pixels, true);
    }
    return;
  }
  if (g.groups == 1) {
    const int rows = g.c_in * g.kernel * g.kernel;
    const std::size_t in_plane = static_cast<std::size_t>(g.h_in) * g.w_in;
    const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
    std::vector<T> col(static_cast<std::size_t>(rows) * out_plane);
    for (int n = 0; n < g.batch; ++n) {
      pointwise_gemm(rows, g.c_out, out_plane, weight, 1, static_cast<std::size_t>(rows),
                     static_cast<const T*>(nullptr),
                     grad_y + static_cast<std::size_t>(n) * g.c_out * out_plane, col.data(), false);
      col2im_add(g, col.data(), grad_x + static_cast<std::size_t>(n) * g.c_in * in_plane);
    }
    return;
  }
  const int cin_g = g.c_in_per_group();
  const int cout_g = g.c_out_per_group();
  const std::size_t in_plane = static_cast<std::size_t>(g.h_in) * g.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
  const int kk = g.kernel * g.kernel;
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < g.batch; ++n) {
    for (int ci = 0; ci < g.c_in; ++ci) {
      T* gx = grad_x + (static_cast<std::size_t>(n) * g.c_in + ci) * in_plane;
      const int group = ci / cin_g;
      const int cl = ci - group * cin_g;
      for (int col = 0; col < cout_g; ++col) {
        const int co = group * cout_g + col;
        const T* gy = grad_y + (static_cast<std::size_t>(n) * g.c_out + co) * out_plane;
        const T* wp = weight + (static_cast<std::size_t>(co) * cin_g + cl) * kk;
        for (int ky = 0; ky < g.kernel; ++ky) {
          for (int kx = 0; kx < g.kernel; ++kx) {
            scatter_tap(g, ky, kx, wp[ky * g.kernel + kx], gy, gx);
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_weight(const ConvGeometry& g, const T* x, const T* grad_y, T* grad_w) {
  const int cin_g = g.c_in_per_group();
  const int cout_g = g.c_out_per_group();
  const std::size_t in_plane = static_cast<std::size_t>(g.h_in) * g.w_in;
  const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
  const int kk = g.kernel * g.kernel;
  if (is_pointwise(g)) {
    for (int n = 0; n < g.batch; ++n) {
      accumulate_abt(g.c_out, g.c_in, in_plane,
                     grad_y + static_cast<std::size_t>(n) * g.c_out * out_plane,
                     x + static_cast<std::size_t>(n) * g.c_in * in_plane, grad_w);
    }
    return;
  }
  if (g.groups == 1) {
    const int rows = g.c_in * kk;
    std::vector<T> col(static_cast<std::size_t>(rows) * out_plane);
    for (int n = 0; n < g.batch; ++n) {
      im2col(g, x + static_cast<std::size_t>(n) * g.c_in * in_plane, col.data());
      accumulate_abt(g.c_out, rows, out_plane,
                     grad_y + static_cast<std::size_t>(n) * g.c_out * out_plane, col.data(), grad_w);
    }
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int co = 0; co < g.c_out; ++co) {
    for (int cl = 0; cl < cin_g; ++cl) {
      const int group = co / cout_g;
      const int ci = group * cin_g + cl;
      T* gw = grad_w + (static_cast<std::size_t>(co) * cin_g + cl) * kk;
      for (int ky = 0; ky < g.kernel; ++ky) {
        for (int kx = 0; kx < g.kernel; ++kx) {
          T total = 0;
          for (int n = 0; n < g.batch; ++n) {
            const T* gy = grad_y + (static_cast<std::size_t>(n) * g.c_out + co) * out_plane;
            const T* xp = x + (static_cast<std::size_t>(n) * g.c_in + ci) * in_plane;
            total += dot_tap(g, ky, kx, xp, gy);
          }
          gw[ky * g.kernel + kx] += total;
        }
      }
    }
  }
}

}  // namespace parallel

template <typename T>
void conv2d_backward_bias(const ConvGeometry& g, const T* grad_y, T* grad_bias) {
  const std::size_t out_plane = static_cast<std::size_t>(g.h_out) * g.w_out;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < g.c_out; ++co) {
    T total = 0;
    for (int n = 0; n < g.batch; ++n) {
      const T* gy = grad_y + (static_cast<std::size_t>(n) * g.c_out + co) * out_plane;
      T acc = 0;
      for (std::size_t p = 0; p < out_plane; ++p) acc += gy[p];
      total += acc;
    }
    grad_bias[co] += total;
  }
}

#define SAFFN_INSTANTIATE_KERNELS(T)                                                            \
  template void reference::conv2d_forward<T>(const ConvGeometry&, const T*, const T*, const T*, \
                                             T*);                                               \
  template void reference::conv2d_backward_input<T>(const ConvGeometry&, const T*, const T*,    \
                                                    T*);                                        \
  template void reference::conv2d_backward_weight<T>(const ConvGeometry&, const T*, const T*,   \
                                                     T*);                                       \
  template void parallel::conv2d_forward<T>(const ConvGeometry&, const T*, const T*, const T*,  \
                                            T*);                                                \
  template void parallel::conv2d_backward_input<T>(const ConvGeometry&, const T*, const T*, T*); \
  template void parallel::conv2d_backward_weight<T>(const ConvGeometry&, const T*, const T*,    \
                                                    T*);                                        \
  template void conv2d_backward_bias<T>(const ConvGeometry&, const T*, T*);

SAFFN_INSTANTIATE_KERNELS(float)
SAFFN_INSTANTIATE_KERNELS(double)

#undef SAFFN_INSTANTIATE_KERNELS

}  // namespace saffn::kernels
