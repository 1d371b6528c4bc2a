#include "saffn/fourier.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "saffn/kernels.hpp"

namespace saffn {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int half_width(int w) { return w / 2 + 1; }

// Weight of half-plane column l in the Hermitian reconstruction of a width-w row.
int column_multiplicity(int l, int w) {
  if (l == 0) return 1;
  if (w % 2 == 0 && l == w / 2) return 1;
  return 2;
}

// Plain complex product; std::complex's operator* takes a slow NaN-recovery
// path unless -ffast-math is on.
template <typename T>
inline std::complex<T> mul(const std::complex<T>& a, const std::complex<T>& b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

template <typename T>
std::complex<T> unit(double angle) {
  return {static_cast<T>(std::cos(angle)), static_cast<T>(std::sin(angle))};
}

}  // namespace

template <typename T>
FftPlan<T>::FftPlan(int n) : n_(n), pow2_(is_pow2(n)) {
  if (n < 1) throw ShapeError("FftPlan: length must be >= 1, got " + std::to_string(n));
  if (pow2_) {
    twiddles_.resize(static_cast<std::size_t>(std::max(1, n / 2)));
    for (int j = 0; j < n / 2; ++j) {
      twiddles_[static_cast<std::size_t>(j)] = unit<T>(-2.0 * std::numbers::pi * j / n);
    }
    bitrev_.resize(static_cast<std::size_t>(n));
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    for (int i = 0; i < n; ++i) {
      int r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1) << (bits - 1 - b);
      bitrev_[static_cast<std::size_t>(i)] = r;
    }
    return;
  }
  m_ = 1;
  while (m_ < 2 * n - 1) m_ <<= 1;
  inner_ = std::make_unique<FftPlan>(m_);
  chirp_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small and exact.
    const long long k2 = (static_cast<long long>(k) * k) % (2LL * n);
    chirp_[static_cast<std::size_t>(k)] = unit<T>(-std::numbers::pi * static_cast<double>(k2) / n);
  }
  chirp_fft_.assign(static_cast<std::size_t>(m_), std::complex<T>(0, 0));
  chirp_fft_[0] = std::conj(chirp_[0]);
  for (int k = 1; k < n; ++k) {
    chirp_fft_[static_cast<std::size_t>(k)] = std::conj(chirp_[static_cast<std::size_t>(k)]);
    chirp_fft_[static_cast<std::size_t>(m_ - k)] = std::conj(chirp_[static_cast<std::size_t>(k)]);
  }
  inner_->forward(chirp_fft_.data());
}

template <typename T>
void FftPlan<T>::radix2(std::complex<T>* data) const {
  const int n = n_;
  for (int i = 0; i < n; ++i) {
    const int r = bitrev_[static_cast<std::size_t>(i)];
    if (i < r) std::swap(data[i], data[r]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len / 2;
    const int stride = n / len;
    for (int start = 0; start < n; start += len) {
      for (int j = 0; j < half; ++j) {
        const std::complex<T> w = twiddles_[static_cast<std::size_t>(j * stride)];
        const std::complex<T> u = data[start + j];
        const std::complex<T> v = mul(data[start + j + half], w);
        data[start + j] = u + v;
        data[start + j + half] = u - v;
      }
    }
  }
}

template <typename T>
void FftPlan<T>::bluestein(std::complex<T>* data) const {
  thread_local std::vector<std::complex<T>> scratch;
  scratch.assign(static_cast<std::size_t>(m_), std::complex<T>(0, 0));
  for (int k = 0; k < n_; ++k) scratch[static_cast<std::size_t>(k)] = mul(data[k], chirp_[static_cast<std::size_t>(k)]);
  inner_->forward(scratch.data());
  for (int k = 0; k < m_; ++k) scratch[static_cast<std::size_t>(k)] = mul(scratch[static_cast<std::size_t>(k)], chirp_fft_[static_cast<std::size_t>(k)]);
  inner_->inverse(scratch.data());
  const T inv_m = T(1) / static_cast<T>(m_);
  for (int k = 0; k < n_; ++k) {
    data[k] = mul(scratch[static_cast<std::size_t>(k)], chirp_[static_cast<std::size_t>(k)]) * inv_m;
  }
}

template <typename T>
void FftPlan<T>::forward(std::complex<T>* data) const {
  if (n_ == 1) return;
  if (pow2_) {
    radix2(data);
  } else {
    bluestein(data);
  }
}

template <typename T>
void FftPlan<T>::inverse(std::complex<T>* data) const {
  for (int i = 0; i < n_; ++i) data[i] = std::conj(data[i]);
  forward(data);
  for (int i = 0; i < n_; ++i) data[i] = std::conj(data[i]);
}

namespace {

// Real plane (h x w) -> half-plane (h x wh), split into re / im planes.
template <typename T>
void forward_plane(const FftPlan<T>& rows, const FftPlan<T>& cols, const T* x, int h, int w,
                   T* re, T* im) {
  const int wh = half_width(w);
  std::vector<std::complex<T>> work(static_cast<std::size_t>(h) * wh);
  std::vector<std::complex<T>> row(static_cast<std::size_t>(w));
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) row[static_cast<std::size_t>(j)] = {x[static_cast<std::size_t>(i) * w + j], T(0)};
    rows.forward(row.data());
    std::copy(row.begin(), row.begin() + wh, work.begin() + static_cast<std::ptrdiff_t>(i) * wh);
  }
  std::vector<std::complex<T>> col(static_cast<std::size_t>(h));
  for (int l = 0; l < wh; ++l) {
    for (int k = 0; k < h; ++k) col[static_cast<std::size_t>(k)] = work[static_cast<std::size_t>(k) * wh + l];
    cols.forward(col.data());
    for (int k = 0; k < h; ++k) {
      re[static_cast<std::size_t>(k) * wh + l] = col[static_cast<std::size_t>(k)].real();
      im[static_cast<std::size_t>(k) * wh + l] = col[static_cast<std::size_t>(k)].imag();
    }
  }
  // Self-conjugate bins of a real input are real; drop the rounding residue.
  for (int k : {0, h / 2}) {
    if (k != 0 && h % 2 != 0) continue;
    im[static_cast<std::size_t>(k) * wh] = T(0);
    if (w % 2 == 0 && w > 1) im[static_cast<std::size_t>(k) * wh + w / 2] = T(0);
  }
}

// Half-plane (h x wh) -> real plane (h x w), scaled by `scale`.
template <typename T>
void inverse_plane(const FftPlan<T>& rows, const FftPlan<T>& cols, const T* re, const T* im,
                   int h, int w, T scale, T* out) {
  const int wh = half_width(w);
  std::vector<std::complex<T>> work(static_cast<std::size_t>(h) * wh);
  std::vector<std::complex<T>> col(static_cast<std::size_t>(h));
  for (int l = 0; l < wh; ++l) {
    for (int k = 0; k < h; ++k) {
      const std::size_t idx = static_cast<std::size_t>(k) * wh + l;
      col[static_cast<std::size_t>(k)] = {re[idx], im[idx]};
    }
    // Imaginary parts of self-conjugate bins cannot reach a real output.
    if (l == 0 || (w % 2 == 0 && l == w / 2)) {
      col[0].imag(T(0));
      if (h % 2 == 0) col[static_cast<std::size_t>(h / 2)].imag(T(0));
    }
    cols.inverse(col.data());
    for (int k = 0; k < h; ++k) work[static_cast<std::size_t>(k) * wh + l] = col[static_cast<std::size_t>(k)];
  }
  std::vector<std::complex<T>> row(static_cast<std::size_t>(w));
  for (int i = 0; i < h; ++i) {
    const std::complex<T>* src = work.data() + static_cast<std::size_t>(i) * wh;
    for (int j = 0; j < wh && j < w; ++j) row[static_cast<std::size_t>(j)] = src[j];
    for (int j = wh; j < w; ++j) row[static_cast<std::size_t>(j)] = std::conj(src[w - j]);
    rows.inverse(row.data());
    for (int j = 0; j < w; ++j) out[static_cast<std::size_t>(i) * w + j] = row[static_cast<std::size_t>(j)].real() * scale;
  }
}

template <typename T>
Spectrum<T> forward_all(const Tensor<T>& x) {
  const Dims d = x.dims();
  const int wh = half_width(d.w);
  const Dims sd{d.n, d.c, d.h, wh};
  Spectrum<T> s{Tensor<T>(sd), Tensor<T>(sd), d.w};
  const FftPlan<T> rows(d.w);
  const FftPlan<T> cols(d.h);
  const int planes = d.n * d.c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const int n = p / d.c;
    const int c = p % d.c;
    forward_plane(rows, cols, x.plane(n, c), d.h, d.w, s.real.plane(n, c), s.imag.plane(n, c));
  }
  return s;
}

template <typename T>
Tensor<T> inverse_all(const Tensor<T>& re, const Tensor<T>& im, int w, T scale) {
  const Dims sd = re.dims();
  require_same_dims(sd, im.dims(), "ifft2d_real real/imag");
  if (w < 1 || half_width(w) != sd.w) {
    throw ShapeError("ifft2d_real: half-plane width " + std::to_string(sd.w) +
                     " inconsistent with original width " + std::to_string(w));
  }
  Tensor<T> out(Dims{sd.n, sd.c, sd.h, w});
  const FftPlan<T> rows(w);
  const FftPlan<T> cols(sd.h);
  const int planes = sd.n * sd.c;
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const int n = p / sd.c;
    const int c = p % sd.c;
    inverse_plane(rows, cols, re.plane(n, c), im.plane(n, c), sd.h, w, scale, out.plane(n, c));
  }
  return out;
}

}  // namespace

template <typename T>
Spectrum<T> fft2d_real(const Tensor<T>& x) {
  if (x.empty()) throw ShapeError("fft2d_real: empty tensor");
  return forward_all(x);
}

template <typename T>
Tensor<T> ifft2d_real(const Spectrum<T>& s) {
  const T scale = T(1) / static_cast<T>(static_cast<double>(s.real.h()) * s.original_w);
  return inverse_all(s.real, s.imag, s.original_w, scale);
}

template <typename T>
Tensor<T> stack_spectrum(const Spectrum<T>& s) {
  const Dims d = s.dims();
  require_same_dims(d, s.imag.dims(), "stack_spectrum");
  Tensor<T> out(Dims{d.n, 2 * d.c, d.h, d.w});
  const std::size_t block = static_cast<std::size_t>(d.c) * d.plane();
  for (int n = 0; n < d.n; ++n) {
    std::copy(s.real.plane(n, 0), s.real.plane(n, 0) + block, out.plane(n, 0));
    std::copy(s.imag.plane(n, 0), s.imag.plane(n, 0) + block, out.plane(n, d.c));
  }
  return out;
}

template <typename T>
Spectrum<T> unstack_spectrum(const Tensor<T>& stacked, int original_w) {
  const Dims d = stacked.dims();
  if (d.c % 2 != 0) throw ShapeError("unstack_spectrum: odd channel count in " + d.str());
  if (original_w < 1 || half_width(original_w) != d.w) {
    throw ShapeError("unstack_spectrum: width " + std::to_string(d.w) +
                     " inconsistent with original width " + std::to_string(original_w));
  }
  const int c = d.c / 2;
  const Dims sd{d.n, c, d.h, d.w};
  Spectrum<T> s{Tensor<T>(sd), Tensor<T>(sd), original_w};
  const std::size_t block = static_cast<std::size_t>(c) * d.plane();
  for (int n = 0; n < d.n; ++n) {
    std::copy(stacked.plane(n, 0), stacked.plane(n, 0) + block, s.real.plane(n, 0));
    std::copy(stacked.plane(n, c), stacked.plane(n, c) + block, s.imag.plane(n, 0));
  }
  return s;
}

template <typename T>
Spectrum<T> freq_conv1x1(const Spectrum<T>& s, const Tensor<T>& weight, const Tensor<T>& bias) {
  const int c2 = 2 * s.dims().c;
  if (weight.dims() != Dims{c2, c2, 1, 1}) {
    throw ShapeError("freq_conv1x1: weight dims " + weight.dims().str() + " expected (" +
                     std::to_string(c2) + "," + std::to_string(c2) + ",1,1)");
  }
  if (!bias.empty() && bias.dims() != Dims{1, c2, 1, 1}) {
    throw ShapeError("freq_conv1x1: bias dims " + bias.dims().str());
  }
  const Tensor<T> stacked = stack_spectrum(s);
  const auto g = kernels::ConvGeometry::make(stacked.dims(), weight.dims(), 1, 0, 1);
  Tensor<T> out(g.output_dims());
  kernels::parallel::conv2d_forward(g, stacked.data(), weight.data(),
                                    bias.empty() ? nullptr : bias.data(), out.data());
  return unstack_spectrum(out, s.original_w);
}

template <typename T>
Var<T> rfft2_stacked(const Var<T>& x) {
  const Dims d = x.dims();
  Tensor<T> stacked = stack_spectrum(forward_all(x.value()));
  return record<T>(std::move(stacked), {x}, [d](Node<T>& self) {
    Tensor<T>* gx = input_grad(self, 0);
    if (!gx) return;
    // Adjoint of the half-plane DFT: grad_x = h w * irfft2(G / multiplicity).
    Spectrum<T> g = unstack_spectrum(self.grad, d.w);
    const int wh = half_width(d.w);
    for (Tensor<T>* part : {&g.real, &g.imag}) {
      for (int n = 0; n < d.n; ++n) {
        for (int c = 0; c < d.c; ++c) {
          T* p = part->plane(n, c);
          for (int k = 0; k < d.h; ++k) {
            for (int l = 0; l < wh; ++l) {
              p[static_cast<std::size_t>(k) * wh + l] /= static_cast<T>(column_multiplicity(l, d.w));
            }
          }
        }
      }
    }
    Tensor<T> back = inverse_all(g.real, g.imag, d.w, T(1));
    T* dst = gx->data();
    const T* src = back.data();
    for (std::size_t i = 0; i < back.size(); ++i) dst[i] += src[i];
  });
}

template <typename T>
Var<T> irfft2_stacked(const Var<T>& stacked, int original_w) {
  const Dims sd = stacked.dims();
  Spectrum<T> s = unstack_spectrum(stacked.value(), original_w);
  const double hw = static_cast<double>(sd.h) * original_w;
  Tensor<T> out = inverse_all(s.real, s.imag, original_w, static_cast<T>(1.0 / hw));
  return record<T>(std::move(out), {stacked}, [sd, original_w, hw](Node<T>& self) {
    Tensor<T>* gz = input_grad(self, 0);
    if (!gz) return;
    // Adjoint of the Hermitian inverse: grad_Z = multiplicity / (h w) * rfft2(g).
    Tensor<T> g = stack_spectrum(forward_all(self.grad));
    for (int n = 0; n < sd.n; ++n) {
      for (int ch = 0; ch < sd.c; ++ch) {
        const T* src = g.plane(n, ch);
        T* dst = gz->plane(n, ch);
        for (int k = 0; k < sd.h; ++k) {
          for (int l = 0; l < sd.w; ++l) {
            const std::size_t idx = static_cast<std::size_t>(k) * sd.w + l;
            dst[idx] += src[idx] * static_cast<T>(column_multiplicity(l, original_w) / hw);
          }
        }
      }
    }
  });
}

#define SAFFN_INSTANTIATE_FOURIER(T)                                            \
  template class FftPlan<T>;                                                    \
  template Spectrum<T> fft2d_real(const Tensor<T>&);                            \
  template Tensor<T> ifft2d_real(const Spectrum<T>&);                           \
  template Tensor<T> stack_spectrum(const Spectrum<T>&);                        \
  template Spectrum<T> unstack_spectrum(const Tensor<T>&, int);                 \
  template Spectrum<T> freq_conv1x1(const Spectrum<T>&, const Tensor<T>&,       \
                                    const Tensor<T>&);                          \
  template Var<T> rfft2_stacked(const Var<T>&);                                 \
  template Var<T> irfft2_stacked(const Var<T>&, int);

SAFFN_INSTANTIATE_FOURIER(float)
SAFFN_INSTANTIATE_FOURIER(double)

#undef SAFFN_INSTANTIATE_FOURIER

}  // namespace saffn
