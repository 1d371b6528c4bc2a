#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "saffn/autodiff.hpp"

namespace saffn {

/// In-place complex DFT of a fixed length. Power-of-two lengths use an
/// iterative radix-2 transform; other lengths go through Bluestein's chirp-z
/// algorithm on a power-of-two inner plan. Plans are immutable after
/// construction and may be shared between threads.
template <typename T>
class FftPlan {
 public:
  explicit FftPlan(int n);

  [[nodiscard]] int size() const { return n_; }
  /// X[k] = sum_j x[j] exp(-2 pi i jk / n), unnormalised.
  void forward(std::complex<T>* data) const;
  /// x[j] = sum_k X[k] exp(+2 pi i jk / n), unnormalised.
  void inverse(std::complex<T>* data) const;

 private:
  void radix2(std::complex<T>* data) const;
  void bluestein(std::complex<T>* data) const;

  int n_ = 0;
  bool pow2_ = true;
  std::vector<std::complex<T>> twiddles_;
  std::vector<int> bitrev_;
  // Bluestein state
  int m_ = 0;
  std::vector<std::complex<T>> chirp_;      // exp(-i pi k^2 / n)
  std::vector<std::complex<T>> chirp_fft_;  // FFT of the conjugate chirp, circularly laid out
  std::unique_ptr<FftPlan> inner_;
};

/// Half-plane spectrum of a real (n, c, h, w) tensor: bins (k, l) with
/// 0 <= l < w/2 + 1. The remaining bins follow from Hermitian symmetry.
template <typename T>
struct Spectrum {
  Tensor<T> real;  // (n, c, h, w/2 + 1)
  Tensor<T> imag;
  int original_w = 0;

  [[nodiscard]] const Dims& dims() const { return real.dims(); }
};

/// Unnormalised 2-D DFT of every (n, c) plane; DC at bin (0, 0).
template <typename T>
Spectrum<T> fft2d_real(const Tensor<T>& x);

/// Inverse of fft2d_real, scaled by 1/(h w). Bins that the Hermitian
/// extension cannot represent (imaginary parts of self-conjugate columns)
/// are discarded.
template <typename T>
Tensor<T> ifft2d_real(const Spectrum<T>& s);

/// Real and imaginary parts stacked as 2c channels: [re_0..re_{c-1}, im_0..im_{c-1}].
template <typename T>
Tensor<T> stack_spectrum(const Spectrum<T>& s);
template <typename T>
Spectrum<T> unstack_spectrum(const Tensor<T>& stacked, int original_w);

/// 1x1 convolution over the stacked (2c-channel) spectrum; weight (2c, 2c, 1, 1), bias (1, 2c, 1, 1).
template <typename T>
Spectrum<T> freq_conv1x1(const Spectrum<T>& s, const Tensor<T>& weight, const Tensor<T>& bias);

/// Differentiable fft2d_real producing the stacked layout (n, 2c, h, w/2 + 1).
template <typename T>
Var<T> rfft2_stacked(const Var<T>& x);

/// Differentiable ifft2d_real from the stacked layout back to (n, c, h, original_w).
template <typename T>
Var<T> irfft2_stacked(const Var<T>& stacked, int original_w);

}  // namespace saffn
