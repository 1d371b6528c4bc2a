#pragma once

// Raw NCHW convolution kernels.
//
// Two implementations share one contract: `reference` is a straightforward
// nested-loop version kept as the oracle for tests and benchmarks, `parallel`
// is the OpenMP version used by the autodiff ops. Every output element is
// written by exactly one thread with a fixed summation order, so the parallel
// kernels are bit-reproducible regardless of thread count.

#include <cstddef>

#include "saffn/tensor.hpp"

namespace saffn::kernels {

/// Validated geometry of one cross-correlation with zero padding.
struct ConvGeometry {
  int batch = 0;
  int c_in = 0;
  int h_in = 0;
  int w_in = 0;
  int c_out = 0;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  int groups = 1;
  int h_out = 0;
  int w_out = 0;

  [[nodiscard]] int c_in_per_group() const { return c_in / groups; }
  [[nodiscard]] int c_out_per_group() const { return c_out / groups; }
  [[nodiscard]] Dims input_dims() const { return {batch, c_in, h_in, w_in}; }
  [[nodiscard]] Dims weight_dims() const { return {c_out, c_in / groups, kernel, kernel}; }
  [[nodiscard]] Dims output_dims() const { return {batch, c_out, h_out, w_out}; }

  /// Throws ShapeError / ConfigError when the combination is not valid.
  static ConvGeometry make(const Dims& x, const Dims& weight, int stride, int pad, int groups);
};

namespace reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* weight, const T* bias, T* y);
/// Accumulates dL/dx into grad_x.
template <typename T>
void conv2d_backward_input(const ConvGeometry& g, const T* weight, const T* grad_y, T* grad_x);
/// Accumulates dL/dW into grad_w.
template <typename T>
void conv2d_backward_weight(const ConvGeometry& g, const T* x, const T* grad_y, T* grad_w);

}  // namespace reference

namespace parallel {

template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* x, const T* weight, const T* bias, T* y);
template <typename T>
void conv2d_backward_input(const ConvGeometry& g, const T* weight, const T* grad_y, T* grad_x);
template <typename T>
void conv2d_backward_weight(const ConvGeometry& g, const T* x, const T* grad_y, T* grad_w);

}  // namespace parallel

/// Accumulates the per-output-channel sum of grad_y into grad_bias.
template <typename T>
void conv2d_backward_bias(const ConvGeometry& g, const T* grad_y, T* grad_bias);

}  // namespace saffn::kernels
