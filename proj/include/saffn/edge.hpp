#pragma once

#include <array>
#include <string>

#include "saffn/autodiff.hpp"

namespace saffn {

/// 3x3 integer stencil, row-major.
using Stencil = std::array<int, 9>;

/// Sobel-style stencils: vertical, horizontal and the two diagonals. Every
/// entry set sums to zero. The 8-kind bank appends their negations.
const Stencil& base_stencil(int index);

/// Trainable edge kernels. Output channel c uses stencil (c mod kinds) scaled
/// by gamma[c]; the stencil entries themselves are fixed.
template <typename T>
struct EdgeKernelBank {
  int kinds = 4;
  int out_channels = 0;
  Parameter<T> gamma;  // (1, out_channels, 1, 1)

  [[nodiscard]] const Stencil& stencil(int channel) const;
  /// gamma[c] * stencil(c) as a (out_channels, per_channel_inputs, 3, 3) weight,
  /// replicated across the input channels.
  [[nodiscard]] Tensor<T> realized(int per_channel_inputs) const;
};

/// kinds must be 2, 4 or 8.
template <typename T>
EdgeKernelBank<T> make_kernel_bank(int kinds, int out_channels, T gamma_init,
                                   const std::string& name = "edge");

/// Standard "same" convolution (pad 1, stride 1, no bias) where every output
/// channel sums the cross-correlation of all input channels with its kernel.
template <typename T>
Var<T> edge_conv(const Var<T>& x, const EdgeKernelBank<T>& bank);

/// Depthwise variant: channel c is filtered by kernel c only. The bank must
/// have exactly as many channels as the input.
template <typename T>
Var<T> depthwise_edge_conv(const Var<T>& x, const EdgeKernelBank<T>& bank);

}  // namespace saffn
