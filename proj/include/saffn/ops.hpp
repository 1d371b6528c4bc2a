#pragma once

// Differentiable tensor operations. Each works on both the recorded and the
// no-grad path (see autodiff.hpp).

#include <utility>

#include "saffn/autodiff.hpp"

namespace saffn {

/// Cross-correlation (no kernel flip) with zero padding:
/// y[n,co,i,j] = bias[co] + sum_{ci in group, x, y} x[n,ci,i*s-p+x, j*s-p+y] * w[co,ci',x,y].
/// `bias` may be an undefined Var; when present it has dims (1, c_out, 1, 1).
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad,
              int groups);

/// a + b. `b` may have the dims of `a` or be a per-channel vector (1, C, 1, 1).
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> add(const Var<T>& a, T scalar);
/// a - b, same broadcasting as add.
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
/// Pointwise product, same broadcasting as add.
template <typename T>
Var<T> hadamard(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> scale(const Var<T>& a, T factor);
template <typename T>
Var<T> relu(const Var<T>& a);

/// Channels [0, C/2) and [C/2, C).
template <typename T>
std::pair<Var<T>, Var<T>> channel_split2(const Var<T>& x);
template <typename T>
Var<T> concat_channels(const Var<T>& a, const Var<T>& b);

/// Per-site normalisation across channels (population variance, eps inside the
/// square root), then per-channel gain and shift of dims (1, C, 1, 1).
template <typename T>
Var<T> layer_norm_2d(const Var<T>& x, const Var<T>& gain, const Var<T>& shift, T eps = T(1e-6));

/// Sub-pixel rearrangement (n, c*r*r, h, w) -> (n, c, h*r, w*r).
template <typename T>
Var<T> pixel_shuffle_up(const Var<T>& x, int r);
/// Exact inverse of pixel_shuffle_up.
template <typename T>
Var<T> pixel_shuffle_down(const Var<T>& x, int r);

/// 2x2 mean pooling with stride 2; h and w must be even.
template <typename T>
Var<T> avg_pool2(const Var<T>& x);

/// Mirror padding on the bottom and right edges (edge sample not repeated).
/// Pads larger than the extent reflect repeatedly; a 1-pixel extent replicates.
template <typename T>
Var<T> reflect_pad(const Var<T>& x, int pad_bottom, int pad_right);
/// Top-left h x w window.
template <typename T>
Var<T> crop(const Var<T>& x, int h, int w);

/// Sum of all elements as a 1x1x1x1 scalar (accumulated in double).
template <typename T>
Var<T> sum(const Var<T>& x);
template <typename T>
Var<T> mean(const Var<T>& x);

/// Index of `i` after mirror extension of [0, n).
int reflect_index(int i, int n);

}  // namespace saffn
