#pragma once

#include <string>
#include <type_traits>
#include <vector>

#include "saffn/autodiff.hpp"
#include "saffn/edge.hpp"
#include "saffn/rng.hpp"

namespace saffn {

/// Frequency branch inside an AFFB.
enum class FreqVariant {
  none,        ///< no Fourier branch (ablation baseline)
  simplified,  ///< FFT -> one 1x1 conv -> inverse FFT, plus skip
  complex,     ///< FFT -> 1x1 conv -> ReLU -> 1x1 conv -> inverse FFT, plus skip
};

std::string to_string(FreqVariant v);
FreqVariant parse_freq_variant(const std::string& s);

/// Split channels in half and multiply the halves pointwise.
template <typename T>
Var<T> simple_gate(const Var<T>& x);

template <typename T>
struct Sffb {
  int channels = 0;
  FreqVariant variant = FreqVariant::simplified;
  Parameter<T> weight;   // (2c, 2c, 1, 1) over stacked real/imag channels
  Parameter<T> bias;     // (1, 2c, 1, 1)
  Parameter<T> weight2;  // complex variant only
  Parameter<T> bias2;
};

template <typename T>
Sffb<T> make_sffb(const std::string& name, int channels, FreqVariant variant, Rng& rng);

/// inverse_fft(conv(fft(x))) + x.
template <typename T>
Var<T> sffb_forward(const Var<T>& x, const Sffb<T>& spec);

/// Activation-free Fourier block:
///   a = SG(DConv(Conv1(LN1(x))))
///   b = SFFB(a)
///   f = Conv2(b) + alpha * x
///   g = SG(Conv3(LN2(f)))
///   out = Conv4(g) + beta * f
template <typename T>
struct Affb {
  int channels = 0;
  int expansion = 2;
  Parameter<T> ln1_gain, ln1_shift;
  Parameter<T> conv1_w, conv1_b;  // c -> e c, 1x1
  Parameter<T> dconv_w, dconv_b;  // e c depthwise 3x3
  Parameter<T> conv2_w, conv2_b;  // e c / 2 -> c, 1x1
  Parameter<T> ln2_gain, ln2_shift;
  Parameter<T> conv3_w, conv3_b;  // c -> e c, 1x1
  Parameter<T> conv4_w, conv4_b;  // e c / 2 -> c, 1x1
  Parameter<T> alpha, beta;       // per-channel skip weights
  bool has_sffb = false;
  Sffb<T> sffb;
};

template <typename T>
Affb<T> make_affb(const std::string& name, int channels, FreqVariant variant, Rng& rng);

template <typename T>
Var<T> affb_forward(const Var<T>& x, const Affb<T>& spec);

/// Structure modelling block: edge conv then depthwise edge conv at width c0,
/// followed by a pyramid of 2x average pools each projected (1x1, no bias) to
/// the next encoder width.
template <typename T>
struct Smb {
  EdgeKernelBank<T> econv;
  EdgeKernelBank<T> deconv;
  std::vector<Parameter<T>> projections;  // level k (k >= 1): (w_k, w_{k-1}, 1, 1)
  std::vector<int> widths;                // encoder width per level
};

template <typename T>
Smb<T> make_smb(const std::string& name, int kinds, const std::vector<int>& widths, Rng& rng);

/// One feature map per encoder level; level k has widths[k] channels and
/// spatial dims divided by 2^k. Input dims must be divisible by 2^(levels-1).
template <typename T>
std::vector<Var<T>> smb_forward(const Var<T>& noisy, const Smb<T>& spec);

namespace detail {
template <typename B, template <typename> class Tmpl>
inline constexpr bool is_instance_v = false;
template <typename T, template <typename> class Tmpl>
inline constexpr bool is_instance_v<Tmpl<T>, Tmpl> = true;
}  // namespace detail

/// Matches Tmpl<T> and const Tmpl<T>.
template <typename B, template <typename> class Tmpl>
concept BlockOf = detail::is_instance_v<std::remove_const_t<B>, Tmpl>;

/// Calls f(param) for every parameter of a block in a fixed order. Works on
/// const and non-const blocks alike.
template <BlockOf<Sffb> Block, typename F>
void visit_parameters(Block& b, F&& f) {
  f(b.weight);
  f(b.bias);
  if (b.variant == FreqVariant::complex) {
    f(b.weight2);
    f(b.bias2);
  }
}

template <BlockOf<Affb> Block, typename F>
void visit_parameters(Block& b, F&& f) {
  f(b.ln1_gain);
  f(b.ln1_shift);
  f(b.conv1_w);
  f(b.conv1_b);
  f(b.dconv_w);
  f(b.dconv_b);
  if (b.has_sffb) visit_parameters(b.sffb, f);
  f(b.conv2_w);
  f(b.conv2_b);
  f(b.ln2_gain);
  f(b.ln2_shift);
  f(b.conv3_w);
  f(b.conv3_b);
  f(b.conv4_w);
  f(b.conv4_b);
  f(b.alpha);
  f(b.beta);
}

template <BlockOf<Smb> Block, typename F>
void visit_parameters(Block& b, F&& f) {
  f(b.econv.gamma);
  f(b.deconv.gamma);
  for (auto& p : b.projections) f(p);
}

/// Fan-in scaled uniform initialisation U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename T>
Parameter<T> make_conv_weight(const std::string& name, Dims dims, Rng& rng);
template <typename T>
Parameter<T> make_vector(const std::string& name, int channels, T value);

}  // namespace saffn
