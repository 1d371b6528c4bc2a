#include "saffn/blocks.hpp"

#include <cmath>

#include "saffn/fourier.hpp"
#include "saffn/ops.hpp"

namespace saffn {

std::string to_string(FreqVariant v) {
  switch (v) {
    case FreqVariant::none:
      return "none";
    case FreqVariant::simplified:
      return "simplified";
    case FreqVariant::complex:
      return "complex";
  }
  return "unknown";
}

FreqVariant parse_freq_variant(const std::string& s) {
  if (s == "none") return FreqVariant::none;
  if (s == "simplified" || s == "sffb") return FreqVariant::simplified;
  if (s == "complex" || s == "cffb") return FreqVariant::complex;
  throw ConfigError("unknown frequency variant '" + s + "' (expected none, simplified, complex)");
}

template <typename T>
Parameter<T> make_conv_weight(const std::string& name, Dims dims, Rng& rng) {
  const double fan_in = static_cast<double>(dims.c) * dims.h * dims.w;
  const double bound = 1.0 / std::sqrt(fan_in);
  Tensor<T> value(dims);
  for (auto& v : value.span()) v = static_cast<T>(rng.uniform(-bound, bound));
  return Parameter<T>(name, std::move(value));
}

template <typename T>
Parameter<T> make_vector(const std::string& name, int channels, T value) {
  return Parameter<T>(name, Tensor<T>(Dims{1, channels, 1, 1}, value));
}

template <typename T>
Var<T> simple_gate(const Var<T>& x) {
  auto [first, second] = channel_split2(x);
  return hadamard(first, second);
}

template <typename T>
Sffb<T> make_sffb(const std::string& name, int channels, FreqVariant variant, Rng& rng) {
  if (variant == FreqVariant::none) throw ConfigError("make_sffb: variant 'none' has no block");
  Sffb<T> b;
  b.channels = channels;
  b.variant = variant;
  const int c2 = 2 * channels;
  b.weight = make_conv_weight<T>(name + ".freq1.weight", Dims{c2, c2, 1, 1}, rng);
  b.bias = make_vector<T>(name + ".freq1.bias", c2, T(0));
  if (variant == FreqVariant::complex) {
    b.weight2 = make_conv_weight<T>(name + ".freq2.weight", Dims{c2, c2, 1, 1}, rng);
    b.bias2 = make_vector<T>(name + ".freq2.bias", c2, T(0));
  }
  return b;
}

template <typename T>
Var<T> sffb_forward(const Var<T>& x, const Sffb<T>& spec) {
  if (x.dims().c != spec.channels) {
    throw ShapeError("sffb_forward: input dims " + x.dims().str() + " but block has " +
                     std::to_string(spec.channels) + " channels");
  }
  Tape<T>* tape = x.tape();
  Var<T> z = rfft2_stacked(x);
  z = conv2d(z, bind(tape, spec.weight), bind(tape, spec.bias), 1, 0, 1);
  if (spec.variant == FreqVariant::complex) {
    z = relu(z);
    z = conv2d(z, bind(tape, spec.weight2), bind(tape, spec.bias2), 1, 0, 1);
  }
  return add(irfft2_stacked(z, x.dims().w), x);
}

template <typename T>
Affb<T> make_affb(const std::string& name, int channels, FreqVariant variant, Rng& rng) {
  Affb<T> b;
  const int c = channels;
  const int e = 2;
  b.channels = c;
  b.expansion = e;
  b.ln1_gain = make_vector<T>(name + ".ln1.gain", c, T(1));
  b.ln1_shift = make_vector<T>(name + ".ln1.shift", c, T(0));
  b.conv1_w = make_conv_weight<T>(name + ".conv1.weight", Dims{e * c, c, 1, 1}, rng);
  b.conv1_b = make_vector<T>(name + ".conv1.bias", e * c, T(0));
  b.dconv_w = make_conv_weight<T>(name + ".dconv.weight", Dims{e * c, 1, 3, 3}, rng);
  b.dconv_b = make_vector<T>(name + ".dconv.bias", e * c, T(0));
  if (variant != FreqVariant::none) {
    b.has_sffb = true;
    b.sffb = make_sffb<T>(name + ".sffb", e * c / 2, variant, rng);
  }
  b.conv2_w = make_conv_weight<T>(name + ".conv2.weight", Dims{c, e * c / 2, 1, 1}, rng);
  b.conv2_b = make_vector<T>(name + ".conv2.bias", c, T(0));
  b.ln2_gain = make_vector<T>(name + ".ln2.gain", c, T(1));
  b.ln2_shift = make_vector<T>(name + ".ln2.shift", c, T(0));
  b.conv3_w = make_conv_weight<T>(name + ".conv3.weight", Dims{e * c, c, 1, 1}, rng);
  b.conv3_b = make_vector<T>(name + ".conv3.bias", e * c, T(0));
  b.conv4_w = make_conv_weight<T>(name + ".conv4.weight", Dims{c, e * c / 2, 1, 1}, rng);
  b.conv4_b = make_vector<T>(name + ".conv4.bias", c, T(0));
  b.alpha = make_vector<T>(name + ".alpha", c, T(1));
  b.beta = make_vector<T>(name + ".beta", c, T(1));
  return b;
}

template <typename T>
Var<T> affb_forward(const Var<T>& x, const Affb<T>& spec) {
  if (x.dims().c != spec.channels) {
    throw ShapeError("affb_forward: input dims " + x.dims().str() + " but block has " +
                     std::to_string(spec.channels) + " channels");
  }
  Tape<T>* tape = x.tape();
  const auto p = [tape](const Parameter<T>& param) { return bind(tape, param); };
  const int ec = spec.expansion * spec.channels;

  Var<T> a = layer_norm_2d(x, p(spec.ln1_gain), p(spec.ln1_shift));
  a = conv2d(a, p(spec.conv1_w), p(spec.conv1_b), 1, 0, 1);
  a = conv2d(a, p(spec.dconv_w), p(spec.dconv_b), 1, 1, ec);
  a = simple_gate(a);
  if (spec.has_sffb) a = sffb_forward(a, spec.sffb);
  Var<T> f = add(conv2d(a, p(spec.conv2_w), p(spec.conv2_b), 1, 0, 1), hadamard(x, p(spec.alpha)));

  Var<T> g = layer_norm_2d(f, p(spec.ln2_gain), p(spec.ln2_shift));
  g = conv2d(g, p(spec.conv3_w), p(spec.conv3_b), 1, 0, 1);
  g = simple_gate(g);
  return add(conv2d(g, p(spec.conv4_w), p(spec.conv4_b), 1, 0, 1), hadamard(f, p(spec.beta)));
}

template <typename T>
Smb<T> make_smb(const std::string& name, int kinds, const std::vector<int>& widths, Rng& rng) {
  if (widths.empty()) throw ConfigError("make_smb: need at least one level");
  Smb<T> b;
  b.widths = widths;
  b.econv = make_kernel_bank<T>(kinds, widths[0], T(1), name + ".econv");
  b.deconv = make_kernel_bank<T>(kinds, widths[0], T(1), name + ".deconv");
  for (std::size_t k = 1; k < widths.size(); ++k) {
    b.projections.push_back(make_conv_weight<T>(name + ".proj" + std::to_string(k) + ".weight",
                                                Dims{widths[k], widths[k - 1], 1, 1}, rng));
  }
  return b;
}

template <typename T>
std::vector<Var<T>> smb_forward(const Var<T>& noisy, const Smb<T>& spec) {
  const Dims d = noisy.dims();
  const int levels = static_cast<int>(spec.widths.size());
  const int factor = 1 << (levels - 1);
  if (d.h % factor != 0 || d.w % factor != 0) {
    throw ShapeError("smb_forward: spatial dims of " + d.str() + " not divisible by " +
                     std::to_string(factor));
  }
  std::vector<Var<T>> pyramid;
  pyramid.reserve(spec.widths.size());
  pyramid.push_back(depthwise_edge_conv(edge_conv(noisy, spec.econv), spec.deconv));
  for (std::size_t k = 1; k < spec.widths.size(); ++k) {
    Var<T> pooled = avg_pool2(pyramid.back());
    pyramid.push_back(
        conv2d(pooled, bind(noisy.tape(), spec.projections[k - 1]), Var<T>{}, 1, 0, 1));
  }
  return pyramid;
}

#define SAFFN_INSTANTIATE_BLOCKS(T)                                                          \
  template Parameter<T> make_conv_weight(const std::string&, Dims, Rng&);                     \
  template Parameter<T> make_vector(const std::string&, int, T);                             \
  template Var<T> simple_gate(const Var<T>&);                                                \
  template Sffb<T> make_sffb(const std::string&, int, FreqVariant, Rng&);                    \
  template Var<T> sffb_forward(const Var<T>&, const Sffb<T>&);                               \
  template Affb<T> make_affb(const std::string&, int, FreqVariant, Rng&);                    \
  template Var<T> affb_forward(const Var<T>&, const Affb<T>&);                               \
  template Smb<T> make_smb(const std::string&, int, const std::vector<int>&, Rng&);          \
  template std::vector<Var<T>> smb_forward(const Var<T>&, const Smb<T>&);

SAFFN_INSTANTIATE_BLOCKS(float)
SAFFN_INSTANTIATE_BLOCKS(double)

#undef SAFFN_INSTANTIATE_BLOCKS

}  // namespace saffn
