#include "saffn/network.hpp"

#include <cmath>
#include <sstream>

#include "saffn/ops.hpp"

namespace saffn {

namespace {

std::string join_blocks(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(v[i]);
  }
  return out;
}

template <typename T>
void check_finite(const Tensor<T>& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(static_cast<double>(t[i]))) {
      throw NumericError("forward: input element " + std::to_string(i) + " is not finite");
    }
  }
}

template <typename ModelT, typename F>
void visit_model(ModelT& m, F&& f) {
  f(m.intro_w);
  f(m.intro_b);
  if (m.config.use_smb) visit_parameters(m.smb, f);
  for (std::size_t k = 0; k < m.encoders.size(); ++k) {
    for (auto& b : m.encoders[k]) visit_parameters(b, f);
    f(m.down_w[k]);
    f(m.down_b[k]);
  }
  for (auto& b : m.middle) visit_parameters(b, f);
  for (std::size_t k = m.decoders.size(); k-- > 0;) {
    f(m.up_w[k]);
    for (auto& b : m.decoders[k]) visit_parameters(b, f);
  }
  f(m.ending_w);
  f(m.ending_b);
}

std::uint64_t conv_macs(int c_in, int c_out, int k, int groups, int h_out, int w_out) {
  return static_cast<std::uint64_t>(c_in / groups) * static_cast<std::uint64_t>(c_out) *
         static_cast<std::uint64_t>(k * k) * static_cast<std::uint64_t>(h_out) *
         static_cast<std::uint64_t>(w_out);
}

std::uint64_t fft_macs(int c, int h, int w) {
  const double bins = static_cast<double>(h) * (w / 2 + 1);
  const double stages = std::log2(static_cast<double>(h) * w);
  return static_cast<std::uint64_t>(std::llround(c * bins * stages * 4.0));
}

std::uint64_t affb_macs(int c, FreqVariant variant, int h, int w) {
  std::uint64_t m = 0;
  m += conv_macs(c, 2 * c, 1, 1, h, w);
  m += conv_macs(2 * c, 2 * c, 3, 2 * c, h, w);
  if (variant != FreqVariant::none) {
    const int convs = variant == FreqVariant::complex ? 2 : 1;
    m += 2 * fft_macs(c, h, w);
    m += static_cast<std::uint64_t>(convs) * conv_macs(2 * c, 2 * c, 1, 1, h, w / 2 + 1);
  }
  m += conv_macs(c, c, 1, 1, h, w);
  m += conv_macs(c, 2 * c, 1, 1, h, w);
  m += conv_macs(c, c, 1, 1, h, w);
  return m;
}

}  // namespace

void NetworkConfig::validate() const {
  if (width < 1) throw ConfigError("width must be >= 1, got " + std::to_string(width));
  if (in_channels < 1) {
    throw ConfigError("in_channels must be >= 1, got " + std::to_string(in_channels));
  }
  if (enc_blocks.empty()) throw ConfigError("enc_blocks must list at least one level");
  if (enc_blocks.size() > 8) throw ConfigError("enc_blocks supports at most 8 levels");
  if (dec_blocks.size() != enc_blocks.size()) {
    throw ConfigError("dec_blocks has " + std::to_string(dec_blocks.size()) +
                      " levels but enc_blocks has " + std::to_string(enc_blocks.size()));
  }
  for (int b : enc_blocks) {
    if (b < 0) throw ConfigError("enc_blocks entries must be >= 0");
  }
  for (int b : dec_blocks) {
    if (b < 0) throw ConfigError("dec_blocks entries must be >= 0");
  }
  if (mid_blocks < 0) throw ConfigError("mid_blocks must be >= 0");
  if (kernel_kinds != 2 && kernel_kinds != 4 && kernel_kinds != 8) {
    throw ConfigError("kernel_kinds must be 2, 4 or 8, got " + std::to_string(kernel_kinds));
  }
}

std::string NetworkConfig::fingerprint() const {
  std::ostringstream os;
  os << "w" << width << "-e" << join_blocks(enc_blocks) << "-m" << mid_blocks << "-d"
     << join_blocks(dec_blocks) << "-k" << kernel_kinds << "-" << to_string(freq_variant)
     << (use_smb ? "-smb" : "-nosmb") << "-c" << in_channels;
  return os.str();
}

NetworkConfig tiny_config(int width, std::vector<int> enc, int mid, std::vector<int> dec) {
  NetworkConfig c;
  c.width = width;
  c.enc_blocks = std::move(enc);
  c.mid_blocks = mid;
  c.dec_blocks = std::move(dec);
  c.validate();
  return c;
}

template <typename T>
std::vector<Parameter<T>*> Model<T>::parameters() {
  std::vector<Parameter<T>*> out;
  visit_model(*this, [&out](Parameter<T>& p) { out.push_back(&p); });
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> Model<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  visit_model(*this, [&out](const Parameter<T>& p) { out.push_back(&p); });
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

template <typename T>
Model<T> build(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Model<T> m;
  m.config = config;
  const int levels = static_cast<int>(config.enc_blocks.size());
  const int cin = config.in_channels;

  m.intro_w = make_conv_weight<T>("intro.weight", Dims{config.width, cin, 3, 3}, rng);
  m.intro_b = make_vector<T>("intro.bias", config.width, T(0));

  if (config.use_smb) {
    std::vector<int> widths;
    for (int k = 0; k < levels; ++k) widths.push_back(config.width_at(k));
    m.smb = make_smb<T>("smb", config.kernel_kinds, widths, rng);
  }

  m.encoders.resize(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    const int c = config.width_at(k);
    for (int b = 0; b < config.enc_blocks[static_cast<std::size_t>(k)]; ++b) {
      m.encoders[static_cast<std::size_t>(k)].push_back(make_affb<T>(
          "enc" + std::to_string(k) + "." + std::to_string(b), c, config.freq_variant, rng));
    }
    const std::string down = "down" + std::to_string(k);
    m.down_w.push_back(make_conv_weight<T>(down + ".weight", Dims{2 * c, c, 3, 3}, rng));
    m.down_b.push_back(make_vector<T>(down + ".bias", 2 * c, T(0)));
  }

  const int cm = config.width_at(levels);
  for (int b = 0; b < config.mid_blocks; ++b) {
    m.middle.push_back(make_affb<T>("middle." + std::to_string(b), cm, config.freq_variant, rng));
  }

  m.up_w.resize(static_cast<std::size_t>(levels));
  m.decoders.resize(static_cast<std::size_t>(levels));
  for (int k = levels - 1; k >= 0; --k) {
    const int c_deep = config.width_at(k + 1);
    m.up_w[static_cast<std::size_t>(k)] = make_conv_weight<T>(
        "up" + std::to_string(k) + ".weight", Dims{2 * c_deep, c_deep, 1, 1}, rng);
    const int c = config.width_at(k);
    for (int b = 0; b < config.dec_blocks[static_cast<std::size_t>(k)]; ++b) {
      m.decoders[static_cast<std::size_t>(k)].push_back(make_affb<T>(
          "dec" + std::to_string(k) + "." + std::to_string(b), c, config.freq_variant, rng));
    }
  }

  m.ending_w = Parameter<T>("ending.weight", Tensor<T>::zeros(Dims{cin, config.width, 3, 3}));
  m.ending_b = make_vector<T>("ending.bias", cin, T(0));
  return m;
}

template <typename U, typename T>
Model<U> cast_model(const Model<T>& m) {
  Model<U> out = build<U>(m.config, 0);
  auto dst = out.parameters();
  auto src = m.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i]->value = src[i]->value.template cast<U>();
    dst[i]->zero_grad();
  }
  return out;
}

template <typename T>
Var<T> forward(const Model<T>& model, const Var<T>& noisy, const FeatureSink<T>* sink) {
  const NetworkConfig& cfg = model.config;
  const Dims d = noisy.dims();
  if (d.c != cfg.in_channels) {
    throw ShapeError("forward: input " + d.str() + " but model expects " +
                     std::to_string(cfg.in_channels) + " channels");
  }
  check_finite(noisy.value());
  Tape<T>* tape = noisy.tape();
  const auto p = [tape](const Parameter<T>& param) { return bind(tape, param); };
  const auto emit = [sink](const std::string& name, const Var<T>& v) {
    if (sink && *sink) (*sink)(name, v.value());
  };

  const int mult = cfg.pad_multiple();
  const int hp = (d.h + mult - 1) / mult * mult;
  const int wp = (d.w + mult - 1) / mult * mult;
  Var<T> x = (hp == d.h && wp == d.w) ? noisy : reflect_pad(noisy, hp - d.h, wp - d.w);

  Var<T> feat = conv2d(x, p(model.intro_w), p(model.intro_b), 1, 1, 1);
  emit("intro", feat);

  std::vector<Var<T>> pyramid;
  if (cfg.use_smb) {
    pyramid = smb_forward(x, model.smb);
    for (std::size_t k = 0; k < pyramid.size(); ++k) emit("smb" + std::to_string(k), pyramid[k]);
  }

  const std::size_t levels = model.encoders.size();
  std::vector<Var<T>> skips;
  skips.reserve(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    for (const auto& block : model.encoders[k]) feat = affb_forward(feat, block);
    skips.push_back(feat);
    emit("enc" + std::to_string(k), feat);
    if (cfg.use_smb) feat = add(feat, pyramid[k]);
    feat = conv2d(feat, p(model.down_w[k]), p(model.down_b[k]), 2, 1, 1);
  }

  for (const auto& block : model.middle) feat = affb_forward(feat, block);
  emit("middle", feat);

  for (std::size_t k = levels; k-- > 0;) {
    feat = pixel_shuffle_up(conv2d(feat, p(model.up_w[k]), Var<T>{}, 1, 0, 1), 2);
    feat = add(feat, skips[k]);
    for (const auto& block : model.decoders[k]) feat = affb_forward(feat, block);
    emit("dec" + std::to_string(k), feat);
  }

  Var<T> residual = conv2d(feat, p(model.ending_w), p(model.ending_b), 1, 1, 1);
  emit("residual", residual);
  Var<T> out = add(x, residual);
  return (hp == d.h && wp == d.w) ? out : crop(out, d.h, d.w);
}

template <typename T>
Tensor<T> infer(const Model<T>& model, const Tensor<T>& noisy, const FeatureSink<T>* sink) {
  return forward(model, Var<T>::constant(noisy), sink).value();
}

MacsReport count_macs(const NetworkConfig& config, int h, int w) {
  config.validate();
  const int mult = config.pad_multiple();
  if (h < 1 || w < 1 || h % mult != 0 || w % mult != 0) {
    throw ConfigError("count_macs: " + std::to_string(h) + "x" + std::to_string(w) +
                      " is not a positive multiple of " + std::to_string(mult));
  }
  MacsReport r;
  r.h = h;
  r.w = w;
  const auto row = [&r](std::string name, std::uint64_t macs) {
    r.rows.push_back({std::move(name), macs});
    r.total += macs;
  };
  const int levels = static_cast<int>(config.enc_blocks.size());
  const int cin = config.in_channels;

  row("intro", conv_macs(cin, config.width, 3, 1, h, w));
  if (config.use_smb) {
    std::uint64_t smb = conv_macs(cin, config.width, 3, 1, h, w);
    smb += conv_macs(config.width, config.width, 3, config.width, h, w);
    for (int k = 1; k < levels; ++k) {
      smb += conv_macs(config.width_at(k - 1), config.width_at(k), 1, 1, h >> k, w >> k);
    }
    row("smb", smb);
  }
  for (int k = 0; k < levels; ++k) {
    const int c = config.width_at(k);
    const int hk = h >> k;
    const int wk = w >> k;
    for (int b = 0; b < config.enc_blocks[static_cast<std::size_t>(k)]; ++b) {
      row("enc" + std::to_string(k) + "." + std::to_string(b),
          affb_macs(c, config.freq_variant, hk, wk));
    }
    row("down" + std::to_string(k), conv_macs(c, 2 * c, 3, 1, hk / 2, wk / 2));
  }
  const int cm = config.width_at(levels);
  for (int b = 0; b < config.mid_blocks; ++b) {
    row("middle." + std::to_string(b), affb_macs(cm, config.freq_variant, h >> levels, w >> levels));
  }
  for (int k = levels - 1; k >= 0; --k) {
    const int c_deep = config.width_at(k + 1);
    row("up" + std::to_string(k), conv_macs(c_deep, 2 * c_deep, 1, 1, h >> (k + 1), w >> (k + 1)));
    for (int b = 0; b < config.dec_blocks[static_cast<std::size_t>(k)]; ++b) {
      row("dec" + std::to_string(k) + "." + std::to_string(b),
          affb_macs(config.width_at(k), config.freq_variant, h >> k, w >> k));
    }
  }
  row("ending", conv_macs(config.width, cin, 3, 1, h, w));
  return r;
}

std::string macs_formula() {
  return "conv = (c_in/groups) * c_out * k^2 * h_out * w_out; "
         "fft = c * h * (w/2+1) * log2(h*w) * 4 per direction; elementwise ops not counted";
}

#define SAFFN_INSTANTIATE_NETWORK(T)                                                     \
  template struct Model<T>;                                                              \
  template Model<T> build(const NetworkConfig&, std::uint64_t);                         \
  template Var<T> forward(const Model<T>&, const Var<T>&, const FeatureSink<T>*);       \
  template Tensor<T> infer(const Model<T>&, const Tensor<T>&, const FeatureSink<T>*);

SAFFN_INSTANTIATE_NETWORK(float)
SAFFN_INSTANTIATE_NETWORK(double)

#undef SAFFN_INSTANTIATE_NETWORK

template Model<double> cast_model(const Model<float>&);
template Model<float> cast_model(const Model<double>&);
template Model<float> cast_model(const Model<float>&);

}  // namespace saffn
