#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "saffn/blocks.hpp"

namespace saffn {

/// Encoder level k runs at width * 2^k. Decoder lists are indexed by the same
/// level (dec_blocks[0] is the full-resolution stage) and execute deepest first.
struct NetworkConfig {
  int width = 64;
  std::vector<int> enc_blocks{2, 2, 4, 8};
  int mid_blocks = 12;
  std::vector<int> dec_blocks{2, 2, 2, 2};
  int kernel_kinds = 4;
  FreqVariant freq_variant = FreqVariant::simplified;
  int in_channels = 1;
  bool use_smb = true;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  /// Encoder/decoder stages plus the bottleneck.
  [[nodiscard]] int levels() const { return static_cast<int>(enc_blocks.size()) + 1; }
  /// Spatial dims are padded to a multiple of this.
  [[nodiscard]] int pad_multiple() const { return 1 << enc_blocks.size(); }
  [[nodiscard]] int width_at(int level) const { return width << level; }
  /// Short stable description, e.g. "w16-e1.1-m1-d1.1-k4-simplified-smb-c1".
  [[nodiscard]] std::string fingerprint() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Named "desk-scale" configurations used by tests and the CLI.
NetworkConfig tiny_config(int width, std::vector<int> enc, int mid, std::vector<int> dec);

template <typename T>
struct Model {
  NetworkConfig config;
  Parameter<T> intro_w, intro_b;
  Smb<T> smb;
  std::vector<std::vector<Affb<T>>> encoders;  // [level][block]
  std::vector<Parameter<T>> down_w, down_b;    // 3x3 stride 2, c -> 2c
  std::vector<Affb<T>> middle;
  std::vector<Parameter<T>> up_w;              // 1x1 2c -> 4c, no bias, then pixel shuffle
  std::vector<std::vector<Affb<T>>> decoders;  // [level][block]
  Parameter<T> ending_w, ending_b;

  /// Every parameter in a fixed order that depends only on the config.
  [[nodiscard]] std::vector<Parameter<T>*> parameters();
  [[nodiscard]] std::vector<const Parameter<T>*> parameters() const;
  [[nodiscard]] std::size_t parameter_count() const;
};

/// Deterministic initialisation from `seed`. The ending conv is zero so a
/// fresh model is the identity map.
template <typename T>
Model<T> build(const NetworkConfig& config, std::uint64_t seed);

/// Same architecture and values in another element type.
template <typename U, typename T>
Model<U> cast_model(const Model<T>& m);

/// Receives intermediate feature maps by stage name during forward.
template <typename T>
using FeatureSink = std::function<void(const std::string&, const Tensor<T>&)>;

/// Differentiable forward pass. Any h, w >= 1; input must be finite.
template <typename T>
Var<T> forward(const Model<T>& model, const Var<T>& noisy, const FeatureSink<T>* sink = nullptr);

/// No-grad convenience wrapper.
template <typename T>
Tensor<T> infer(const Model<T>& model, const Tensor<T>& noisy, const FeatureSink<T>* sink = nullptr);

struct MacsRow {
  std::string block;
  std::uint64_t macs = 0;
};

struct MacsReport {
  std::vector<MacsRow> rows;
  std::uint64_t total = 0;
  int h = 0;
  int w = 0;
};

/// Conv: (c_in/groups) * c_out * k^2 * h_out * w_out.
/// FFT: c * h * (w/2+1) * log2(h*w) * 4, once forward and once inverse.
/// Elementwise work is not counted. Batch size 1.
MacsReport count_macs(const NetworkConfig& config, int h, int w);

/// Formula legend printed with the table.
std::string macs_formula();

}  // namespace saffn
