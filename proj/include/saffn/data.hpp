#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saffn/rng.hpp"
#include "saffn/tensor.hpp"

namespace saffn {

/// Binary 8-bit PGM (P5, maxval 255) as a 1x1xHxW tensor with values v/255.
Tensor<float> load_pgm(const std::string& path);
/// Writes round(v*255) clamped to [0, 255]. Requires a single plane.
void save_pgm(const Tensor<float>& image, const std::string& path);

/// clip(clean + N(0, (sigma/255)^2), 0, 1) with i.i.d. samples drawn from `seed`.
Tensor<float> add_gaussian_noise(const Tensor<float>& clean, double sigma, std::uint64_t seed);

struct ImagePair {
  Tensor<float> clean;
  Tensor<float> noisy;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

ImagePair make_pair(Tensor<float> clean, double sigma, std::uint64_t seed);

/// One pair per image with noise seed derive(seed, index).
std::vector<ImagePair> make_pairs(const std::vector<Tensor<float>>& clean, double sigma,
                                  std::uint64_t seed);

struct Batch {
  Tensor<float> clean;  // (batch, c, crop, crop)
  Tensor<float> noisy;
};

struct CropSite {
  std::size_t image = 0;
  int y = 0;
  int x = 0;
};

/// Uniform choice of image and of top-left offset among all valid ones.
CropSite draw_crop(const std::vector<ImagePair>& pairs, int crop, Rng& rng);

/// Aligned random crops from the clean and noisy images. Throws ConfigError
/// if `crop` exceeds any image.
Batch sample_patches(const std::vector<ImagePair>& pairs, int crop, int batch, Rng& rng);
Batch sample_patches(const std::vector<ImagePair>& pairs, int crop, int batch, std::uint64_t seed);

/// Synthetic spacecraft-like scene: a dark sky with sparse stars, a shaded bus
/// and two solar-panel wings carrying a periodic cell grid, partly shadowed.
struct CorpusSpec {
  int count = 200;
  int size = 64;
  int cell_pitch = 8;      // grid period in pixels
  int line_width = 1;      // grid line thickness in pixels
  double illum_lo = 0.4;   // per-image illumination L ~ U(illum_lo, illum_hi)
  double illum_hi = 1.0;
  double low_light_fraction = 0.25;  // share of columns under shadow
  double star_density = 0.002;       // probability of a star per sky pixel
  std::uint64_t seed = 1;

  void validate() const;
};

/// Image `index` of the corpus; a pure function of (spec, index).
Tensor<float> generate_image(const CorpusSpec& spec, int index);
std::vector<Tensor<float>> generate_corpus(const CorpusSpec& spec);

struct ManifestEntry {
  int index = 0;
  std::string path;
  std::uint64_t seed = 0;
};

/// "index<TAB>path<TAB>seed" per line.
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace saffn
