#include "saffn/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace saffn {

namespace {

class PgmHeader {
 public:
  PgmHeader(const std::vector<unsigned char>& bytes, const std::string& path)
      : b_(bytes), path_(path) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_ + ": " + what + " at byte " + std::to_string(pos_));
  }

  void skip_space() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int number(const char* what) {
    skip_space();
    if (pos_ >= b_.size()) fail(std::string("unexpected end of file reading ") + what);
    if (!std::isdigit(b_[pos_])) fail(std::string("expected ") + what);
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_] - '0');
      if (v > 1 << 20) fail(std::string(what) + " too large");
      ++pos_;
    }
    return static_cast<int>(v);
  }

  std::size_t pos_ = 0;

 private:
  const std::vector<unsigned char>& b_;
  const std::string& path_;
};

bool in_rect(int y, int x, int top, int left, int h, int w) {
  return y >= top && y < top + h && x >= left && x < left + w;
}

}  // namespace

Tensor<float> load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  PgmHeader h(bytes, path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    h.fail("not a binary PGM (expected magic P5)");
  }
  h.pos_ = 2;
  const int width = h.number("width");
  const int height = h.number("height");
  const int maxval = h.number("maxval");
  if (width < 1 || height < 1) h.fail("image dims must be positive");
  if (maxval != 255) h.fail("maxval " + std::to_string(maxval) + " unsupported (need 255)");
  if (h.pos_ >= bytes.size() || !std::isspace(bytes[h.pos_])) {
    h.fail("expected whitespace after header");
  }
  ++h.pos_;
  const std::size_t need = static_cast<std::size_t>(width) * height;
  if (bytes.size() - h.pos_ < need) {
    h.pos_ = bytes.size();
    h.fail("short pixel data (" + std::to_string(need) + " bytes expected)");
  }
  Tensor<float> t(Dims{1, 1, height, width});
  for (std::size_t i = 0; i < need; ++i) t[i] = static_cast<float>(bytes[h.pos_ + i]) / 255.0f;
  return t;
}

void save_pgm(const Tensor<float>& image, const std::string& path) {
  if (image.empty() || image.n() != 1 || image.c() != 1) {
    throw ShapeError("save_pgm: need a single plane, got " + image.dims().str());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "P5\n" << image.w() << " " << image.h() << "\n255\n";
  std::vector<unsigned char> px(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double v = std::round(static_cast<double>(image[i]) * 255.0);
    px[i] = static_cast<unsigned char>(std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 255.0));
  }
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

Tensor<float> add_gaussian_noise(const Tensor<float>& clean, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("noise sigma must be >= 0, got " + std::to_string(sigma));
  Tensor<float> out = clean;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  const double s = sigma / 255.0;
  for (auto& v : out.span()) {
    v = static_cast<float>(std::clamp(static_cast<double>(v) + s * rng.normal(), 0.0, 1.0));
  }
  return out;
}

ImagePair make_pair(Tensor<float> clean, double sigma, std::uint64_t seed) {
  ImagePair p;
  p.noisy = add_gaussian_noise(clean, sigma, seed);
  p.clean = std::move(clean);
  p.sigma = sigma;
  p.seed = seed;
  return p;
}

std::vector<ImagePair> make_pairs(const std::vector<Tensor<float>>& clean, double sigma,
                                  std::uint64_t seed) {
  std::vector<ImagePair> out;
  out.reserve(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    out.push_back(make_pair(clean[i], sigma, Rng::derive(seed, i).next_u64()));
  }
  return out;
}

CropSite draw_crop(const std::vector<ImagePair>& pairs, int crop, Rng& rng) {
  CropSite s;
  s.image = static_cast<std::size_t>(rng.uniform_int(pairs.size()));
  const Tensor<float>& img = pairs[s.image].clean;
  s.y = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.h() - crop + 1)));
  s.x = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.w() - crop + 1)));
  return s;
}

Batch sample_patches(const std::vector<ImagePair>& pairs, int crop, int batch, Rng& rng) {
  if (pairs.empty()) throw ConfigError("sample_patches: no image pairs");
  if (crop < 1 || batch < 1) throw ConfigError("sample_patches: crop and batch must be >= 1");
  const int channels = pairs.front().clean.c();
  for (const auto& p : pairs) {
    if (p.clean.h() < crop || p.clean.w() < crop) {
      throw ConfigError("sample_patches: crop " + std::to_string(crop) + " exceeds image " +
                        p.clean.dims().str());
    }
    if (p.clean.c() != channels || p.clean.dims() != p.noisy.dims()) {
      throw ShapeError("sample_patches: inconsistent pair dims " + p.clean.dims().str());
    }
  }
  Batch b;
  b.clean = Tensor<float>(Dims{batch, channels, crop, crop});
  b.noisy = Tensor<float>(Dims{batch, channels, crop, crop});
  for (int i = 0; i < batch; ++i) {
    const CropSite s = draw_crop(pairs, crop, rng);
    const ImagePair& p = pairs[s.image];
    for (int c = 0; c < channels; ++c) {
      for (int y = 0; y < crop; ++y) {
        const std::size_t src = p.clean.offset(0, c, s.y + y, s.x);
        const std::size_t dst = b.clean.offset(i, c, y, 0);
        std::copy_n(p.clean.data() + src, crop, b.clean.data() + dst);
        std::copy_n(p.noisy.data() + src, crop, b.noisy.data() + dst);
      }
    }
  }
  return b;
}

Batch sample_patches(const std::vector<ImagePair>& pairs, int crop, int batch, std::uint64_t seed) {
  Rng rng(seed);
  return sample_patches(pairs, crop, batch, rng);
}

void CorpusSpec::validate() const {
  if (count < 1) throw ConfigError("corpus count must be >= 1");
  if (size < 8) throw ConfigError("corpus image size must be >= 8");
  if (cell_pitch < 2) throw ConfigError("cell_pitch must be >= 2");
  if (line_width < 1 || line_width >= cell_pitch) {
    throw ConfigError("line_width must be in [1, cell_pitch)");
  }
  if (!(illum_lo >= 0.0 && illum_lo <= illum_hi && illum_hi <= 1.0)) {
    throw ConfigError("illumination range must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(low_light_fraction >= 0.0 && low_light_fraction <= 1.0)) {
    throw ConfigError("low_light_fraction must be in [0, 1]");
  }
  if (!(star_density >= 0.0 && star_density <= 1.0)) {
    throw ConfigError("star_density must be in [0, 1]");
  }
}

Tensor<float> generate_image(const CorpusSpec& spec, int index) {
  spec.validate();
  Rng rng = Rng::derive(spec.seed, static_cast<std::uint64_t>(index));
  const int s = spec.size;
  const double light = rng.uniform(spec.illum_lo, spec.illum_hi);
  constexpr double kSky = 0.02;

  const int bus_w = std::max(2, static_cast<int>(std::lround(s * rng.uniform(0.16, 0.24))));
  const int bus_h = std::max(2, static_cast<int>(std::lround(s * rng.uniform(0.30, 0.42))));
  const int jitter = std::max(1, s / 16);
  const int bus_left = s / 2 - bus_w / 2 + static_cast<int>(rng.uniform_int(2 * jitter + 1)) - jitter;
  const int bus_top = s / 2 - bus_h / 2 + static_cast<int>(rng.uniform_int(2 * jitter + 1)) - jitter;

  const int panel_h = std::max(2, static_cast<int>(std::lround(s * rng.uniform(0.30, 0.40))));
  const int panel_top = bus_top + bus_h / 2 - panel_h / 2;
  const int margin = std::max(1, s / 32);
  const int gap = std::max(1, s / 32);
  const int left_x0 = margin;
  const int left_w = std::max(0, bus_left - gap - left_x0);
  const int right_x0 = bus_left + bus_w + gap;
  const int right_w = std::max(0, s - margin - right_x0);

  const int shadow_w = static_cast<int>(std::lround(spec.low_light_fraction * s));
  const int shadow_x0 = shadow_w >= s ? 0 : static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(s - shadow_w + 1)));

  Tensor<float> img(Dims{1, 1, s, s});
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      double v = kSky;
      bool body = false;
      const auto panel_value = [&](int x0) {
        const int py = y - panel_top;
        const int px = x - x0;
        const bool line = (py % spec.cell_pitch) < spec.line_width ||
                          (px % spec.cell_pitch) < spec.line_width;
        return light * (line ? 0.9 : 0.55);
      };
      if (in_rect(y, x, bus_top, bus_left, bus_h, bus_w)) {
        v = light * (0.3 + 0.3 * (y - bus_top) / std::max(1, bus_h - 1));
        body = true;
      } else if (in_rect(y, x, panel_top, left_x0, panel_h, left_w)) {
        v = panel_value(left_x0);
        body = true;
      } else if (in_rect(y, x, panel_top, right_x0, panel_h, right_w)) {
        v = panel_value(right_x0);
        body = true;
      }
      if (x >= shadow_x0 && x < shadow_x0 + shadow_w) v *= 0.2;
      const double star_draw = rng.uniform();
      const double star_level = rng.uniform(0.5, 1.0);
      if (!body && star_draw < spec.star_density) v = star_level;
      img.at(0, 0, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return img;
}

std::vector<Tensor<float>> generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  std::vector<Tensor<float>> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) out.push_back(generate_image(spec, i));
  return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const auto& e : entries) {
    if (e.path.find_first_of("\t\n") != std::string::npos) {
      throw ConfigError("manifest path contains a tab or newline: " + e.path);
    }
    out << e.index << '\t' << e.path << '\t' << e.seed << '\n';
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest '" + path + "'");
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected index<TAB>path<TAB>seed");
    }
    ManifestEntry e;
    try {
      std::size_t used = 0;
      e.index = std::stoi(line.substr(0, t1), &used);
      if (used != t1) throw std::invalid_argument("index");
      const std::string seed = line.substr(t2 + 1);
      e.seed = std::stoull(seed, &used);
      if (used != seed.size()) throw std::invalid_argument("seed");
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed index or seed");
    }
    e.path = line.substr(t1 + 1, t2 - t1 - 1);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace saffn
