#include "saffn/eval.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace saffn {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    total += g[static_cast<std::size_t>(i)];
  }
  for (auto& v : g) v /= total;
  return g;
}

// Valid separable filtering of an h x w plane; result is (h-10) x (w-10).
std::vector<double> filter_valid(const std::vector<double>& in, int h, int w,
                                 const std::array<double, kWindow>& g) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) {
        acc += g[static_cast<std::size_t>(k)] * in[static_cast<std::size_t>(y) * w + x + k];
      }
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) {
        acc += g[static_cast<std::size_t>(k)] * rows[static_cast<std::size_t>(y + k) * ow + x];
      }
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

double ssim_plane(const float* a, const float* b, int h, int w, double max_pixel) {
  const auto g = gaussian_window();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> va(n), vb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    va[i] = a[i];
    vb[i] = b[i];
    aa[i] = va[i] * va[i];
    bb[i] = vb[i] * vb[i];
    ab[i] = va[i] * vb[i];
  }
  const auto mu_a = filter_valid(va, h, w, g);
  const auto mu_b = filter_valid(vb, h, w, g);
  const auto e_aa = filter_valid(aa, h, w, g);
  const auto e_bb = filter_valid(bb, h, w, g);
  const auto e_ab = filter_valid(ab, h, w, g);
  const double c1 = (0.01 * max_pixel) * (0.01 * max_pixel);
  const double c2 = (0.03 * max_pixel) * (0.03 * max_pixel);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete_beta: continued fraction did not converge");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double psnr(const Tensor<float>& a, const Tensor<float>& b, double max_pixel) {
  require_same_dims(a.dims(), b.dims(), "psnr");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(max_pixel * max_pixel / mse));
}

double ssim(const Tensor<float>& a, const Tensor<float>& b, double max_pixel) {
  require_same_dims(a.dims(), b.dims(), "ssim");
  if (a.h() < kWindow || a.w() < kWindow) {
    throw ConfigError("ssim: image " + a.dims().str() + " smaller than the 11x11 window");
  }
  double total = 0.0;
  for (int n = 0; n < a.n(); ++n) {
    for (int c = 0; c < a.c(); ++c) {
      total += ssim_plane(a.plane(n, c), b.plane(n, c), a.h(), a.w(), max_pixel);
    }
  }
  return total / (static_cast<double>(a.n()) * a.c());
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ConfigError("incomplete_beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw ConfigError("student_t_two_sided_p: dof must be > 0");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

TTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ConfigError("paired_t_test: lengths differ (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw ConfigError("paired_t_test: need at least 2 pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = b[i] - a[i];
  const double mean = mean_of(d);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) throw NumericError("paired_t_test: differences have zero variance");
  TTest r;
  r.mean_diff = mean;
  r.dof = static_cast<int>(n - 1);
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = student_t_two_sided_p(r.t, r.dof);
  return r;
}

EvalReport evaluate(const Model<float>& model, const std::vector<ImagePair>& pairs, double sigma) {
  EvalReport r;
  r.sigma = sigma;
  r.fingerprint = model.config.fingerprint();
  using clock = std::chrono::steady_clock;
  for (const auto& p : pairs) {
    if (p.noisy.c() != model.config.in_channels) {
      throw ShapeError("evaluate: image " + p.noisy.dims().str() + " vs model with " +
                       std::to_string(model.config.in_channels) + " channels");
    }
    const auto t0 = clock::now();
    const Tensor<float> out = infer(model, p.noisy);
    r.runtime_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
    r.psnr.push_back(psnr(out, p.clean));
    r.ssim.push_back(ssim(out, p.clean));
    r.input_psnr.push_back(psnr(p.noisy, p.clean));
  }
  r.mean_psnr = mean_of(r.psnr);
  r.mean_ssim = mean_of(r.ssim);
  r.mean_input_psnr = mean_of(r.input_psnr);
  if (!pairs.empty()) {
    const int m = model.config.pad_multiple();
    const int h = (pairs.front().noisy.h() + m - 1) / m * m;
    const int w = (pairs.front().noisy.w() + m - 1) / m * m;
    r.macs = count_macs(model.config, h, w).total;
  }
  return r;
}

void write_report_text(const EvalReport& r, std::ostream& os) {
  os << "model " << r.fingerprint << "  sigma " << r.sigma << "  MACs "
     << std::fixed << std::setprecision(3) << static_cast<double>(r.macs) / 1e9 << "G\n";
  os << "image    psnr_in   psnr_out   ssim_out   runtime_ms\n";
  for (std::size_t i = 0; i < r.psnr.size(); ++i) {
    os << std::setw(5) << i << std::setw(11) << std::setprecision(3) << r.input_psnr[i]
       << std::setw(11) << r.psnr[i] << std::setw(11) << std::setprecision(4) << r.ssim[i]
       << std::setw(13) << std::setprecision(2) << r.runtime_ms[i] << "\n";
  }
  os << " mean" << std::setw(11) << std::setprecision(3) << r.mean_input_psnr << std::setw(11)
     << r.mean_psnr << std::setw(11) << std::setprecision(4) << r.mean_ssim << "\n";
  os.unsetf(std::ios::floatfield);
}

void write_report_kv(const EvalReport& r, std::ostream& os) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "sigma = " << r.sigma << "\n"
     << "images = " << r.psnr.size() << "\n"
     << "mean_psnr = " << r.mean_psnr << "\n"
     << "mean_ssim = " << r.mean_ssim << "\n"
     << "mean_input_psnr = " << r.mean_input_psnr << "\n"
     << "macs = " << r.macs << "\n"
     << "fingerprint = " << r.fingerprint << "\n";
  for (std::size_t i = 0; i < r.psnr.size(); ++i) {
    os << "psnr." << i << " = " << r.psnr[i] << "\n"
       << "ssim." << i << " = " << r.ssim[i] << "\n"
       << "input_psnr." << i << " = " << r.input_psnr[i] << "\n"
       << "runtime_ms." << i << " = " << r.runtime_ms[i] << "\n";
  }
  os.precision(old);
}

double measure_runtime_ms(const Model<float>& model, int h, int w, int repeats) {
  if (repeats < 1) throw ConfigError("measure_runtime_ms: repeats must be >= 1");
  Rng rng(0);
  Tensor<float> x(Dims{1, model.config.in_channels, h, w});
  for (auto& v : x.span()) v = static_cast<float>(rng.uniform());
  using clock = std::chrono::steady_clock;
  (void)infer(model, x);
  std::vector<double> times;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = clock::now();
    (void)infer(model, x);
    times.push_back(std::chrono::duration<double, std::milli>(clock::now() - t0).count());
  }
  return median(times);
}

}  // namespace saffn
