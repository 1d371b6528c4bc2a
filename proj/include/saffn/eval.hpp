#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "saffn/data.hpp"
#include "saffn/network.hpp"

namespace saffn {

/// Reported for identical images.
inline constexpr double kPsnrCap = 100.0;

/// 10 log10(max^2 / mse), capped at kPsnrCap.
double psnr(const Tensor<float>& a, const Tensor<float>& b, double max_pixel = 1.0);

/// Mean local SSIM over every (n, c) plane: 11x11 Gaussian window with
/// sigma 1.5, valid positions only, K1 = 0.01, K2 = 0.03.
double ssim(const Tensor<float>& a, const Tensor<float>& b, double max_pixel = 1.0);

/// Regularised incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  int dof = 0;
  double mean_diff = 0.0;
};

/// Paired test on d = b - a. Throws ConfigError on length mismatch or n < 2
/// and NumericError when every difference is identical.
TTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct EvalReport {
  std::vector<double> psnr;        // denoised vs clean
  std::vector<double> ssim;
  std::vector<double> input_psnr;  // noisy vs clean
  std::vector<double> runtime_ms;  // one forward per image
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_input_psnr = 0.0;
  double sigma = 0.0;
  std::uint64_t macs = 0;  // at the padded size of the first image
  std::string fingerprint;
};

EvalReport evaluate(const Model<float>& model, const std::vector<ImagePair>& pairs, double sigma);

/// Human-readable table, one line per image then the means.
void write_report_text(const EvalReport& r, std::ostream& os);
/// "key = value" lines: sigma, images, mean_psnr, mean_ssim, mean_input_psnr,
/// macs, fingerprint, then psnr.<i>, ssim.<i>, input_psnr.<i>, runtime_ms.<i>.
void write_report_kv(const EvalReport& r, std::ostream& os);

/// Median wall time of `repeats` forward passes after one warm-up.
double measure_runtime_ms(const Model<float>& model, int h, int w, int repeats = 5);

}  // namespace saffn
