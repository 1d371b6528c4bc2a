#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "saffn/eval.hpp"
#include "test_util.hpp"

namespace saffn {
namespace {

using testing::random_tensor;

TEST(Psnr, ClosedForms) {
  auto a = random_tensor<float>({1, 1, 8, 8}, 1, 0, 1);
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_NEAR(psnr(Tensor<float>(Dims{1, 1, 4, 4}, 0.0f), Tensor<float>(Dims{1, 1, 4, 4}, 1.0f)), 0.0, 1e-12);
  Tensor<float> b(Dims{1, 1, 4, 4}, 0.25f), c(Dims{1, 1, 4, 4}, 0.35f);
  EXPECT_NEAR(psnr(b, c), 20.0, 1e-5);
  EXPECT_NEAR(psnr(Tensor<float>(Dims{1, 1, 2, 2}, 0.0f), Tensor<float>(Dims{1, 1, 2, 2}, 25.5f), 255.0), 20.0, 1e-9);
  EXPECT_THROW(psnr(a, Tensor<float>(Dims{1, 1, 8, 9})), ShapeError);
}

TEST(Psnr, Symmetric) {
  auto a = random_tensor<float>({1, 1, 16, 16}, 2, 0, 1);
  auto b = random_tensor<float>({1, 1, 16, 16}, 3, 0, 1);
  EXPECT_EQ(psnr(a, b), psnr(b, a));
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
}

TEST(Psnr, DecreasesWithNoiseLevel) {
  Tensor<float> x(Dims{1, 1, 64, 64}, 0.5f);
  double floor_prev = kPsnrCap;
  for (double sigma : {25.0, 50.0, 75.0, 100.0}) {
    double lo = kPsnrCap, hi = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const double p = psnr(add_gaussian_noise(x, sigma, s), x);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    EXPECT_LT(hi, floor_prev) << sigma;
    floor_prev = lo;
  }
}

TEST(Ssim, IdenticalIsOne) {
  auto a = random_tensor<float>({2, 1, 16, 20}, 4, 0, 1);
  EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, ConstantPlanes) {
  const double c1 = 1e-4;
  EXPECT_NEAR(ssim(Tensor<float>(Dims{1, 1, 12, 12}, 0.0f), Tensor<float>(Dims{1, 1, 12, 12}, 1.0f)),
              c1 / (1 + c1), 1e-12);
  const double mu = 0.25, d = 0.0078125;  // exactly representable
  const double want = (2 * mu * (mu + d) + c1) / (mu * mu + (mu + d) * (mu + d) + c1);
  EXPECT_NEAR(ssim(Tensor<float>(Dims{1, 1, 11, 11}, float(mu)), Tensor<float>(Dims{1, 1, 11, 11}, float(mu + d))),
              want, 1e-6);
}

TEST(Ssim, DecreasesWithContrastCompression) {
  auto a = random_tensor<float>({1, 1, 32, 32}, 5, 0, 1);
  const double mu = std::accumulate(a.storage().begin(), a.storage().end(), 0.0) / a.size();
  double prev = 1.0 + 1e-12;
  for (double k : {1.0, 0.8, 0.6, 0.4, 0.2, 0.05}) {
    Tensor<float> b(a.dims());
    for (std::size_t i = 0; i < a.size(); ++i) b[i] = static_cast<float>(a[i] * k + (1 - k) * mu);
    const double s = ssim(a, b);
    EXPECT_LT(s, prev) << k;
    prev = s;
  }
}

TEST(Ssim, RejectsSmallImages) {
  EXPECT_THROW(ssim(Tensor<float>(Dims{1, 1, 10, 20}), Tensor<float>(Dims{1, 1, 10, 20})), ConfigError);
}

TEST(IncompleteBeta, MatchesBoost) {
  for (double a : {0.5, 1.0, 2.5, 10.0, 40.0})
    for (double b : {0.5, 1.0, 3.0, 25.0})
      for (double x : {0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0}) {
        EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-10) << a << " " << b << " " << x;
      }
}

TEST(TTest, HandFixture) {
  auto r = paired_t_test({1, 2, 3}, {1.1, 2.2, 2.9});
  const double mean = 0.2 / 3;
  const double sd = std::sqrt(((0.1 - mean) * (0.1 - mean) + (0.2 - mean) * (0.2 - mean) +
                               (-0.1 - mean) * (-0.1 - mean)) / 2);
  EXPECT_NEAR(r.t, mean / (sd / std::sqrt(3.0)), 1e-9);
  EXPECT_NEAR(r.t, 0.756, 1e-3);
  EXPECT_EQ(r.dof, 2);
  boost::math::students_t dist(2);
  EXPECT_NEAR(r.p, 2 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 1e-6);
}

TEST(TTest, AntisymmetricUnderSwap) {
  std::vector<double> a{3.1, 2.7, 5.5, 4.0, 1.2}, b{3.0, 2.9, 5.9, 4.6, 1.0};
  auto ab = paired_t_test(a, b), ba = paired_t_test(b, a);
  EXPECT_EQ(ab.t, -ba.t);
  EXPECT_EQ(ab.p, ba.p);
}

TEST(TTest, PValueMatchesStudentT) {
  for (double t : {0.0, 0.3, 1.0, 2.2, 5.0, 12.0})
    for (double dof : {1.0, 2.0, 7.0, 30.0, 199.0}) {
      boost::math::students_t dist(dof);
      EXPECT_NEAR(student_t_two_sided_p(t, dof), 2 * boost::math::cdf(boost::math::complement(dist, t)), 1e-6);
    }
}

TEST(TTest, SeparatedSamplesAreSignificant) {
  Rng rng(6);
  std::vector<double> a, b;
  for (int i = 0; i < 100; ++i) {
    const double base = rng.uniform(25, 35);
    a.push_back(base + 0.3 * rng.normal());
    b.push_back(base + 0.5 + 0.3 * rng.normal());
  }
  auto r = paired_t_test(a, b);
  EXPECT_GT(r.t, 0);
  EXPECT_LT(r.p, 0.01);
}

TEST(TTest, DegenerateInputs) {
  EXPECT_THROW(paired_t_test({1, 2, 3}, {1, 2, 3}), NumericError);
  EXPECT_THROW(paired_t_test({1, 2, 3}, {2, 3, 4}), NumericError);
  EXPECT_THROW(paired_t_test({1}, {2}), ConfigError);
  EXPECT_THROW(paired_t_test({1, 2}, {2}), ConfigError);
}

std::vector<ImagePair> gray_pairs(double sigma, int n) {
  std::vector<Tensor<float>> clean(static_cast<std::size_t>(n), Tensor<float>(Dims{1, 1, 64, 64}, 0.5f));
  return make_pairs(clean, sigma, 7);
}

TEST(Evaluate, IdentityModelOnCleanInput) {
  const auto m = build<float>(tiny_config(4, {1, 1}, 1, {1, 1}), 0);
  auto r = evaluate(m, gray_pairs(0, 3), 0);
  for (double p : r.psnr) EXPECT_EQ(p, kPsnrCap);
  for (double s : r.ssim) EXPECT_EQ(s, 1.0);
  EXPECT_EQ(r.mean_psnr, kPsnrCap);
}

TEST(Evaluate, IdentityModelReportsNoisyBaseline) {
  const auto m = build<float>(tiny_config(4, {1, 1}, 1, {1, 1}), 0);
  auto r = evaluate(m, gray_pairs(50, 10), 50);
  EXPECT_NEAR(r.mean_psnr, 20 * std::log10(255.0 / 50), 0.3);
  EXPECT_EQ(r.psnr, r.input_psnr);
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  EXPECT_NEAR(r.mean_psnr, mean(r.psnr), 1e-9);
  EXPECT_NEAR(r.mean_ssim, mean(r.ssim), 1e-9);
  EXPECT_EQ(r.macs, count_macs(m.config, 64, 64).total);
  EXPECT_EQ(r.fingerprint, m.config.fingerprint());
  EXPECT_EQ(r.runtime_ms.size(), 10u);
}

TEST(Evaluate, KeyValueReport) {
  const auto m = build<float>(tiny_config(4, {1, 1}, 1, {1, 1}), 0);
  auto r = evaluate(m, gray_pairs(25, 2), 25);
  std::ostringstream os;
  write_report_kv(r, os);
  const auto text = os.str();
  for (const char* key : {"sigma = ", "images = 2", "mean_psnr = ", "mean_ssim = ", "mean_input_psnr = ",
                          "macs = ", "fingerprint = ", "psnr.0 = ", "ssim.1 = ", "input_psnr.1 = ",
                          "runtime_ms.0 = "}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace saffn
