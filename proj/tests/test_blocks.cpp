#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "saffn/blocks.hpp"
#include "saffn/ops.hpp"
#include "test_util.hpp"

namespace saffn {
namespace {

using testing::bit_equal;
using testing::max_abs_diff;
using testing::random_tensor;

Var<float> cst(Tensor<float> t) { return Var<float>::constant(std::move(t)); }

TEST(SimpleGate, MultipliesHalves) {
  auto y = simple_gate(cst(Tensor<float>(Dims{1, 4, 1, 1}, std::vector<float>{2, 3, 4, 5})));
  EXPECT_EQ(y.value().storage(), (std::vector<float>{8, 15}));
}

TEST(SimpleGate, IdentityAndAnnihilator) {
  auto x = random_tensor<float>({2, 3, 4, 5}, 1);
  auto ones = cst(Tensor<float>(x.dims(), 1.0f));
  auto zeros = cst(Tensor<float>(x.dims(), 0.0f));
  EXPECT_TRUE(bit_equal(simple_gate(concat_channels(cst(x), ones)).value(), x));
  auto gated = simple_gate(concat_channels(cst(x), zeros));
  for (float v : gated.value().storage()) EXPECT_EQ(v, 0.0f);
  EXPECT_THROW(simple_gate(cst(Tensor<float>(Dims{1, 3, 2, 2}))), ShapeError);
}

Sffb<float> sffb_with(int c, float diag, FreqVariant variant = FreqVariant::simplified) {
  Rng rng(2);
  auto s = make_sffb<float>("sffb", c, variant, rng);
  s.weight.value.fill(0.0f);
  s.bias.value.fill(0.0f);
  for (int i = 0; i < 2 * c; ++i) s.weight.value.at(i, i, 0, 0) = diag;
  return s;
}

TEST(Sffb, ZeroWeightsIsPureSkip) {
  auto x = random_tensor<float>({1, 3, 7, 5}, 3);
  auto y = sffb_forward(cst(x), sffb_with(3, 0.0f)).value();
  EXPECT_TRUE(bit_equal(y, x));
  double ex = 0, ey = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ex += double(x[i]) * x[i];
    ey += double(y[i]) * y[i];
  }
  EXPECT_EQ(ex, ey);
}

TEST(Sffb, IdentityWeightsDoubleInput) {
  auto x = random_tensor<float>({2, 2, 8, 6}, 4);
  auto y = sffb_forward(cst(x), sffb_with(2, 1.0f)).value();
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], 2.0f * x[i], 1e-5);
}

TEST(Sffb, ScalesSingleFrequency) {
  const int h = 8, w = 8;
  Tensor<float> x(Dims{1, 1, h, w});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      x.at(0, 0, i, j) = static_cast<float>(std::cos(2 * std::numbers::pi * (i / 8.0 + 3 * j / 8.0)));
  for (float a : {0.0f, 0.5f, 1.0f}) {
    auto y = sffb_forward(cst(x), sffb_with(1, a)).value();
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], (1 + a) * x[i], 1e-5) << a;
  }
  // Only one bin pair carries energy, so a weight that leaves every other bin
  // untouched is indistinguishable from scaling the whole spectrum.
  auto spec = testing::naive_dft2(x.cast<double>().data(), h, w);
  int nonzero = 0;
  for (const auto& v : spec) nonzero += std::abs(v) > 1e-3L;
  EXPECT_EQ(nonzero, 2);
}

TEST(Sffb, PreservesDimsForOddSizes) {
  Rng rng(5);
  auto s = make_sffb<float>("sffb", 2, FreqVariant::simplified, rng);
  auto c = make_sffb<float>("cffb", 2, FreqVariant::complex, rng);
  for (int h : {1, 2, 3, 7})
    for (int w : {1, 4, 5, 9}) {
      auto x = cst(random_tensor<float>({1, 2, h, w}, h * 31 + w));
      EXPECT_EQ(sffb_forward(x, s).dims(), x.dims());
      EXPECT_EQ(sffb_forward(x, c).dims(), x.dims());
    }
}

TEST(Sffb, ComplexVariantCarriesSecondConv) {
  auto c = sffb_with(2, 1.0f, FreqVariant::complex);
  EXPECT_EQ(c.weight2.value.dims(), (Dims{4, 4, 1, 1}));
  c.weight2.value.fill(0.0f);
  c.bias2.value.fill(0.0f);
  auto x = random_tensor<float>({1, 2, 4, 4}, 6);
  EXPECT_TRUE(bit_equal(sffb_forward(cst(x), c).value(), x));
  int count = 0;
  visit_parameters(c, [&](const Parameter<float>&) { ++count; });
  EXPECT_EQ(count, 4);
}

Affb<float> zero_affb(int c, float a, float b) {
  Rng rng(7);
  auto blk = make_affb<float>("affb", c, FreqVariant::simplified, rng);
  for (auto* p : {&blk.conv1_w, &blk.conv1_b, &blk.dconv_w, &blk.dconv_b, &blk.conv2_w, &blk.conv2_b,
                  &blk.conv3_w, &blk.conv3_b, &blk.conv4_w, &blk.conv4_b, &blk.sffb.weight,
                  &blk.sffb.bias}) {
    p->value.fill(0.0f);
  }
  blk.alpha.value.fill(a);
  blk.beta.value.fill(b);
  return blk;
}

TEST(Affb, ZeroConvsUnitSkipsIsIdentity) {
  auto x = random_tensor<float>({1, 4, 6, 5}, 8);
  EXPECT_TRUE(bit_equal(affb_forward(cst(x), zero_affb(4, 1.0f, 1.0f)).value(), x));
}

TEST(Affb, ZeroConvsScaleByAlphaBeta) {
  auto x = random_tensor<float>({1, 4, 6, 5}, 9);
  auto y = affb_forward(cst(x), zero_affb(4, 0.5f, -3.0f)).value();
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], -1.5f * x[i], 1e-6);
}

TEST(Affb, DefaultSkipWeightsAreOne) {
  Rng rng(10);
  auto blk = make_affb<float>("affb", 4, FreqVariant::simplified, rng);
  for (float v : blk.alpha.value.storage()) EXPECT_EQ(v, 1.0f);
  for (float v : blk.beta.value.storage()) EXPECT_EQ(v, 1.0f);
  EXPECT_EQ(blk.conv1_w.value.dims(), (Dims{8, 4, 1, 1}));
  EXPECT_EQ(blk.dconv_w.value.dims(), (Dims{8, 1, 3, 3}));
  EXPECT_EQ(blk.conv2_w.value.dims(), (Dims{4, 4, 1, 1}));
}

TEST(Affb, PreservesDims) {
  Rng rng(11);
  for (auto v : {FreqVariant::none, FreqVariant::simplified, FreqVariant::complex}) {
    auto blk = make_affb<float>("affb", 4, v, rng);
    EXPECT_EQ(blk.has_sffb, v != FreqVariant::none);
    for (int h : {8, 12, 16})
      for (int w : {8, 12, 16}) {
        auto x = cst(random_tensor<float>({1, 4, h, w}, h + w));
        auto y = affb_forward(x, blk);
        EXPECT_EQ(y.dims(), x.dims());
        for (float e : y.value().storage()) ASSERT_TRUE(std::isfinite(e));
      }
  }
}

TEST(Smb, PyramidDims) {
  Rng rng(12);
  auto smb = make_smb<float>("smb", 4, {64, 128, 256, 512}, rng);
  auto out = smb_forward(cst(random_tensor<float>({1, 1, 64, 64}, 13, 0, 1)), smb);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].dims(), (Dims{1, 64, 64, 64}));
  EXPECT_EQ(out[1].dims(), (Dims{1, 128, 32, 32}));
  EXPECT_EQ(out[2].dims(), (Dims{1, 256, 16, 16}));
  EXPECT_EQ(out[3].dims(), (Dims{1, 512, 8, 8}));
}

TEST(Smb, ConstantImageGivesZeroInterior) {
  Rng rng(14);
  auto smb = make_smb<float>("smb", 4, {4, 8, 16}, rng);
  auto out = smb_forward(cst(Tensor<float>(Dims{1, 1, 16, 16}, 0.6f)), smb);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& t = out[k].value();
    const int m = k == 0 ? 2 : 1;
    for (int c = 0; c < t.c(); ++c)
      for (int i = m; i < t.h() - m; ++i)
        for (int j = m; j < t.w() - m; ++j) EXPECT_EQ(t.at(0, c, i, j), 0.0f) << k;
  }
}

TEST(Smb, ZeroGammaSilencesEveryLevel) {
  Rng rng(15);
  auto smb = make_smb<float>("smb", 8, {4, 8, 16}, rng);
  smb.econv.gamma.value.fill(0.0f);
  for (const auto& level : smb_forward(cst(random_tensor<float>({1, 1, 16, 16}, 16)), smb))
    for (float v : level.value().storage()) EXPECT_EQ(v, 0.0f);
}

TEST(Smb, RejectsIndivisibleDims) {
  Rng rng(17);
  auto smb = make_smb<float>("smb", 4, {4, 8, 16}, rng);
  EXPECT_THROW(smb_forward(cst(Tensor<float>(Dims{1, 1, 10, 16})), smb), ShapeError);
}

TEST(Blocks, VisitOrderIsStable) {
  Rng a(18), b(18);
  auto x = make_affb<float>("blk", 4, FreqVariant::complex, a);
  auto y = make_affb<float>("blk", 4, FreqVariant::complex, b);
  std::vector<std::string> ix, iy;
  visit_parameters(x, [&](const Parameter<float>& p) { ix.push_back(p.id); });
  visit_parameters(y, [&](Parameter<float>& p) { iy.push_back(p.id); });
  EXPECT_EQ(ix, iy);
  EXPECT_EQ(ix.size(), 20u);
}

}  // namespace
}  // namespace saffn
