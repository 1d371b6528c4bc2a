#include <gtest/gtest.h>

#include <cmath>

#include "saffn/gradcheck.hpp"
#include "saffn/kernels.hpp"
#include "saffn/ops.hpp"
#include "test_util.hpp"

namespace saffn {
namespace {

using testing::bit_equal;
using testing::max_abs_diff;
using testing::random_tensor;

Var<float> cst(Dims d, std::vector<float> v) { return Var<float>::constant(Tensor<float>(d, std::move(v))); }

TEST(Conv2d, SingleTapProduct) {
  auto y = conv2d(cst({1, 1, 1, 1}, {2}), cst({1, 1, 1, 1}, {3}), Var<float>{}, 1, 0, 1);
  EXPECT_EQ(y.value()[0], 6.0f);
}

TEST(Conv2d, IdentityKernelReproducesInput) {
  auto x = random_tensor<float>({2, 1, 5, 7}, 11);
  Tensor<float> k(Dims{1, 1, 3, 3});
  k.at(0, 0, 1, 1) = 1.0f;
  auto y = conv2d(Var<float>::constant(x), Var<float>::constant(k), Var<float>{}, 1, 1, 1);
  EXPECT_TRUE(bit_equal(y.value(), x));
}

TEST(Conv2d, OnesKernelSumsWindow) {
  auto y = conv2d(cst({1, 1, 2, 2}, {1, 2, 3, 4}), cst({1, 1, 2, 2}, {1, 1, 1, 1}), Var<float>{}, 1, 0, 1);
  ASSERT_EQ(y.dims(), (Dims{1, 1, 1, 1}));
  EXPECT_EQ(y.value()[0], 10.0f);
}

struct Geometry {
  Dims x;
  int c_out, k, stride, pad, groups;
};

class ConvOracle : public ::testing::TestWithParam<Geometry> {};

TEST_P(ConvOracle, KernelsMatchNestedLoops) {
  const auto g = GetParam();
  const Dims wd{g.c_out, g.x.c / g.groups, g.k, g.k};
  auto x = random_tensor<double>(g.x, 1);
  auto w = random_tensor<double>(wd, 2);
  auto b = random_tensor<double>({1, g.c_out, 1, 1}, 3);
  auto geo = kernels::ConvGeometry::make(g.x, wd, g.stride, g.pad, g.groups);
  auto want = testing::naive_conv(x, w, b.storage(), g.stride, g.pad, g.groups);

  Tensor<double> ref(geo.output_dims()), par(geo.output_dims());
  kernels::reference::conv2d_forward(geo, x.data(), w.data(), b.data(), ref.data());
  kernels::parallel::conv2d_forward(geo, x.data(), w.data(), b.data(), par.data());
  EXPECT_LT(max_abs_diff(ref, want), 1e-12);
  EXPECT_LT(max_abs_diff(par, want), 1e-12);

  // Backward kernels against the adjoint identity <conv(x), gy> = <x, conv^T(gy)>.
  auto gy = random_tensor<double>(geo.output_dims(), 4);
  for (int impl = 0; impl < 2; ++impl) {
    Tensor<double> gx(g.x), gw(wd);
    if (impl == 0) {
      kernels::reference::conv2d_backward_input(geo, w.data(), gy.data(), gx.data());
      kernels::reference::conv2d_backward_weight(geo, x.data(), gy.data(), gw.data());
    } else {
      kernels::parallel::conv2d_backward_input(geo, w.data(), gy.data(), gx.data());
      kernels::parallel::conv2d_backward_weight(geo, x.data(), gy.data(), gw.data());
    }
    auto nobias = testing::naive_conv(x, w, {}, g.stride, g.pad, g.groups);
    double lhs = 0, rhs_x = 0, rhs_w = 0;
    for (std::size_t i = 0; i < gy.size(); ++i) lhs += nobias[i] * gy[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs_x += x[i] * gx[i];
    for (std::size_t i = 0; i < w.size(); ++i) rhs_w += w[i] * gw[i];
    EXPECT_NEAR(lhs, rhs_x, 1e-9 * (1 + std::abs(lhs)));
    EXPECT_NEAR(lhs, rhs_w, 1e-9 * (1 + std::abs(lhs)));
  }
  Tensor<double> gb(Dims{1, g.c_out, 1, 1});
  kernels::conv2d_backward_bias(geo, gy.data(), gb.data());
  for (int co = 0; co < g.c_out; ++co) {
    double s = 0;
    for (int n = 0; n < geo.batch; ++n)
      for (int i = 0; i < geo.h_out * geo.w_out; ++i) s += gy.plane(n, co)[i];
    EXPECT_NEAR(gb[co], s, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, ConvOracle,
                         ::testing::Values(Geometry{{1, 1, 5, 5}, 1, 3, 1, 1, 1},
                                           Geometry{{2, 3, 7, 6}, 4, 3, 1, 1, 1},
                                           Geometry{{1, 4, 8, 8}, 6, 1, 1, 0, 1},
                                           Geometry{{2, 3, 9, 8}, 5, 3, 2, 1, 1},
                                           Geometry{{1, 6, 6, 5}, 6, 3, 1, 1, 6},
                                           Geometry{{1, 4, 6, 6}, 6, 3, 1, 1, 2},
                                           Geometry{{1, 2, 1, 1}, 3, 3, 1, 1, 1},
                                           Geometry{{1, 2, 4, 4}, 2, 2, 1, 0, 1}));

TEST(Conv2d, DepthwiseMatchesPerChannelLoop) {
  auto x = random_tensor<float>({1, 3, 8, 8}, 5);
  auto w = random_tensor<float>({3, 1, 3, 3}, 6);
  auto y = conv2d(Var<float>::constant(x), Var<float>::constant(w), Var<float>{}, 1, 1, 3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        double acc = 0;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) {
            if (i + a < 0 || i + a >= 8 || j + b < 0 || j + b >= 8) continue;
            acc += double(x.at(0, c, i + a, j + b)) * w.at(c, 0, a + 1, b + 1);
          }
        EXPECT_NEAR(y.value().at(0, c, i, j), acc, 1e-5);
      }
}

TEST(Conv2d, LinearInInput) {
  auto a = random_tensor<double>({1, 2, 6, 6}, 7);
  auto b = random_tensor<double>({1, 2, 6, 6}, 8);
  auto w = Var<double>::constant(random_tensor<double>({3, 2, 3, 3}, 9));
  Tensor<double> ab(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) ab[i] = 2.0 * a[i] - 0.5 * b[i];
  auto ya = conv2d(Var<double>::constant(a), w, Var<double>{}, 1, 1, 1).value();
  auto yb = conv2d(Var<double>::constant(b), w, Var<double>{}, 1, 1, 1).value();
  auto yab = conv2d(Var<double>::constant(ab), w, Var<double>{}, 1, 1, 1).value();
  for (std::size_t i = 0; i < ya.size(); ++i) EXPECT_NEAR(yab[i], 2.0 * ya[i] - 0.5 * yb[i], 1e-12);
}

TEST(Conv2d, RejectsBadGeometry) {
  auto x = Var<float>::constant(Tensor<float>(Dims{1, 3, 4, 4}));
  EXPECT_THROW(conv2d(x, Var<float>::constant(Tensor<float>(Dims{2, 2, 3, 3})), Var<float>{}, 1, 1, 1),
               ShapeError);
  EXPECT_ANY_THROW(conv2d(x, Var<float>::constant(Tensor<float>(Dims{2, 1, 3, 3})), Var<float>{}, 1, 1, 2));
}

TEST(Elementwise, HadamardAndBroadcast) {
  auto y = hadamard(cst({1, 2, 1, 1}, {2, 3}), cst({1, 2, 1, 1}, {4, 5}));
  EXPECT_EQ(y.value().storage(), (std::vector<float>{8, 15}));
  auto z = add(cst({1, 2, 1, 2}, {1, 2, 3, 4}), cst({1, 2, 1, 1}, {10, 20}));
  EXPECT_EQ(z.value().storage(), (std::vector<float>{11, 12, 23, 24}));
  EXPECT_THROW(add(cst({1, 2, 1, 1}, {1, 2}), cst({1, 3, 1, 1}, {1, 2, 3})), ShapeError);
}

TEST(LayerNorm, NormalisesAcrossChannels) {
  auto x = cst({1, 2, 1, 1}, {1, 3});
  auto y = layer_norm_2d(x, cst({1, 2, 1, 1}, {1, 1}), cst({1, 2, 1, 1}, {0, 0}));
  EXPECT_NEAR(y.value()[0], -1.0f, 1e-6);
  EXPECT_NEAR(y.value()[1], 1.0f, 1e-6);
  auto s = layer_norm_2d(x, cst({1, 2, 1, 1}, {0, 0}), cst({1, 2, 1, 1}, {0.25f, -4}));
  EXPECT_EQ(s.value().storage(), (std::vector<float>{0.25f, -4}));
}

TEST(LayerNorm, ZeroMeanUnitVariancePerSite) {
  auto x = random_tensor<double>({2, 5, 3, 4}, 12, -3, 7);
  auto ones = Var<double>::constant(Tensor<double>(Dims{1, 5, 1, 1}, 1.0));
  auto zeros = Var<double>::constant(Tensor<double>(Dims{1, 5, 1, 1}, 0.0));
  auto y = layer_norm_2d(Var<double>::constant(x), ones, zeros, 1e-300).value();
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) {
        double m = 0, v = 0;
        for (int c = 0; c < 5; ++c) m += y.at(n, c, i, j);
        for (int c = 0; c < 5; ++c) v += y.at(n, c, i, j) * y.at(n, c, i, j);
        EXPECT_NEAR(m / 5, 0.0, 1e-12);
        EXPECT_NEAR(v / 5, 1.0, 1e-12);
      }
}

TEST(PixelShuffle, RearrangesChannelsToBlock) {
  auto y = pixel_shuffle_up(cst({1, 4, 1, 1}, {1, 2, 3, 4}), 2);
  ASSERT_EQ(y.dims(), (Dims{1, 1, 2, 2}));
  EXPECT_EQ(y.value().storage(), (std::vector<float>{1, 2, 3, 4}));
}

TEST(PixelShuffle, DownInvertsUp) {
  auto x = random_tensor<float>({2, 8, 3, 5}, 13);
  auto up = pixel_shuffle_up(Var<float>::constant(x), 2);
  EXPECT_EQ(up.dims(), (Dims{2, 2, 6, 10}));
  EXPECT_TRUE(bit_equal(pixel_shuffle_down(up, 2).value(), x));
}

TEST(Channels, SplitThenConcatIsIdentity) {
  auto x = random_tensor<float>({2, 6, 3, 3}, 14);
  auto [a, b] = channel_split2(Var<float>::constant(x));
  EXPECT_EQ(a.dims().c, 3);
  EXPECT_TRUE(bit_equal(concat_channels(a, b).value(), x));
  EXPECT_THROW(channel_split2(Var<float>::constant(Tensor<float>(Dims{1, 3, 1, 1}))), ShapeError);
}

TEST(Geometry, ReflectPadAndCrop) {
  auto y = reflect_pad(cst({1, 1, 1, 3}, {1, 2, 3}), 0, 2);
  EXPECT_EQ(y.value().storage(), (std::vector<float>{1, 2, 3, 2, 1}));
  EXPECT_EQ(crop(y, 1, 3).value().storage(), (std::vector<float>{1, 2, 3}));
  EXPECT_EQ(reflect_index(-1, 4), 1);
  EXPECT_EQ(reflect_index(4, 4), 2);
  EXPECT_EQ(reflect_index(9, 4), 3);
  EXPECT_EQ(reflect_index(3, 1), 0);
  auto p = avg_pool2(cst({1, 1, 2, 2}, {1, 2, 3, 6}));
  EXPECT_FLOAT_EQ(p.value()[0], 3.0f);
}

TEST(Backward, ProductGradientIsOtherFactor) {
  Tape<double> tape;
  auto x = random_tensor<double>({1, 2, 3, 3}, 15);
  Parameter<double> w("w", random_tensor<double>({1, 2, 3, 3}, 16));
  auto loss = sum(hadamard(tape.param(w), tape.constant(x)));
  tape.backward(loss);
  EXPECT_TRUE(bit_equal(w.grad, x));
}

TEST(Backward, SquareGradient) {
  Tape<double> tape;
  Parameter<double> w("w", Tensor<double>(Dims{1, 1, 1, 1}, 3.0));
  auto v = tape.param(w);
  tape.backward(sum(hadamard(v, v)));
  EXPECT_EQ(w.grad[0], 6.0);
}

TEST(Backward, ParameterGradsAccumulateUntilZeroed) {
  Parameter<double> w("w", Tensor<double>(Dims{1, 1, 1, 1}, 2.0));
  for (int i = 0; i < 2; ++i) {
    Tape<double> tape;
    tape.backward(sum(scale(tape.param(w), 5.0)));
  }
  EXPECT_EQ(w.grad[0], 10.0);
  w.zero_grad();
  EXPECT_EQ(w.grad[0], 0.0);
}

TEST(Backward, RejectsMisuse) {
  Tape<float> tape, other;
  auto v = tape.variable(Tensor<float>(Dims{1, 2, 1, 1}, 1.0f));
  EXPECT_THROW(tape.backward(v), UsageError);
  auto s = other.variable(Tensor<float>(Dims{1, 2, 1, 1}, 1.0f));
  EXPECT_THROW(add(v, s), UsageError);
  EXPECT_THROW(other.backward(sum(v)), UsageError);
}

TEST(Backward, NoGradPathRecordsNothing) {
  Tape<float> tape;
  auto a = tape.constant(Tensor<float>(Dims{1, 1, 2, 2}, 1.0f));
  auto b = relu(add(a, 1.0f));
  EXPECT_FALSE(b.requires_grad());
  EXPECT_EQ(tape.size(), 0u);
}

TEST(FiniteDiff, SumOfSquares) {
  Tensor<double> x(Dims{1, 1, 1, 2}, std::vector<double>{1, 2});
  std::function<Var<double>(const Var<double>&)> f = [](const Var<double>& v) {
    return sum(hadamard(v, v));
  };
  auto r = finite_diff_check<double>(f, x, 1e-3);
  EXPECT_LT(r.max_rel_error, 1e-4);
  EXPECT_EQ(r.coords_checked, 2u);
}

TEST(FiniteDiff, DetectsWrongGradient) {
  // relu's kink sits between the probes, so the central difference sees slope 1/2.
  Tensor<double> x(Dims{1, 1, 1, 1}, std::vector<double>{0.0});
  std::function<Var<double>(const Var<double>&)> f = [](const Var<double>& v) { return sum(relu(v)); };
  EXPECT_GT(finite_diff_check<double>(f, x, 1e-3).max_rel_error, 0.1);
}

TEST(Tensor, RejectsInconsistentData) {
  EXPECT_THROW(Tensor<float>(Dims{1, 1, 2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor<float>(Dims{1, 0, 2, 2}), ShapeError);
  EXPECT_TRUE(Tensor<float>().empty());
}

}  // namespace
}  // namespace saffn
