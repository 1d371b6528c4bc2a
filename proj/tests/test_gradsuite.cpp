#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "saffn/gradsuite.hpp"

namespace saffn {
namespace {

TEST(GradSuite, CoversOpsAndBlocks) {
  const auto names = gradcheck_case_names();
  const std::set<std::string> have(names.begin(), names.end());
  EXPECT_EQ(have.size(), names.size());
  for (const char* n : {"conv2d 3x3", "layer_norm_2d", "pixel_shuffle_up", "rfft2_stacked", "irfft2_stacked",
                        "psnr_loss", "edge_conv", "depthwise_edge_conv", "simple_gate", "sffb", "cffb", "affb",
                        "smb"}) {
    EXPECT_TRUE(have.count(n)) << n;
  }
}

TEST(GradSuite, EveryCasePassesOneSeed) {
  GradSuiteOptions o;
  o.seed = 3;
  const auto rows = run_gradcheck_suite(o);
  EXPECT_EQ(rows.size(), 2 * gradcheck_case_names().size());
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass) << r.name << " " << to_string(r.precision) << " " << r.max_rel_error << " " << r.worst;
    EXPECT_LT(r.max_rel_error, r.tolerance);
    EXPECT_GT(r.coords, 0u);
  }
  std::ostringstream os;
  write_gradcheck_table(rows, os);
  EXPECT_NE(os.str().find("PASS"), std::string::npos);
}

TEST(GradSuite, ToleranceByPrecision) {
  EXPECT_EQ(gradcheck_tolerance(Precision::f32), 1e-3);
  EXPECT_EQ(gradcheck_tolerance(Precision::f64), 1e-6);
}

}  // namespace
}  // namespace saffn
