#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace saffn {

/// Which element type computes the reverse-mode gradient. The finite
/// difference reference is always evaluated in double on the same point
/// and shared by every precision of a run.
enum class Precision { f32, f64 };

std::string to_string(Precision p);
/// Largest accepted relative error: 1e-3 for f32, 1e-6 for f64.
double gradcheck_tolerance(Precision p);

struct GradSuiteOptions {
  std::vector<Precision> precisions{Precision::f32, Precision::f64};
  std::uint64_t seed = 0;
  int seeds = 1;                         // seeds seed, seed+1, ...
  std::size_t max_coords_per_param = 6;  // 0 probes every coordinate
  double step = 1e-2;                    // largest reference stencil spacing
  std::vector<std::string> only;         // empty runs every case
};

struct GradSuiteRow {
  std::string name;
  Precision precision = Precision::f32;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t coords = 0;
  std::string worst;  // "param[index] @ seed"
  bool pass = false;
};

/// Names of every op and block covered, in run order.
std::vector<std::string> gradcheck_case_names();

/// Every case is a scalar readout sum(y * R) of the op output y with a fixed
/// random R. Parameters and inputs are drawn from the seed and rounded to
/// float so both precisions see the same point. The reference derivative is
/// the fourth-order central difference
///   (f(x-2h) - 8 f(x-h) + 8 f(x+h) - f(x+2h)) / 12h
/// evaluated in double at h = step, step/10, step/100 and step/1000, keeping
/// the larger step of whichever adjacent pair agrees best. The error per coordinate is
/// |a - n| / max(|a|, |n|, floor) with floor 1e-8 for f64 and, for f32, 1% of
/// the largest probed |n| in the same tensor (float rounding in a gradient
/// scales with the tensor, not with the coordinate).
std::vector<GradSuiteRow> run_gradcheck_suite(const GradSuiteOptions& options);

/// One line per case and precision with PASS or FAIL.
void write_gradcheck_table(const std::vector<GradSuiteRow>& rows, std::ostream& os);

}  // namespace saffn
