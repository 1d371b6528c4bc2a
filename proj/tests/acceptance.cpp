// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 5 11     run a subset

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "saffn/checkpoint.hpp"
#include "saffn/cli.hpp"
#include "saffn/data.hpp"
#include "saffn/edge.hpp"
#include "saffn/eval.hpp"
#include "saffn/fourier.hpp"
#include "saffn/gradsuite.hpp"
#include "saffn/network.hpp"
#include "saffn/train.hpp"

namespace {

using namespace saffn;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Tensor<float> uniform_image(Dims d, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t(d);
  for (auto& v : t.storage()) v = static_cast<float>(rng.uniform());
  return t;
}

std::filesystem::path scratch_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("saffn_acceptance_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// 1 ---------------------------------------------------------------------------
Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  GradSuiteOptions o;
  o.seed = 0;
  o.seeds = 20;
  const auto rows = run_gradcheck_suite(o);
  const double secs = seconds_since(t0);
  double worst32 = 0, worst64 = 0;
  std::string failed;
  for (const auto& r : rows) {
    (r.precision == Precision::f32 ? worst32 : worst64) = std::max(
        r.precision == Precision::f32 ? worst32 : worst64, r.max_rel_error);
    if (!r.pass) failed += " " + r.name + "/" + to_string(r.precision);
  }
  const bool ok = failed.empty() && rows.size() == 2 * gradcheck_case_names().size() && secs < 120;
  return {ok, fmt("%zu cases x 2 precisions x 20 seeds, worst f32 %.2e (< 1e-3), f64 %.2e (< 1e-6), %.1f s%s",
                  gradcheck_case_names().size(), worst32, worst64, secs,
                  failed.empty() ? "" : (", failing:" + failed).c_str())};
}

// 2 ---------------------------------------------------------------------------
Outcome fft_oracle() {
  const auto t0 = Clock::now();
  const long double pi = 3.141592653589793238462643383279502884L;
  double dft_err = 0, rt_err = 0, parseval_err = 0;
  for (int h = 1; h <= 12; ++h)
    for (int w = 1; w <= 12; ++w) {
      auto x = uniform_image({1, 1, h, w}, static_cast<std::uint64_t>(h * 100 + w));
      auto s = fft2d_real(x);
      for (int k = 0; k < h; ++k)
        for (int l = 0; l <= w / 2; ++l) {
          std::complex<long double> acc = 0;
          for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
              const long double ph = -2 * pi * ((long double)(k * i % h) / h + (long double)(l * j % w) / w);
              acc += (long double)x.at(0, 0, i, j) * std::complex<long double>(std::cos(ph), std::sin(ph));
            }
          dft_err = std::max({dft_err, std::abs(double(s.real.at(0, 0, k, l)) - double(acc.real())),
                              std::abs(double(s.imag.at(0, 0, k, l)) - double(acc.imag()))});
        }
      auto back = ifft2d_real(s);
      double ex = 0, es = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        rt_err = std::max(rt_err, std::abs(double(back[i]) - x[i]));
        ex += double(x[i]) * x[i];
      }
      for (int k = 0; k < h; ++k)
        for (int l = 0; l <= w / 2; ++l) {
          const double mult = (l == 0 || (w % 2 == 0 && l == w / 2)) ? 1.0 : 2.0;
          const double re = s.real.at(0, 0, k, l), im = s.imag.at(0, 0, k, l);
          es += mult * (re * re + im * im);
        }
      parseval_err = std::max(parseval_err, std::abs(es / (h * w) - ex) / ex);
    }
  const double secs = seconds_since(t0);
  const bool ok = dft_err < 1e-4 && rt_err < 1e-5 && parseval_err < 1e-4 && secs < 60;
  return {ok, fmt("sizes 1..12 squared: DFT max-abs %.2e (< 1e-4), roundtrip %.2e (< 1e-5), Parseval rel %.2e "
                  "(< 1e-4), %.2f s",
                  dft_err, rt_err, parseval_err, secs)};
}

// 3 ---------------------------------------------------------------------------
Outcome edge_analytics() {
  const auto t0 = Clock::now();
  const int n = 12;
  Tensor<float> ramp(Dims{1, 1, n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ramp.at(0, 0, i, j) = static_cast<float>(i);
  auto bank = make_kernel_bank<float>(4, 1, 1.0f);
  auto y = edge_conv(Var<float>::constant(ramp), bank).value();
  double ramp_err = 0;
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j) ramp_err = std::max(ramp_err, std::abs(double(y.at(0, 0, i, j)) - 8.0));

  double const_max = 0;
  for (int kinds : {2, 4, 8}) {
    auto b = make_kernel_bank<float>(kinds, 8, 1.3f);
    for (float level : {0.0f, 0.37f, 1.0f}) {
      auto c = Tensor<float>(Dims{1, 2, n, n}, level);
      auto r = edge_conv(Var<float>::constant(c), b).value();
      auto d = depthwise_edge_conv(Var<float>::constant(Tensor<float>(Dims{1, 8, n, n}, level)), b).value();
      for (int ch = 0; ch < 8; ++ch)
        for (int i = 1; i < n - 1; ++i)
          for (int j = 1; j < n - 1; ++j)
            const_max = std::max({const_max, double(std::abs(r.at(0, ch, i, j))), double(std::abs(d.at(0, ch, i, j)))});
    }
  }

  bool linear = true;
  auto x = uniform_image({1, 3, n, n}, 5);
  for (int kinds : {2, 4, 8}) {
    auto b1 = make_kernel_bank<float>(kinds, 8, 1.0f);
    auto b2 = make_kernel_bank<float>(kinds, 8, 2.0f);
    auto y1 = edge_conv(Var<float>::constant(x), b1).value();
    auto y2 = edge_conv(Var<float>::constant(x), b2).value();
    for (std::size_t i = 0; i < y1.size(); ++i) linear = linear && y2[i] == 2.0f * y1[i];
  }
  const double secs = seconds_since(t0);
  const bool ok = ramp_err <= 1e-6 && const_max == 0.0 && linear && secs < 10;
  return {ok, fmt("ramp response error %.1e (<= 1e-6), constant interior max %.1e (== 0) for kinds 2/4/8, "
                  "gamma linearity %s, %.2f s",
                  ramp_err, const_max, linear ? "bit-exact" : "BROKEN", secs)};
}

// 4 ---------------------------------------------------------------------------
Outcome identity_at_init() {
  const auto t0 = Clock::now();
  const auto model = build<float>(NetworkConfig{}, 2024);
  const std::vector<std::pair<int, int>> sizes = {{16, 16}, {1, 1},   {17, 23}, {5, 40},  {32, 32},
                                                  {31, 33}, {48, 20}, {3, 7},   {64, 64}, {100, 100}};
  double worst = 0;
  int odd = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const auto [h, w] = sizes[k];
    odd += (h % 16 != 0 || w % 16 != 0);
    auto x = uniform_image({1, 1, h, w}, 40 + k);
    auto y = infer(model, x);
    if (y.dims() != x.dims()) return {false, "output dims differ from input at " + std::to_string(h) + "x" + std::to_string(w)};
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(double(y[i]) - x[i]));
  }
  const double secs = seconds_since(t0);
  const bool ok = worst == 0.0 && secs < 60;
  return {ok, fmt("default config, %zu inputs (%d not multiples of 16), max |y - x| = %g, %.1f s", sizes.size(), odd,
                  worst, secs)};
}

// 5 ---------------------------------------------------------------------------
Outcome macs_reproduction() {
  const auto t0 = Clock::now();
  const auto r = count_macs(NetworkConfig{}, 256, 256);
  std::uint64_t sum = 0;
  for (const auto& row : r.rows) sum += row.macs;
  const double secs = seconds_since(t0);
  const bool ok = r.total >= 69'100'000'000ull && r.total <= 103'600'000'000ull && sum == r.total && secs < 1;
  return {ok, fmt("default config at 256x256: %.3fG (window [69.1G, 103.6G], reported 86.36G), %zu rows sum %s "
                  "the total, %.3f s",
                  r.total / 1e9, r.rows.size(), sum == r.total ? "exactly to" : "NOT to", secs)};
}

// 6 ---------------------------------------------------------------------------
Outcome noise_metric_consistency() {
  const auto t0 = Clock::now();
  const Tensor<float> gray(Dims{1, 1, 256, 256}, 0.5f);
  std::vector<double> means;
  for (double sigma : {25.0, 50.0, 75.0, 100.0}) {
    double m = 0;
    for (std::uint64_t s = 0; s < 10; ++s) m += psnr(add_gaussian_noise(gray, sigma, 1000 + s), gray) / 10;
    means.push_back(m);
  }
  const double oracle = 20 * std::log10(255.0 / 50.0);
  const bool ordered = means[0] > means[1] && means[1] > means[2] && means[2] > means[3];
  const double secs = seconds_since(t0);
  const bool ok = std::abs(means[1] - oracle) <= 0.3 && ordered && secs < 60;
  return {ok, fmt("sigma 50 over 10 seeds: %.3f dB (oracle %.3f +- 0.3); sigma 25/50/75/100: %.2f > %.2f > %.2f > "
                  "%.2f %s, %.1f s",
                  means[1], oracle, means[0], means[1], means[2], means[3], ordered ? "strict" : "NOT ordered", secs)};
}

// 7 ---------------------------------------------------------------------------
Outcome overfit_capacity() {
  const auto t0 = Clock::now();
  CorpusSpec spec;
  spec.count = 1;
  spec.size = 64;
  spec.seed = 7;
  const double sigma = 25.0;
  const auto pairs = make_pairs(generate_corpus(spec), sigma, 7);
  auto model = build<float>(tiny_config(16, {1, 1}, 1, {1, 1}), 7);
  TrainConfig tc;
  tc.total_iters = 2000;
  tc.lr_step = 100;
  tc.batch = 1;
  tc.crop = 64;
  tc.seed = 7;
  const auto log = train(model, pairs, tc);
  const double final_psnr = psnr(infer(model, pairs[0].noisy), pairs[0].clean);
  double best = 0;
  int reached = -1;
  for (const auto& r : log) {
    best = std::max(best, -r.loss);
    if (reached < 0 && -r.loss >= 40.0) reached = r.iter;
  }
  // Mean loss per 100-iteration window; a violation is a window above its predecessor.
  std::vector<double> windows;
  for (std::size_t i = 0; i + 100 <= log.size(); i += 100) {
    double m = 0;
    for (std::size_t j = i; j < i + 100; ++j) m += log[j].loss / 100;
    windows.push_back(m);
  }
  int violations = 0;
  for (std::size_t i = 1; i < windows.size(); ++i) violations += windows[i] > windows[i - 1];
  const int comparisons = static_cast<int>(windows.size()) - 1;
  const double secs = seconds_since(t0);
  const bool ok = final_psnr >= 40.0 && violations <= 0.05 * comparisons && secs < 900;
  return {ok, fmt("width 16 [1,1]+1+[1,1], one 64x64 pair at sigma %.0f: final training PSNR %.2f dB (>= 40), "
                  "best %.2f, first >= 40 at iter %d; window violations %d/%d (<= 5%%), %.0f s",
                  sigma, final_psnr, best, reached, violations, comparisons, secs)};
}

// 8 ---------------------------------------------------------------------------
Outcome desk_scale_gain() {
  const auto t0 = Clock::now();
  CorpusSpec train_spec;
  train_spec.count = 200;
  train_spec.size = 64;
  train_spec.seed = 11;
  CorpusSpec eval_spec = train_spec;
  eval_spec.count = 20;
  eval_spec.seed = 12;
  const double sigma = 25.0;
  const auto train_pairs = make_pairs(generate_corpus(train_spec), sigma, 11);
  const auto eval_pairs = make_pairs(generate_corpus(eval_spec), sigma, 12);
  auto model = build<float>(tiny_config(16, {1, 1, 1, 1}, 2, {1, 1, 1, 1}), 11);
  TrainConfig tc;
  tc.total_iters = 5000;
  tc.batch = 4;
  tc.crop = 64;
  tc.seed = 11;
  train(model, train_pairs, tc);
  const auto r = evaluate(model, eval_pairs, sigma);
  const double gain = r.mean_psnr - r.mean_input_psnr;
  const double secs = seconds_since(t0);
  const bool ok = gain >= 5.0 && secs < 7200;
  return {ok, fmt("width 16 [1,1,1,1]+2+[1,1,1,1], 5000 iters on 200 64x64 pairs at sigma 25: held-out %.2f dB vs "
                  "noisy %.2f dB (oracle %.2f), gain %.2f dB (>= 5), %.0f s",
                  r.mean_psnr, r.mean_input_psnr, 20 * std::log10(255.0 / 25.0), gain, secs)};
}

// 9 ---------------------------------------------------------------------------
Outcome ablation_harness() {
  const auto t0 = Clock::now();
  const auto dir = scratch_dir("ablate");
  const auto report = (dir / "ablate.tsv").string();
  std::ostringstream out, err;
  const int rc = run_cli({"ablate", "--report", report}, out, err);
  if (rc != kExitOk) return {false, "ablate exited " + std::to_string(rc) + ": " + err.str()};
  std::ifstream in(report);
  std::string line;
  std::getline(in, line);
  const bool header_ok = line == "table\tvariant\tsmb\tfreq\tkinds\tparams\tmacs\tpsnr\tssim\tinput_psnr\tfinal_loss";
  std::set<std::string> seen;
  bool rows_ok = true;
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
    rows_ok = rows_ok && f.size() == 11 && std::isfinite(std::stod(f[7])) && std::stod(f[8]) <= 1.0;
    seen.insert(f[0] + "/" + f[1]);
    ++rows;
  }
  const std::set<std::string> want = {"modules/baseline", "modules/+SMB", "modules/+SFFB", "modules/+SMB+SFFB",
                                      "kinds/2", "kinds/4", "kinds/8", "freq/SFFB", "freq/CFFB"};
  int directions = 0;
  std::istringstream text(out.str());
  std::string dirs;
  while (std::getline(text, line)) {
    if (line.rfind("direction ", 0) == 0) {
      ++directions;
      dirs += "; " + line.substr(10);
    }
  }
  std::filesystem::remove_all(dir);
  const double secs = seconds_since(t0);
  const bool ok = header_ok && rows_ok && seen == want && rows == 9 && directions > 0;
  return {ok, fmt("%d report rows (modules x4, kinds x3, freq x2), header %s, %.0f s%s", rows,
                  header_ok ? "ok" : "BAD", secs, dirs.c_str())};
}

// 10 --------------------------------------------------------------------------
Outcome statistics_oracle() {
  const auto t0 = Clock::now();
  const auto fixture = paired_t_test({1, 2, 3}, {1.1, 2.2, 2.9});
  boost::math::students_t dist2(2);
  const double p_oracle = 2 * boost::math::cdf(boost::math::complement(dist2, std::abs(fixture.t)));
  double p_err = std::abs(fixture.p - p_oracle);
  for (double t : {0.1, 0.9, 2.5, 4.0, 9.0})
    for (double dof : {1.0, 3.0, 11.0, 99.0}) {
      boost::math::students_t d(dof);
      p_err = std::max(p_err, std::abs(student_t_two_sided_p(t, dof) -
                                       2 * boost::math::cdf(boost::math::complement(d, t))));
    }
  Rng rng(10);
  std::vector<double> a, b;
  for (int i = 0; i < 200; ++i) {
    const double base = rng.uniform(24, 32);
    a.push_back(base + 0.4 * rng.normal());
    b.push_back(base + 0.3 + 0.4 * rng.normal());
  }
  const auto big = paired_t_test(a, b);
  const double secs = seconds_since(t0);
  const bool ok = std::abs(fixture.t - 0.756) <= 1e-3 && p_err <= 1e-6 && big.p < 0.01;
  return {ok, fmt("fixture t = %.4f (0.756 +- 1e-3), p = %.4f; max p error vs Student-t oracle %.1e (<= 1e-6); "
                  "n = 200, effect 0.3: t = %.2f, p = %.1e (< 0.01), %.3f s",
                  fixture.t, fixture.p, p_err, big.t, big.p, secs)};
}

// 11 --------------------------------------------------------------------------
Outcome determinism_persistence() {
  const auto t0 = Clock::now();
  const auto dir = scratch_dir("persist");
  CorpusSpec spec;
  spec.count = 4;
  spec.size = 32;
  const auto pairs = make_pairs(generate_corpus(spec), 25, 3);
  const auto cfg = tiny_config(8, {1, 1}, 1, {1, 1});
  TrainConfig tc;
  tc.total_iters = 20;
  tc.lr_step = 5;
  tc.batch = 2;
  tc.crop = 32;
  tc.seed = 5;
  const auto run = [&](Model<float>& m) {
    std::string s;
    for (const auto& r : train(m, pairs, tc)) {
      const auto line = format_log_line(r);
      s += line.substr(0, line.rfind('\t')) + "\n";
    }
    return s;
  };
  auto m1 = build<float>(cfg, 5), m2 = build<float>(cfg, 5);
  const bool logs_equal = run(m1) == run(m2);

  const auto path = (dir / "model.bin").string();
  save_checkpoint(path, m1, nullptr, 20);
  const auto loaded = load_checkpoint(path);
  const auto x = uniform_image({2, 1, 27, 35}, 6);
  const auto y0 = infer(m1, x), y1 = infer(loaded.model, x);
  const bool roundtrip = y0.storage() == y1.storage();

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  int rejected = 0, tried = 0;
  const auto cut = (dir / "cut.bin").string();
  for (std::size_t len = 0; len < bytes.size(); len += std::max<std::size_t>(1, bytes.size() / 97)) {
    ++tried;
    std::ofstream(cut, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(len));
    try {
      (void)load_checkpoint(cut);
    } catch (const FormatError&) {
      ++rejected;
    }
  }
  std::filesystem::remove_all(dir);
  const double secs = seconds_since(t0);
  const bool ok = logs_equal && roundtrip && rejected == tried;
  return {ok, fmt("same-seed loss logs %s; save/load/forward %s; truncated checkpoints rejected %d/%d, %.1f s",
                  logs_equal ? "bit-identical" : "DIFFER", roundtrip ? "bit-identical" : "DIFFERS", rejected, tried,
                  secs)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "gradient correctness", gradient_correctness},
      {2, "FFT oracle equivalence", fft_oracle},
      {3, "edge-kernel analytics", edge_analytics},
      {4, "identity at initialization", identity_at_init},
      {5, "MACs reproduction", macs_reproduction},
      {6, "noise/metric consistency", noise_metric_consistency},
      {7, "overfit capacity", overfit_capacity},
      {8, "desk-scale denoising gain", desk_scale_gain},
      {9, "ablation harness", ablation_harness},
      {10, "statistics oracle", statistics_oracle},
      {11, "determinism and persistence", determinism_persistence},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
