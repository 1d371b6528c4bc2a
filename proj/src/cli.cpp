#include "saffn/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "saffn/checkpoint.hpp"
#include "saffn/data.hpp"
#include "saffn/eval.hpp"
#include "saffn/gradsuite.hpp"
#include "saffn/network.hpp"
#include "saffn/train.hpp"

namespace saffn {

namespace {

namespace fs = std::filesystem;

std::string format_value(const std::string& v) {
  std::string q = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') q += '\\';
    q += c;
  }
  return q + "\"";
}
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(std::uint64_t v) { return std::to_string(v); }
std::string format_value(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}
template <typename V>
std::string format_value(const std::vector<V>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_value(v[i]);
  return s + "]";
}

// CLI11 app plus the echo of every registered value.
class Command {
 public:
  Command(std::string name, std::string description)
      : app_(std::move(description), name), name_(std::move(name)) {
    app_.set_config("--config", "", "Read flat \"key = value\" settings from FILE");
    app_.allow_config_extras(CLI::config_extras_mode::error);
    app_.set_help_flag("-h,--help", "Show this help");
  }

  template <typename V>
  CLI::Option* add(const std::string& key, V& value, const std::string& help) {
    echo_.push_back({key, [&value] { return format_value(value); }});
    auto* opt = app_.add_option("--" + key, value, help);
    opt->default_str(format_value(value));
    return opt;
  }

  CLI::App& app() { return app_; }

  void echo(std::ostream& os) const {
    os << "# saffn " << name_ << " resolved config\n";
    for (const auto& e : echo_) os << e.key << " = " << e.fmt() << "\n";
    os << "# end config\n";
  }

 private:
  struct Echo {
    std::string key;
    std::function<std::string()> fmt;
  };
  CLI::App app_;
  std::string name_;
  std::vector<Echo> echo_;
};

struct NetworkFlags {
  int width = 64;
  std::vector<int> enc_blocks{2, 2, 4, 8};
  int mid_blocks = 12;
  std::vector<int> dec_blocks{2, 2, 2, 2};
  int kinds = 4;
  std::string freq = "simplified";
  bool smb = true;
  int in_channels = 1;

  void attach(Command& cmd) {
    cmd.add("width", width, "Base channel width");
    cmd.add("enc-blocks", enc_blocks, "AFFB count per encoder level")->delimiter(',');
    cmd.add("mid-blocks", mid_blocks, "AFFB count in the bottleneck");
    cmd.add("dec-blocks", dec_blocks, "AFFB count per decoder level, full resolution first")
        ->delimiter(',');
    cmd.add("kinds", kinds, "Edge stencil kinds (2, 4 or 8)");
    cmd.add("freq", freq, "Frequency branch: none, simplified (sffb) or complex (cffb)");
    cmd.add("smb", smb, "Use the structure modelling block");
    cmd.add("in-channels", in_channels, "Image channels");
  }

  [[nodiscard]] NetworkConfig config() const {
    NetworkConfig c;
    c.width = width;
    c.enc_blocks = enc_blocks;
    c.mid_blocks = mid_blocks;
    c.dec_blocks = dec_blocks;
    c.kernel_kinds = kinds;
    c.freq_variant = parse_freq_variant(freq);
    c.use_smb = smb;
    c.in_channels = in_channels;
    c.validate();
    return c;
  }
};

struct CorpusFlags {
  CorpusSpec spec;

  void attach(Command& cmd, const std::string& prefix = "") {
    cmd.add(prefix + "count", spec.count, "Number of images");
    cmd.add(prefix + "size", spec.size, "Image side in pixels");
    cmd.add(prefix + "cell-pitch", spec.cell_pitch, "Solar-cell grid period in pixels");
    cmd.add(prefix + "line-width", spec.line_width, "Grid line thickness in pixels");
    cmd.add(prefix + "illum-lo", spec.illum_lo, "Lowest illumination level");
    cmd.add(prefix + "illum-hi", spec.illum_hi, "Highest illumination level");
    cmd.add(prefix + "low-light", spec.low_light_fraction, "Share of columns under shadow");
    cmd.add(prefix + "star-density", spec.star_density, "Star probability per sky pixel");
  }
};

// Noise seeds stored in a manifest come from a stream disjoint from the scenes.
std::uint64_t manifest_noise_seed(std::uint64_t corpus_seed, int index) {
  return Rng::derive(~corpus_seed, static_cast<std::uint64_t>(index)).next_u64();
}

std::vector<ImagePair> load_dataset(const std::string& manifest, double sigma) {
  const auto entries = read_manifest(manifest);
  if (entries.empty()) throw FormatError(manifest + ": manifest lists no images");
  const fs::path base = fs::path(manifest).parent_path();
  std::vector<ImagePair> pairs;
  for (const auto& e : entries) {
    fs::path p(e.path);
    if (p.is_relative()) p = base / p;
    pairs.push_back(make_pair(load_pgm(p.string()), sigma, e.seed));
  }
  return pairs;
}

std::vector<ImagePair> synthetic_dataset(const CorpusSpec& spec, double sigma) {
  std::vector<ImagePair> pairs;
  for (int i = 0; i < spec.count; ++i) {
    pairs.push_back(make_pair(generate_image(spec, i), sigma, manifest_noise_seed(spec.seed, i)));
  }
  return pairs;
}

int parse(Command& cmd, const std::vector<std::string>& args, std::ostream& out,
          std::ostream& err) {
  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    cmd.app().parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << cmd.app().help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "saffn " << args.front() << ": " << e.what() << "\n";
    return kExitUsage;
  }
  cmd.echo(out);
  return -1;
}

// ---- synth -----------------------------------------------------------------

int cmd_synth(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd("synth", "Write a synthetic spacecraft corpus as PGM files plus a manifest");
  CorpusFlags corpus;
  std::string dir;
  corpus.attach(cmd);
  cmd.add("seed", corpus.spec.seed, "Corpus seed");
  cmd.add("out-dir", dir, "Output directory")->required();
  if (int rc = parse(cmd, args, out, err); rc >= 0) return rc;
  corpus.spec.validate();

  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < corpus.spec.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04d.pgm", i);
    save_pgm(generate_image(corpus.spec, i), (fs::path(dir) / name).string());
    entries.push_back({i, name, manifest_noise_seed(corpus.spec.seed, i)});
  }
  const std::string manifest = (fs::path(dir) / "manifest.tsv").string();
  write_manifest(manifest, entries);
  out << "wrote " << entries.size() << " images and " << manifest << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd("train", "Train a denoiser on a manifest of clean PGM images");
  NetworkFlags net;
  TrainConfig tc;
  std::string data, ckpt, log_path, resume;
  double sigma = 25.0;
  int print_every = 100;
  net.attach(cmd);
  cmd.add("seed", tc.seed, "Initialisation and sampling seed");
  cmd.add("data", data, "Manifest of clean training images");
  cmd.add("sigma", sigma, "Noise level on the 0-255 scale");
  cmd.add("iters", tc.total_iters, "Total iterations (0 saves the initial model)");
  cmd.add("lr", tc.lr0, "Initial learning rate");
  cmd.add("eta-min", tc.eta_min, "Final learning rate");
  cmd.add("lr-step", tc.lr_step, "Iterations between learning-rate updates");
  cmd.add("beta1", tc.beta1, "AdamW beta1");
  cmd.add("beta2", tc.beta2, "AdamW beta2");
  cmd.add("weight-decay", tc.weight_decay, "AdamW decoupled weight decay");
  cmd.add("batch", tc.batch, "Patches per iteration");
  cmd.add("crop", tc.crop, "Patch side in pixels");
  cmd.add("checkpoint-every", tc.checkpoint_every, "Save every N iterations (0 disables)");
  cmd.add("ckpt", ckpt, "Checkpoint to write")->required();
  cmd.add("log", log_path, "Loss log path (default: <ckpt>.log)");
  cmd.add("resume", resume, "Continue from this checkpoint");
  cmd.add("print-every", print_every, "Echo every Nth log line (0 silences)");
  if (int rc = parse(cmd, args, out, err); rc >= 0) return rc;

  const NetworkConfig config = net.config();
  tc.checkpoint_path = ckpt;
  {
    TrainConfig check = tc;
    check.total_iters = std::max(1, tc.total_iters);
    check.validate();
  }
  if (tc.total_iters > 0 && data.empty()) throw ConfigError("--data is required when --iters > 0");
  if (!resume.empty() && !fs::exists(resume)) throw ConfigError("--resume: no such file " + resume);
  if (log_path.empty()) log_path = ckpt + ".log";

  Model<float> model = build<float>(config, tc.seed);
  TrainState state = initial_train_state(model, tc);
  if (!resume.empty()) {
    Checkpoint c = load_checkpoint(resume);
    if (!(c.model.config == config)) {
      throw ConfigError("--resume: checkpoint holds " + c.model.config.fingerprint() +
                        " but the flags describe " + config.fingerprint());
    }
    model = std::move(c.model);
    state.optim = c.optim ? std::move(*c.optim) : OptimState<float>::init(model.parameters());
    if (c.rng) state.rng.set_state(*c.rng);
    state.iteration = c.iteration;
  }
  out << "model " << config.fingerprint() << " with " << model.parameter_count()
      << " parameters\n";

  if (tc.total_iters > 0 && state.iteration < static_cast<std::uint64_t>(tc.total_iters)) {
    const auto pairs = load_dataset(data, sigma);
    std::ofstream log(log_path, resume.empty() ? std::ios::trunc : std::ios::app);
    if (!log) throw FormatError("cannot open log " + log_path);
    const TrainLogSink sink = [&](const TrainRecord& r) {
      const std::string line = format_log_line(r);
      log << line << "\n";
      if (print_every > 0 && (r.iter % print_every == 0 || r.iter == tc.total_iters)) {
        out << line << "\n" << std::flush;
      }
    };
    train_loop(model, pairs, tc, state, sink);
  }
  save_checkpoint(ckpt, model, &state.optim, state.iteration, &state.rng);
  out << "saved " << ckpt << " at iteration " << state.iteration << "\n";
  return kExitOk;
}

// ---- denoise ---------------------------------------------------------------

void dump_features(const std::string& dir, const std::string& stage, const Tensor<float>& t) {
  for (int c = 0; c < t.c(); ++c) {
    const float* p = t.plane(0, c);
    const std::size_t n = static_cast<std::size_t>(t.h()) * t.w();
    const auto [lo, hi] = std::minmax_element(p, p + n);
    Tensor<float> img(Dims{1, 1, t.h(), t.w()});
    const float span = *hi - *lo;
    for (std::size_t i = 0; i < n; ++i) img[i] = span > 0.0f ? (p[i] - *lo) / span : 0.0f;
    char name[128];
    std::snprintf(name, sizeof name, "%s_c%03d.pgm", stage.c_str(), c);
    save_pgm(img, (fs::path(dir) / name).string());
  }
}

int cmd_denoise(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd("denoise", "Denoise one PGM image with a trained checkpoint");
  std::string ckpt, in, dst, features;
  std::uint64_t seed = 0;
  cmd.add("seed", seed, "Unused; accepted for uniformity");
  cmd.add("ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  cmd.add("in", in, "Noisy input PGM")->required()->check(CLI::ExistingFile);
  cmd.add("out", dst, "Output PGM")->required();
  cmd.add("dump-features", features, "Write every stage's feature maps as PGMs into this directory");
  if (int rc = parse(cmd, args, out, err); rc >= 0) return rc;

  const Checkpoint c = load_checkpoint(ckpt);
  const Tensor<float> noisy = load_pgm(in);
  if (c.model.config.in_channels != 1) {
    throw ConfigError("--ckpt: model expects " + std::to_string(c.model.config.in_channels) +
                      " channels but PGM input has 1");
  }
  FeatureSink<float> sink;
  std::size_t stages = 0;
  if (!features.empty()) {
    fs::create_directories(features);
    sink = [&](const std::string& stage, const Tensor<float>& t) {
      dump_features(features, stage, t);
      ++stages;
    };
  }
  const Tensor<float> clean = infer(c.model, noisy, features.empty() ? nullptr : &sink);
  save_pgm(clean, dst);
  out << "wrote " << dst << "\n";
  if (!features.empty()) out << "dumped " << stages << " stages into " << features << "\n";
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

int cmd_eval(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd("eval", "Evaluate a checkpoint on a manifest of clean images");
  std::string ckpt, data, report, kv;
  double sigma = 25.0;
  int runtime_size = 0;
  std::uint64_t seed = 0;
  cmd.add("seed", seed, "Unused; the manifest fixes the noise");
  cmd.add("ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  cmd.add("data", data, "Manifest of clean images")->required()->check(CLI::ExistingFile);
  cmd.add("sigma", sigma, "Noise level on the 0-255 scale");
  cmd.add("report", report, "Write the text report here as well");
  cmd.add("kv", kv, "Write the key-value report here");
  cmd.add("runtime-size", runtime_size, "Also time forwards on a square input of this side (0 skips)");
  if (int rc = parse(cmd, args, out, err); rc >= 0) return rc;

  const Checkpoint c = load_checkpoint(ckpt);
  const auto pairs = load_dataset(data, sigma);
  const EvalReport r = evaluate(c.model, pairs, sigma);
  write_report_text(r, out);
  if (!report.empty()) {
    std::ofstream f(report);
    write_report_text(r, f);
    if (!f) throw FormatError("cannot write " + report);
  }
  if (!kv.empty()) {
    std::ofstream f(kv);
    write_report_kv(r, f);
    if (!f) throw FormatError("cannot write " + kv);
  }
  if (runtime_size > 0) {
    out << "runtime " << runtime_size << "x" << runtime_size << " median ms: "
        << measure_runtime_ms(c.model, runtime_size, runtime_size) << "\n";
  }
  return kExitOk;
}

// ---- gradcheck -------------------------------------------------------------

int cmd_gradcheck(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd("gradcheck", "Finite-difference check of every op and block");
  GradSuiteOptions o;
  std::string precision = "both";
  cmd.add("seed", o.seed, "First seed");
  cmd.add("seeds", o.seeds, "Number of consecutive seeds");
  cmd.add("coords", o.max_coords_per_param, "Probed coordinates per tensor (0 probes all)");
  cmd.add("step", o.step, "Largest reference stencil spacing");
  cmd.add("precision", precision, "f32, f64 or both");
  cmd.add("case", o.only, "Restrict to these case names (repeatable)");
  if (int rc = parse(cmd, args, out, err); rc >= 0) return rc;

  if (precision == "f32") {
    o.precisions = {Precision::f32};
  } else if (precision == "f64") {
    o.precisions = {Precision::f64};
  } else if (precision != "both") {
    throw ConfigError("--precision: expected f32, f64 or both, got '" + precision + "'");
  }
  const auto rows = run_gradcheck_suite(o);
  write_gradcheck_table(rows, out);
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.pass; });
  out << (failed == 0 ? "all cases PASS" : std::to_string(failed) + " case(s) FAIL") << "\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

// ---- macs ------------------------------------------------------------------

void write_macs(const MacsReport& r, std::ostream& os) {
  std::size_t width = 5;
  for (const auto& row : r.rows) width = std::max(width, row.block.size());
  os << "MACs at " << r.h << "x" << r.w << "\n";
  os << std::left << std::setw(static_cast<int>(width)) << "block" << std::right
     << std::setw(18) << "macs" << std::setw(12) << "G" << "\n";
  const auto line = [&](const std::string& name, std::uint64_t m) {
    os << std::left << std::setw(static_cast<int>(width)) << name << std::right << std::setw(18)
       << m << std::setw(12) << std::fixed << std::setprecision(4)
       << static_cast<double>(m) / 1e9 << "\n";
  };
  for (const auto& row : r.rows) line(row.block, row.macs);
  line("total", r.total);
  os.unsetf(std::ios::floatfield);
}

int cmd_macs(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd("macs", "Per-block multiply-accumulate count");
  NetworkFlags net;
  int size = 256;
  int size_w = 0;
  std::uint64_t seed = 0;
  net.attach(cmd);
  cmd.add("seed", seed, "Unused; counting is exact");
  cmd.add("size", size, "Input height (and width unless --size-w)");
  cmd.add("size-w", size_w, "Input width (0 means --size)");
  if (int rc = parse(cmd, args, out, err); rc >= 0) return rc;

  const MacsReport r = count_macs(net.config(), size, size_w > 0 ? size_w : size);
  out << macs_formula() << "\n";
  write_macs(r, out);
  return kExitOk;
}

// ---- ablate ----------------------------------------------------------------

struct AblationRun {
  NetworkConfig config;
  std::size_t params = 0;
  std::uint64_t macs = 0;
  double psnr = 0.0;
  double ssim = 0.0;
  double input_psnr = 0.0;
  double final_loss = 0.0;
};

struct AblationRow {
  std::string table;
  std::string variant;
  const AblationRun* run = nullptr;
};

int cmd_ablate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Command cmd("ablate", "Desk-scale module, kernel-kind and frequency-variant ablations");
  NetworkFlags net;
  net.width = 8;
  net.enc_blocks = {1, 1};
  net.mid_blocks = 1;
  net.dec_blocks = {1, 1};
  TrainConfig tc;
  tc.total_iters = 300;
  tc.lr_step = 50;
  tc.batch = 2;
  tc.crop = 32;
  CorpusFlags train_corpus, eval_corpus;
  train_corpus.spec.count = 16;
  train_corpus.spec.size = 32;
  eval_corpus.spec.count = 4;
  eval_corpus.spec.size = 32;
  std::string data, eval_data, report;
  double sigma = 25.0;
  int macs_size = 256;
  net.attach(cmd);
  cmd.add("seed", tc.seed, "Seed for corpora, initialisation and sampling");
  cmd.add("data", data, "Training manifest (default: synthesise)");
  cmd.add("eval-data", eval_data, "Held-out manifest (default: synthesise)");
  train_corpus.attach(cmd, "train-");
  eval_corpus.attach(cmd, "eval-");
  cmd.add("sigma", sigma, "Noise level on the 0-255 scale");
  cmd.add("iters", tc.total_iters, "Iterations per variant");
  cmd.add("lr", tc.lr0, "Initial learning rate");
  cmd.add("eta-min", tc.eta_min, "Final learning rate");
  cmd.add("lr-step", tc.lr_step, "Iterations between learning-rate updates");
  cmd.add("batch", tc.batch, "Patches per iteration");
  cmd.add("crop", tc.crop, "Patch side in pixels");
  cmd.add("macs-size", macs_size, "Input side for the MACs column");
  cmd.add("report", report, "Tab-separated report path");
  if (int rc = parse(cmd, args, out, err); rc >= 0) return rc;

  const NetworkConfig full = net.config();
  tc.validate();
  train_corpus.spec.seed = tc.seed;
  eval_corpus.spec.seed = tc.seed + 1;
  train_corpus.spec.validate();
  eval_corpus.spec.validate();
  const auto train_pairs =
      data.empty() ? synthetic_dataset(train_corpus.spec, sigma) : load_dataset(data, sigma);
  const auto eval_pairs = eval_data.empty() ? synthetic_dataset(eval_corpus.spec, sigma)
                                            : load_dataset(eval_data, sigma);

  std::map<std::string, std::unique_ptr<AblationRun>> runs;
  const auto run = [&](NetworkConfig c) -> const AblationRun* {
    c.validate();
    auto& slot = runs[c.fingerprint()];
    if (slot) return slot.get();
    slot = std::make_unique<AblationRun>();
    slot->config = c;
    Model<float> model = build<float>(c, tc.seed);
    const auto log = train(model, train_pairs, tc);
    const EvalReport r = evaluate(model, eval_pairs, sigma);
    slot->params = model.parameter_count();
    slot->macs = count_macs(c, macs_size, macs_size).total;
    slot->psnr = r.mean_psnr;
    slot->ssim = r.mean_ssim;
    slot->input_psnr = r.mean_input_psnr;
    slot->final_loss = log.empty() ? 0.0 : log.back().loss;
    out << "trained " << c.fingerprint() << ": psnr " << std::fixed << std::setprecision(3)
        << r.mean_psnr << " dB\n" << std::defaultfloat << std::flush;
    return slot.get();
  };
  const auto variant = [&](bool smb, FreqVariant freq, int kinds) {
    NetworkConfig c = full;
    c.use_smb = smb;
    c.freq_variant = freq;
    c.kernel_kinds = kinds;
    return c;
  };

  const int k = full.kernel_kinds;
  std::vector<AblationRow> rows = {
      {"modules", "baseline", run(variant(false, FreqVariant::none, k))},
      {"modules", "+SMB", run(variant(true, FreqVariant::none, k))},
      {"modules", "+SFFB", run(variant(false, FreqVariant::simplified, k))},
      {"modules", "+SMB+SFFB", run(variant(true, FreqVariant::simplified, k))},
  };
  for (int kinds : {2, 4, 8}) {
    rows.push_back({"kinds", std::to_string(kinds), run(variant(true, FreqVariant::simplified, kinds))});
  }
  rows.push_back({"freq", "SFFB", run(variant(true, FreqVariant::simplified, k))});
  rows.push_back({"freq", "CFFB", run(variant(true, FreqVariant::complex, k))});

  std::ostringstream tsv;
  tsv << "table\tvariant\tsmb\tfreq\tkinds\tparams\tmacs\tpsnr\tssim\tinput_psnr\tfinal_loss\n";
  tsv << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    const auto& a = *r.run;
    tsv << r.table << '\t' << r.variant << '\t' << (a.config.use_smb ? 1 : 0) << '\t'
        << to_string(a.config.freq_variant) << '\t' << a.config.kernel_kinds << '\t' << a.params
        << '\t' << a.macs << '\t' << a.psnr << '\t' << a.ssim << '\t' << a.input_psnr << '\t'
        << a.final_loss << '\n';
  }
  if (!report.empty()) {
    std::ofstream f(report);
    f << tsv.str();
    if (!f) throw FormatError("cannot write " + report);
  }

  std::string table;
  for (const auto& r : rows) {
    if (r.table != table) {
      table = r.table;
      out << "\n[" << table << "]\n"
          << std::left << std::setw(12) << "variant" << std::right << std::setw(10) << "params"
          << std::setw(10) << "MACs(G)" << std::setw(10) << "PSNR" << std::setw(9) << "SSIM" << "\n";
    }
    const auto& a = *r.run;
    out << std::left << std::setw(12) << r.variant << std::right << std::setw(10) << a.params
        << std::setw(10) << std::fixed << std::setprecision(3) << static_cast<double>(a.macs) / 1e9
        << std::setw(10) << a.psnr << std::setw(9) << std::setprecision(4) << a.ssim << "\n"
        << std::defaultfloat;
  }
  const auto delta = [&](const std::string& what, const AblationRow& x, const AblationRow& y) {
    out << "direction " << what << ": " << std::showpos << std::fixed << std::setprecision(3)
        << y.run->psnr - x.run->psnr << " dB\n" << std::noshowpos << std::defaultfloat;
  };
  out << "\nnoisy input PSNR " << std::fixed << std::setprecision(3) << rows[0].run->input_psnr
      << " dB\n" << std::defaultfloat;
  delta("+SMB over baseline", rows[0], rows[1]);
  delta("+SFFB over baseline", rows[0], rows[2]);
  delta("+SMB+SFFB over baseline", rows[0], rows[3]);
  delta("kinds 8 over kinds 2", rows[4], rows[6]);
  delta("CFFB over SFFB", rows[7], rows[8]);
  return kExitOk;
}

using CommandFn = int (*)(const std::vector<std::string>&, std::ostream&, std::ostream&);

const std::vector<std::pair<std::string, CommandFn>>& subcommands() {
  static const std::vector<std::pair<std::string, CommandFn>> all = {
      {"synth", cmd_synth},     {"train", cmd_train}, {"denoise", cmd_denoise},
      {"eval", cmd_eval},       {"gradcheck", cmd_gradcheck}, {"macs", cmd_macs},
      {"ablate", cmd_ablate},
  };
  return all;
}

void usage(std::ostream& os) {
  os << "usage: saffn <subcommand> [--config FILE] [flags]\n"
     << "subcommands:";
  for (const auto& [name, fn] : subcommands()) os << " " << name;
  os << "\nrun 'saffn <subcommand> --help' for its flags\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    usage(err);
    return kExitUsage;
  }
  if (args.front() == "-h" || args.front() == "--help") {
    usage(out);
    return kExitOk;
  }
  const auto& cmds = subcommands();
  const auto it = std::find_if(cmds.begin(), cmds.end(),
                               [&](const auto& c) { return c.first == args.front(); });
  if (it == cmds.end()) {
    err << "saffn: unknown subcommand '" << args.front() << "'\n";
    usage(err);
    return kExitUsage;
  }
  try {
    return it->second(args, out, err);
  } catch (const ConfigError& e) {
    err << "saffn " << args.front() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "saffn " << args.front() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "saffn " << args.front() << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace saffn
