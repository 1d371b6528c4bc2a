#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "saffn/data.hpp"
#include "saffn/network.hpp"
#include "saffn/optim.hpp"

namespace saffn {

/// -10 log10(max_pixel^2 / (mse + eps)), where mse is the mean squared
/// difference over every element. Equals -PSNR when eps is negligible.
template <typename T>
Var<T> psnr_loss(const Var<T>& pred, const Tensor<T>& target, double max_pixel = 1.0,
                 double eps = 1e-8);

struct TrainConfig {
  int total_iters = 5000;
  double lr0 = 1e-3;
  double eta_min = 1e-7;
  int lr_step = 1000;
  double beta1 = 0.9;
  double beta2 = 0.9;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  int batch = 4;
  int crop = 64;
  double loss_eps = 1e-8;
  double max_pixel = 1.0;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;     // 0 disables periodic checkpoints
  std::string checkpoint_path;  // periodic target; "<path>.lastgood" on abort

  void validate() const;
  [[nodiscard]] CosineSchedule schedule() const;
  [[nodiscard]] AdamWConfig adamw() const;
};

struct TrainRecord {
  int iter = 0;  // 1-based count of completed steps
  double lr = 0.0;
  double loss = 0.0;
  double wallclock_ms = 0.0;
};

/// "iter<TAB>lr<TAB>loss<TAB>wallclock_ms".
std::string format_log_line(const TrainRecord& r);
/// Parses a line produced by format_log_line.
TrainRecord parse_log_line(const std::string& line);

using TrainLogSink = std::function<void(const TrainRecord&)>;

/// Everything needed to continue training exactly where it stopped.
struct TrainState {
  OptimState<float> optim;
  Rng rng;
  std::uint64_t iteration = 0;
};

TrainState initial_train_state(Model<float>& model, const TrainConfig& cfg);

/// Runs iterations state.iteration .. total_iters - 1: sample a batch, forward,
/// loss, backward, AdamW at cosine_lr(t). A non-finite loss or gradient
/// writes "<checkpoint_path>.lastgood" (when a path is set) with the
/// parameters from before the failing step and throws NumericError naming the
/// iteration.
std::vector<TrainRecord> train_loop(Model<float>& model, const std::vector<ImagePair>& data,
                                    const TrainConfig& cfg, TrainState& state,
                                    const TrainLogSink& sink = {});

/// Fresh state then train_loop.
std::vector<TrainRecord> train(Model<float>& model, const std::vector<ImagePair>& data,
                               const TrainConfig& cfg, const TrainLogSink& sink = {});

}  // namespace saffn
