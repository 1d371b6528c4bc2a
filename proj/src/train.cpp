#include "saffn/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "saffn/checkpoint.hpp"
#include "saffn/ops.hpp"

namespace saffn {

template <typename T>
Var<T> psnr_loss(const Var<T>& pred, const Tensor<T>& target, double max_pixel, double eps) {
  require_same_dims(pred.dims(), target.dims(), "psnr_loss");
  if (!(eps > 0.0)) throw ConfigError("psnr_loss: eps must be > 0");
  if (!(max_pixel > 0.0)) throw ConfigError("psnr_loss: max_pixel must be > 0");
  const Tensor<T>& p = pred.value();
  const std::size_t n = p.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(target[i]);
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(n);
  const double loss = 10.0 * std::log10(mse + eps) - 20.0 * std::log10(max_pixel);
  Tensor<T> out(Dims{1, 1, 1, 1}, static_cast<T>(loss));
  return record<T>(std::move(out), {pred}, [target, mse, eps, n](Node<T>& self) {
    Tensor<T>* gp = input_grad(self, 0);
    if (!gp) return;
    const double coeff = static_cast<double>(self.grad[0]) * 10.0 / std::numbers::ln10 /
                         (mse + eps) * 2.0 / static_cast<double>(n);
    const Tensor<T>& pv = self.inputs[0]->value;
    for (std::size_t i = 0; i < n; ++i) {
      (*gp)[i] += static_cast<T>(coeff * (static_cast<double>(pv[i]) - static_cast<double>(target[i])));
    }
  });
}

template Var<float> psnr_loss(const Var<float>&, const Tensor<float>&, double, double);
template Var<double> psnr_loss(const Var<double>&, const Tensor<double>&, double, double);

void TrainConfig::validate() const {
  if (total_iters < 1) throw ConfigError("total_iters must be >= 1");
  if (!(lr0 > eta_min && eta_min >= 0.0) && !(lr0 == 0.0 && eta_min == 0.0)) {
    throw ConfigError("learning rates must satisfy lr0 > eta_min >= 0");
  }
  if (lr_step < 1) throw ConfigError("lr_step must be >= 1");
  if (batch < 1 || crop < 1) throw ConfigError("batch and crop must be >= 1");
  if (!(loss_eps > 0.0)) throw ConfigError("loss_eps must be > 0");
  if (!(max_pixel > 0.0)) throw ConfigError("max_pixel must be > 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_path.empty()) {
    throw ConfigError("checkpoint_every needs a checkpoint path");
  }
}

CosineSchedule TrainConfig::schedule() const {
  return CosineSchedule{lr0, eta_min, total_iters, lr_step};
}

AdamWConfig TrainConfig::adamw() const { return AdamWConfig{beta1, beta2, adam_eps, weight_decay}; }

std::string format_log_line(const TrainRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d\t%.9g\t%.9g\t%.3f", r.iter, r.lr, r.loss, r.wallclock_ms);
  return buf;
}

TrainRecord parse_log_line(const std::string& line) {
  std::istringstream is(line);
  TrainRecord r;
  if (!(is >> r.iter >> r.lr >> r.loss >> r.wallclock_ms)) {
    throw FormatError("malformed loss log line: '" + line + "'");
  }
  return r;
}

TrainState initial_train_state(Model<float>& model, const TrainConfig& cfg) {
  TrainState s;
  s.optim = OptimState<float>::init(model.parameters());
  s.rng = Rng(cfg.seed);
  return s;
}

std::vector<TrainRecord> train_loop(Model<float>& model, const std::vector<ImagePair>& data,
                                    const TrainConfig& cfg, TrainState& state,
                                    const TrainLogSink& sink) {
  cfg.validate();
  if (data.empty()) throw ConfigError("train_loop: empty dataset");
  const auto params = model.parameters();
  const CosineSchedule sched = cfg.schedule();
  const AdamWConfig adam = cfg.adamw();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::vector<TrainRecord> log;

  const auto abort = [&](std::uint64_t t, const std::string& why) {
    if (!cfg.checkpoint_path.empty()) {
      save_checkpoint(cfg.checkpoint_path + ".lastgood", model, &state.optim, t, &state.rng);
    }
    throw NumericError("training aborted at iteration " + std::to_string(t) + ": " + why);
  };

  for (auto t = state.iteration; t < static_cast<std::uint64_t>(cfg.total_iters); ++t) {
    const double lr = cosine_lr(static_cast<int>(t), sched);
    const Rng before = state.rng;
    const Batch batch = sample_patches(data, cfg.crop, cfg.batch, state.rng);

    for (auto* p : params) p->zero_grad();
    Tape<float> tape;
    Var<float> out = forward(model, tape.constant(batch.noisy));
    Var<float> loss = psnr_loss(out, batch.clean, cfg.max_pixel, cfg.loss_eps);
    const double value = loss.value()[0];
    if (!std::isfinite(value)) {
      state.rng = before;
      abort(t, "non-finite loss");
    }
    tape.backward(loss);
    tape.clear();
    try {
      adamw_step(params, state.optim, lr, adam);
    } catch (const NumericError& e) {
      state.rng = before;
      abort(t, e.what());
    }
    state.iteration = t + 1;

    TrainRecord r;
    r.iter = static_cast<int>(t + 1);
    r.lr = lr;
    r.loss = value;
    r.wallclock_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    log.push_back(r);
    if (sink) sink(r);
    if (cfg.checkpoint_every > 0 && state.iteration % static_cast<std::uint64_t>(cfg.checkpoint_every) == 0) {
      save_checkpoint(cfg.checkpoint_path, model, &state.optim, state.iteration, &state.rng);
    }
  }
  return log;
}

std::vector<TrainRecord> train(Model<float>& model, const std::vector<ImagePair>& data,
                               const TrainConfig& cfg, const TrainLogSink& sink) {
  TrainState state = initial_train_state(model, cfg);
  return train_loop(model, data, cfg, state, sink);
}

}  // namespace saffn
