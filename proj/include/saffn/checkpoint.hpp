#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "saffn/network.hpp"
#include "saffn/optim.hpp"
#include "saffn/rng.hpp"

namespace saffn {

/// File layout (all integers little-endian):
///   "SFFN" | u32 version | u64 iteration | u32 tensor count
///   per tensor: u32 name length | name bytes | u32 rank | u32 dims[rank] | f32 payload
///   u64 FNV-1a checksum of every preceding byte
///
/// Besides the model parameters (stored under their ids) a checkpoint holds
/// "meta/config", optional "meta/rng/<algorithm>", "meta/adam_step" and the
/// moments as "adam.m/<id>" and "adam.v/<id>". Integer metadata is stored
/// bit-for-bit inside the f32 payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model<float> model;
  std::optional<OptimState<float>> optim;
  std::optional<Rng::State> rng;
  std::uint64_t iteration = 0;
};

/// Writes to `path` through a temporary file and a rename.
void save_checkpoint(const std::string& path, const Model<float>& model,
                     const OptimState<float>* optim = nullptr, std::uint64_t iteration = 0,
                     const Rng* rng = nullptr);

/// Rebuilds the model from the stored config. With `expected` the stored
/// tensors must match that config instead, and any dim mismatch is reported
/// by tensor name. Throws FormatError; nothing is returned on failure.
Checkpoint load_checkpoint(const std::string& path, const NetworkConfig* expected = nullptr);

}  // namespace saffn
