#include "saffn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <vector>

namespace saffn {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'F', 'N'};
const std::string kConfigTensor = "meta/config";
const std::string kAdamStepTensor = "meta/adam_step";
const std::string kRngPrefix = "meta/rng/";

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void tensor(const std::string& name, const Dims& d, const float* data) {
    u32(static_cast<std::uint32_t>(name.size()));
    raw(name.data(), name.size());
    u32(4);
    u32(static_cast<std::uint32_t>(d.n));
    u32(static_cast<std::uint32_t>(d.c));
    u32(static_cast<std::uint32_t>(d.h));
    u32(static_cast<std::uint32_t>(d.w));
    for (std::size_t i = 0; i < d.numel(); ++i) u32(std::bit_cast<std::uint32_t>(data[i]));
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end, std::string path)
      : b_(b), end_(end), path_(std::move(path)) {}

  std::uint32_t u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8, "u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string str(std::size_t n) {
    need(n, "name");
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] std::size_t pos() const { return pos_; }
  [[nodiscard]] bool at_end() const { return pos_ == end_; }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_ + ": " + what + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (end_ - pos_ < n) fail(std::string("truncated ") + what);
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
  std::string path_;
};

struct Stored {
  Dims dims;
  std::vector<float> data;
};

std::vector<float> pack_u64(std::uint64_t v) {
  return {std::bit_cast<float>(static_cast<std::uint32_t>(v)),
          std::bit_cast<float>(static_cast<std::uint32_t>(v >> 32))};
}

std::uint64_t unpack_u64(const float* p) {
  return static_cast<std::uint64_t>(std::bit_cast<std::uint32_t>(p[0])) |
         (static_cast<std::uint64_t>(std::bit_cast<std::uint32_t>(p[1])) << 32);
}

std::vector<float> encode_config(const NetworkConfig& c) {
  std::vector<float> v = {static_cast<float>(c.width),
                          static_cast<float>(c.in_channels),
                          static_cast<float>(c.kernel_kinds),
                          static_cast<float>(static_cast<int>(c.freq_variant)),
                          c.use_smb ? 1.0f : 0.0f,
                          static_cast<float>(c.mid_blocks),
                          static_cast<float>(c.enc_blocks.size())};
  for (int b : c.enc_blocks) v.push_back(static_cast<float>(b));
  for (int b : c.dec_blocks) v.push_back(static_cast<float>(b));
  return v;
}

NetworkConfig decode_config(const std::vector<float>& v, const std::string& path) {
  const auto bad = [&path]() { return FormatError(path + ": malformed " + kConfigTensor); };
  if (v.size() < 7) throw bad();
  const auto as_int = [&](std::size_t i) {
    const float f = v[i];
    if (!(f >= 0.0f && f < 1e6f) || f != static_cast<float>(static_cast<int>(f))) throw bad();
    return static_cast<int>(f);
  };
  NetworkConfig c;
  c.width = as_int(0);
  c.in_channels = as_int(1);
  c.kernel_kinds = as_int(2);
  const int variant = as_int(3);
  if (variant > 2) throw bad();
  c.freq_variant = static_cast<FreqVariant>(variant);
  c.use_smb = as_int(4) != 0;
  c.mid_blocks = as_int(5);
  const auto levels = static_cast<std::size_t>(as_int(6));
  if (v.size() != 7 + 2 * levels) throw bad();
  c.enc_blocks.clear();
  c.dec_blocks.clear();
  for (std::size_t k = 0; k < levels; ++k) c.enc_blocks.push_back(as_int(7 + k));
  for (std::size_t k = 0; k < levels; ++k) c.dec_blocks.push_back(as_int(7 + levels + k));
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(path + ": stored config invalid: " + e.what());
  }
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model<float>& model,
                     const OptimState<float>* optim, std::uint64_t iteration, const Rng* rng) {
  const auto params = model.parameters();
  if (optim && (optim->m.size() != params.size() || optim->v.size() != params.size())) {
    throw UsageError("save_checkpoint: optimizer state does not match the model");
  }
  const std::vector<float> config = encode_config(model.config);
  std::uint32_t count = static_cast<std::uint32_t>(params.size()) + 1;
  if (rng) count += 1;
  if (optim) count += 1 + 2 * static_cast<std::uint32_t>(params.size());

  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u64(iteration);
  w.u32(count);
  w.tensor(kConfigTensor, Dims{1, 1, 1, static_cast<int>(config.size())}, config.data());
  for (const auto* p : params) w.tensor(p->id, p->value.dims(), p->value.data());
  if (rng) {
    std::vector<float> bits;
    for (std::uint64_t s : rng->state()) {
      const auto packed = pack_u64(s);
      bits.insert(bits.end(), packed.begin(), packed.end());
    }
    w.tensor(kRngPrefix + Rng::kAlgorithm, Dims{1, 1, 1, static_cast<int>(bits.size())}, bits.data());
  }
  if (optim) {
    const auto step = pack_u64(optim->step);
    w.tensor(kAdamStepTensor, Dims{1, 1, 1, 2}, step.data());
    for (std::size_t i = 0; i < params.size(); ++i) {
      w.tensor("adam.m/" + params[i]->id, optim->m[i].dims(), optim->m[i].data());
      w.tensor("adam.v/" + params[i]->id, optim->v[i].dims(), optim->v[i].data());
    }
  }
  auto& bytes = w.bytes();
  const std::uint64_t checksum = fnv1a(bytes.data(), bytes.size());
  w.u64(checksum);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path, const NetworkConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  constexpr std::size_t kHeader = 4 + 4 + 8 + 4;
  if (bytes.size() < kHeader + 8) {
    throw FormatError(path + ": truncated (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError(path + ": bad magic at byte 0");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored_sum = 0;
  for (int i = 0; i < 8; ++i) stored_sum |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
  Reader r(bytes, body, path);
  r.str(4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(path + ": unsupported version " + std::to_string(version) + " at byte 4");
  }
  if (fnv1a(bytes.data(), body) != stored_sum) {
    throw FormatError(path + ": checksum mismatch (file truncated or corrupted) at byte " +
                      std::to_string(body));
  }
  const std::uint64_t iteration = r.u64();
  const std::uint32_t count = r.u32();

  std::map<std::string, Stored> tensors;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t len = r.u32();
    std::string name = r.str(len);
    const std::uint32_t rank = r.u32();
    if (rank != 4) r.fail("tensor '" + name + "' has rank " + std::to_string(rank));
    int d[4];
    for (int& v : d) {
      const std::uint32_t x = r.u32();
      if (x < 1 || x > (1u << 30)) r.fail("tensor '" + name + "' has invalid extent");
      v = static_cast<int>(x);
    }
    Stored s{Dims{d[0], d[1], d[2], d[3]}, {}};
    s.data.resize(s.dims.numel());
    for (float& f : s.data) f = std::bit_cast<float>(r.u32());
    if (!tensors.emplace(name, std::move(s)).second) r.fail("duplicate tensor '" + name + "'");
  }
  if (!r.at_end()) r.fail("trailing bytes before checksum");

  NetworkConfig config;
  if (expected) {
    config = *expected;
  } else {
    auto it = tensors.find(kConfigTensor);
    if (it == tensors.end()) throw FormatError(path + ": missing " + kConfigTensor);
    config = decode_config(it->second.data, path);
  }

  Checkpoint ck;
  ck.iteration = iteration;
  ck.model = build<float>(config, 0);
  const auto params = ck.model.parameters();
  std::size_t consumed = tensors.count(kConfigTensor);

  const auto take = [&](const std::string& name, const Dims& want) -> Tensor<float> {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError(path + ": missing tensor '" + name + "'");
    if (it->second.dims != want) {
      throw FormatError(path + ": tensor '" + name + "' has dims " + it->second.dims.str() +
                        " but the model expects " + want.str());
    }
    ++consumed;
    return Tensor<float>(want, it->second.data);
  };

  for (auto* p : params) {
    p->value = take(p->id, p->value.dims());
    p->zero_grad();
  }

  const std::string rng_name = kRngPrefix + Rng::kAlgorithm;
  if (auto it = tensors.find(rng_name); it != tensors.end()) {
    if (it->second.data.size() != 8) throw FormatError(path + ": malformed '" + rng_name + "'");
    Rng::State state{};
    for (std::size_t i = 0; i < 4; ++i) state[i] = unpack_u64(it->second.data.data() + 2 * i);
    ck.rng = state;
    ++consumed;
  }

  if (auto it = tensors.find(kAdamStepTensor); it != tensors.end()) {
    if (it->second.data.size() != 2) throw FormatError(path + ": malformed " + kAdamStepTensor);
    OptimState<float> st;
    st.step = unpack_u64(it->second.data.data());
    ++consumed;
    for (const auto* p : params) {
      st.m.push_back(take("adam.m/" + p->id, p->value.dims()));
      st.v.push_back(take("adam.v/" + p->id, p->value.dims()));
    }
    ck.optim = std::move(st);
  }

  if (consumed != tensors.size()) {
    for (const auto& [name, s] : tensors) {
      const bool known = name == kConfigTensor || name == kAdamStepTensor ||
                         name.rfind(kRngPrefix, 0) == 0 || name.rfind("adam.", 0) == 0;
      bool is_param = false;
      for (const auto* p : params) is_param = is_param || p->id == name;
      if (!known && !is_param) {
        throw FormatError(path + ": tensor '" + name + "' does not belong to the model");
      }
      if (name.rfind(kRngPrefix, 0) == 0 && name != rng_name) {
        throw FormatError(path + ": unsupported RNG '" + name.substr(kRngPrefix.size()) + "'");
      }
    }
    throw FormatError(path + ": unused tensors in checkpoint");
  }
  return ck;
}

}  // namespace saffn
