// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "eventclone/error.hpp"
#include "eventclone/model.hpp"

namespace eventclone::model {

namespace {

constexpr std::string_view kMagic = "EDAM1";

static_assert(std::endian::native == std::endian::little, "checkpoint codec assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) throw CheckpointError(std::string("truncated checkpoint reading ") + what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw CheckpointError(std::string("truncated checkpoint reading ") + what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ModelConfig& config, const ModelParams& params) {
  params.check(config);
  std::string out(kMagic);
  for (std::size_t v : {config.dim, config.slices, config.kernels, config.kernel_length, config.pad_len,
                        config.top_vocab}) {
    put<std::uint64_t>(out, v);
  }
  put<std::uint8_t>(out, static_cast<std::uint8_t>(config.conv));
  std::uint32_t count = 0;
  params.for_each([&](const std::string&, const Tensor&) { ++count; });
  put<std::uint32_t>(out, count);
  params.for_each([&](const std::string& name, const Tensor& t) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put<std::uint64_t>(out, d);
    for (double x : t.data()) put<double>(out, x);
  });
  return out;
}

std::pair<ModelConfig, ModelParams> decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size(), "magic") != kMagic) throw CheckpointError("not an EDAM1 checkpoint");
  ModelConfig config;
  config.dim = in.get<std::uint64_t>("dim");
  config.slices = in.get<std::uint64_t>("slices");
  config.kernels = in.get<std::uint64_t>("kernels");
  config.kernel_length = in.get<std::uint64_t>("kernel length");
  config.pad_len = in.get<std::uint64_t>("pad length");
  config.top_vocab = in.get<std::uint64_t>("vocabulary size");
  auto mode = in.get<std::uint8_t>("convolution mode");
  if (mode > 1) throw CheckpointError("unknown convolution mode " + std::to_string(mode));
  config.conv = static_cast<ConvKernel>(mode);
  try {
    config.validate();
  } catch (const ShapeError& e) {
    throw CheckpointError(std::string("bad checkpoint config: ") + e.what());
  }

  ModelParams params = ModelParams::zeros(config);
  std::uint32_t count = in.get<std::uint32_t>("tensor count");
  std::uint32_t expected = 0;
  params.for_each([&](const std::string&, const Tensor&) { ++expected; });
  if (count != expected)
    throw CheckpointError("checkpoint holds " + std::to_string(count) + " tensors, expected " + std::to_string(expected));

  params.for_each([&](const std::string& name, Tensor& t) {
    auto len = in.get<std::uint32_t>("tensor name length");
    auto stored = in.take(len, "tensor name");
    if (stored != name) throw CheckpointError("expected tensor " + name + ", found " + std::string(stored));
    auto rank = in.get<std::uint32_t>("tensor rank");
    std::vector<std::size_t> shape;
    for (std::uint32_t i = 0; i < rank && i < 4; ++i) shape.push_back(in.get<std::uint64_t>("tensor dims"));
    if (shape != t.shape()) {
      throw CheckpointError("tensor " + name + " has shape " + num::shape_string(shape) + ", config expects " +
                            num::shape_string(t.shape()));
    }
    for (double& x : t.data()) {
      x = in.get<double>("tensor data");
      if (!std::isfinite(x)) throw CheckpointError("tensor " + name + " holds a non-finite value");
    }
  });
  if (!in.done()) throw CheckpointError("trailing bytes after the last tensor");
  return {config, std::move(params)};
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ModelParams& params) {
  std::string bytes = encode_checkpoint(config, params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("failed writing " + path.string());
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace eventclone::model
