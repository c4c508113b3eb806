#include "dlacb/decision/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dlacb/util/error.hpp"

namespace dlacb::decision {
namespace {

constexpr char kMagic[8] = {'D', 'L', 'A', 'C', 'B', 'N', 'N', '\0'};
constexpr std::uint32_t kMaxLayers = 64;
constexpr std::uint32_t kMaxWidth = 1u << 16;

void put_u32le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64le(Bytes& out, double d) {
  auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class LeReader {
 public:
  explicit LeReader(ByteView d) : d_(d) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | d_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | d_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  void magic() {
    need(sizeof(kMagic));
    if (std::memcmp(d_.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("bad model magic");
    pos_ += sizeof(kMagic);
  }
  std::size_t remaining() const { return d_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (d_.size() - pos_ < n) throw FormatError("truncated model file");
  }
  ByteView d_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes serialize_model(const DecisionModel& model) {
  Bytes out(std::begin(kMagic), std::end(kMagic));
  put_u32le(out, kModelFormatVersion);
  put_u32le(out, static_cast<std::uint32_t>(model.layers().size()));
  for (auto d : model.layer_dims()) put_u32le(out, static_cast<std::uint32_t>(d));
  for (const auto& l : model.layers()) {
    for (double w : l.weights) put_f64le(out, w);
    for (double b : l.bias) put_f64le(out, b);
  }
  return out;
}

DecisionModel deserialize_model(ByteView data) {
  LeReader r(data);
  r.magic();
  if (auto v = r.u32(); v != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(v));
  }
  const auto n_layers = r.u32();
  if (n_layers == 0 || n_layers > kMaxLayers) throw FormatError("bad layer count");
  std::vector<std::size_t> dims;
  for (std::uint32_t i = 0; i <= n_layers; ++i) {
    auto d = r.u32();
    if (d == 0 || d > kMaxWidth) throw FormatError("bad layer width");
    dims.push_back(d);
  }
  std::size_t expected = 0;
  for (std::size_t k = 0; k < n_layers; ++k) expected += (dims[k] + 1) * dims[k + 1] * 8;
  if (r.remaining() != expected) throw FormatError("model payload size mismatch");

  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k < n_layers; ++k) {
    DenseLayer l;
    l.inputs = dims[k];
    l.outputs = dims[k + 1];
    l.weights.resize(l.inputs * l.outputs);
    l.bias.resize(l.outputs);
    for (auto& w : l.weights) w = r.f64();
    for (auto& b : l.bias) b = r.f64();
    layers.push_back(std::move(l));
  }
  try {
    return DecisionModel(std::move(layers));
  } catch (const ShapeError& e) {
    throw FormatError(std::string("model shape: ") + e.what());
  }
}

void save_model(const DecisionModel& model, const std::filesystem::path& path) {
  auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DecisionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

crypto::Digest model_fingerprint(const DecisionModel& model) {
  return crypto::hash(serialize_model(model));
}

}  // namespace dlacb::decision
