#pragma once

#include <filesystem>

#include "dlacb/crypto/crypto.hpp"
#include "dlacb/decision/model.hpp"
#include "dlacb/util/bytes.hpp"

namespace dlacb::decision {

// Model file layout (all integers and floats little-endian):
//   8 bytes  magic "DLACBNN\0"
//   u32      format version (1)
//   u32      layer count L
//   u32 x (L+1) layer widths, input first
//   per layer: weights row-major (outputs x inputs) f64, then biases f64
inline constexpr std::uint32_t kModelFormatVersion = 1;

Bytes serialize_model(const DecisionModel& model);
DecisionModel deserialize_model(ByteView data);  // throws FormatError

void save_model(const DecisionModel& model, const std::filesystem::path& path);
DecisionModel load_model(const std::filesystem::path& path);

// SHA-256 of the serialized model; pinned in genesis so every validator runs
// the same engine.
crypto::Digest model_fingerprint(const DecisionModel& model);

}  // namespace dlacb::decision
