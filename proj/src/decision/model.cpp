#include "dlacb/decision/model.hpp"

#include <cmath>
#include <limits>

#include "dlacb/decision/bits.hpp"
#include "dlacb/decision/rng.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::decision {

DecisionModel::DecisionModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("model has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    if (l.inputs == 0 || l.outputs == 0) throw ShapeError("layer with zero width");
    if (l.weights.size() != l.inputs * l.outputs || l.bias.size() != l.outputs) {
      throw ShapeError("layer " + std::to_string(k) + " parameter count does not match dims");
    }
    if (k > 0 && l.inputs != layers_[k - 1].outputs) {
      throw ShapeError("layer " + std::to_string(k) + " input width does not chain");
    }
  }
  if (layers_.back().outputs != kOperationCount) {
    throw ShapeError("output layer must have " + std::to_string(kOperationCount) + " units");
  }
}

DecisionModel DecisionModel::zeros(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw ShapeError("need at least input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    DenseLayer l;
    l.inputs = dims[k];
    l.outputs = dims[k + 1];
    l.weights.assign(l.inputs * l.outputs, 0.0);
    l.bias.assign(l.outputs, 0.0);
    layers.push_back(std::move(l));
  }
  return DecisionModel(std::move(layers));
}

DecisionModel DecisionModel::random(std::span<const std::size_t> dims, std::uint64_t seed) {
  auto m = zeros(dims);
  SplitMix64 rng(seed);
  for (auto& l : m.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.inputs));
    for (auto& w : l.weights) w = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return m;
}

std::vector<std::size_t> DecisionModel::layer_dims() const {
  std::vector<std::size_t> dims;
  if (layers_.empty()) return dims;
  dims.push_back(layers_.front().inputs);
  for (const auto& l : layers_) dims.push_back(l.outputs);
  return dims;
}

std::size_t DecisionModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> default_dims() {
  return {kDefaultUserBits + kDefaultResourceBits, 64, 64, kOperationCount};
}

double logistic(double z) {
  double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  // Keep scores strictly inside (0,1) even where the exponential saturates.
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return p < lo ? lo : (p > hi ? hi : p);
}

Scores forward(const DecisionModel& model, std::span<const double> input,
               const kernels::KernelTable& k) {
  const auto& layers = model.layers();
  if (layers.empty()) throw ShapeError("model has no layers");
  if (input.size() != model.input_width()) {
    throw ShapeError("input width " + std::to_string(input.size()) + " != " +
                     std::to_string(model.input_width()));
  }
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    next.assign(l.outputs, 0.0);
    const bool last = li + 1 == layers.size();
    for (std::size_t o = 0; o < l.outputs; ++o) {
      double z = k.dot(l.row(o), cur.data(), l.inputs) + l.bias[o];
      next[o] = last ? logistic(z) : (z > 0.0 ? z : 0.0);
    }
    cur.swap(next);
  }
  Scores out{};
  for (std::size_t i = 0; i < kOperationCount; ++i) out[i] = cur[i];
  return out;
}

std::vector<double> encode_input(std::uint64_t user_index, std::uint64_t resource_id,
                                 unsigned user_bits, unsigned resource_bits) {
  auto u = binary_repr(user_index, user_bits);
  auto r = binary_repr(resource_id, resource_bits);
  std::vector<double> in;
  in.reserve(u.width() + r.width());
  for (auto b : u.bits()) in.push_back(b);
  for (auto b : r.bits()) in.push_back(b);
  return in;
}

AccessList threshold_scores(const Scores& scores, double threshold) {
  AccessList out{};
  for (std::size_t i = 0; i < kOperationCount; ++i) out[i] = scores[i] >= threshold;
  return out;
}

AccessList predict_access(const DecisionModel& model, std::uint64_t user_index,
                          std::uint64_t resource_id, double threshold, unsigned user_bits,
                          unsigned resource_bits) {
  auto in = encode_input(user_index, resource_id, user_bits, resource_bits);
  return threshold_scores(forward(model, in), threshold);
}

}  // namespace dlacb::decision
