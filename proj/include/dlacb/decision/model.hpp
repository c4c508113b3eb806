#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dlacb/decision/kernels.hpp"
#include "dlacb/decision/operation.hpp"

namespace dlacb::decision {

// Fully connected layer; weights are row-major, one row per output unit.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  const double* row(std::size_t o) const { return weights.data() + o * inputs; }
  double* row(std::size_t o) { return weights.data() + o * inputs; }
  bool operator==(const DenseLayer&) const = default;
};

inline constexpr unsigned kDefaultUserBits = 16;
inline constexpr unsigned kDefaultResourceBits = 16;

// Multilayer perceptron: rectifier hidden layers, logistic outputs, exactly
// kOperationCount outputs.
class DecisionModel {
 public:
  DecisionModel() = default;
  explicit DecisionModel(std::vector<DenseLayer> layers);  // throws ShapeError

  static DecisionModel zeros(std::span<const std::size_t> dims);
  // He-uniform weights, zero biases.
  static DecisionModel random(std::span<const std::size_t> dims, std::uint64_t seed);

  std::vector<std::size_t> layer_dims() const;
  std::size_t input_width() const { return layers_.front().inputs; }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  bool operator==(const DecisionModel&) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

std::vector<std::size_t> default_dims();

double logistic(double z);

Scores forward(const DecisionModel& model, std::span<const double> input,
               const kernels::KernelTable& k = kernels::active());

// user bits || resource bits as 0.0/1.0 values.
std::vector<double> encode_input(std::uint64_t user_index, std::uint64_t resource_id,
                                 unsigned user_bits = kDefaultUserBits,
                                 unsigned resource_bits = kDefaultResourceBits);

// Per operation: score >= threshold.
AccessList threshold_scores(const Scores& scores, double threshold);

AccessList predict_access(const DecisionModel& model, std::uint64_t user_index,
                          std::uint64_t resource_id, double threshold,
                          unsigned user_bits = kDefaultUserBits,
                          unsigned resource_bits = kDefaultResourceBits);

}  // namespace dlacb::decision
