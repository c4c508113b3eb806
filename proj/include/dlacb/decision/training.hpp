#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dlacb/decision/model.hpp"

namespace dlacb::decision {

struct Sample {
  std::vector<double> input;
  std::array<double, kOperationCount> labels{};  // each 0.0 or 1.0
};

// Same shapes as the model's layers; holds d(loss)/d(parameter).
struct Gradient {
  std::vector<DenseLayer> layers;
};

struct LossAndGradient {
  double loss = 0.0;  // mean binary cross-entropy over samples and outputs
  Gradient gradient;
};

// Throws ArgumentError on an empty batch, ShapeError on width mismatch.
LossAndGradient loss_and_gradient(const DecisionModel& model, std::span<const Sample> batch,
                                  const kernels::KernelTable& k = kernels::active());

struct TrainParams {
  double learning_rate = 0.05;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;      // mean of batch losses seen during the epoch
  double train_accuracy = 0.0;  // per-output agreement during the epoch
  std::optional<double> heldout_accuracy;
};

struct TrainResult {
  DecisionModel model;
  std::vector<EpochMetrics> epochs;
};

// Mini-batch SGD with seeded shuffling. Deterministic for a given seed and
// kernel set. Throws TrainingDivergedError on a non-finite loss.
TrainResult train(DecisionModel model, std::span<const Sample> train_set, const TrainParams& params,
                  std::span<const Sample> heldout = {},
                  const kernels::KernelTable& k = kernels::active());

// Fraction of (sample, output) pairs where (score >= threshold) equals the label.
double accuracy(const DecisionModel& model, std::span<const Sample> samples,
                double threshold = 0.5, const kernels::KernelTable& k = kernels::active());

}  // namespace dlacb::decision
