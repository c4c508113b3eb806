#include "dlacb/decision/training.hpp"

#include <cmath>
#include <numeric>

#include "dlacb/decision/rng.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::decision {
namespace {

Gradient zero_gradient(const DecisionModel& model) {
  Gradient g;
  for (const auto& l : model.layers()) {
    DenseLayer z;
    z.inputs = l.inputs;
    z.outputs = l.outputs;
    z.weights.assign(l.weights.size(), 0.0);
    z.bias.assign(l.bias.size(), 0.0);
    g.layers.push_back(std::move(z));
  }
  return g;
}

struct BatchStats {
  double loss = 0.0;
  std::size_t correct = 0;
};

// Accumulates gradient of the batch-mean loss into g.
BatchStats accumulate(const DecisionModel& model, std::span<const Sample> batch, Gradient& g,
                      const kernels::KernelTable& k) {
  const auto& layers = model.layers();
  const std::size_t L = layers.size();
  const double scale = 1.0 / static_cast<double>(batch.size() * kOperationCount);

  std::vector<std::vector<double>> act(L + 1);  // act[0] = input, act[k+1] = layer k output
  std::vector<double> delta, prev_delta;
  BatchStats stats;

  for (const auto& s : batch) {
    if (s.input.size() != model.input_width()) throw ShapeError("sample input width mismatch");
    act[0] = s.input;
    for (std::size_t li = 0; li < L; ++li) {
      const auto& l = layers[li];
      auto& out = act[li + 1];
      out.assign(l.outputs, 0.0);
      const bool last = li + 1 == L;
      for (std::size_t o = 0; o < l.outputs; ++o) {
        double z = k.dot(l.row(o), act[li].data(), l.inputs) + l.bias[o];
        out[o] = last ? logistic(z) : (z > 0.0 ? z : 0.0);
      }
    }

    const auto& p = act[L];
    delta.assign(kOperationCount, 0.0);
    for (std::size_t i = 0; i < kOperationCount; ++i) {
      const double y = s.labels[i];
      stats.loss -= y * std::log(p[i]) + (1.0 - y) * std::log1p(-p[i]);
      if ((p[i] >= 0.5) == (y >= 0.5)) ++stats.correct;
      delta[i] = (p[i] - y) * scale;
    }

    for (std::size_t li = L; li-- > 0;) {
      const auto& l = layers[li];
      auto& gl = g.layers[li];
      const auto& in = act[li];
      for (std::size_t o = 0; o < l.outputs; ++o) {
        if (delta[o] == 0.0) continue;
        k.axpy(delta[o], in.data(), gl.row(o), l.inputs);
        gl.bias[o] += delta[o];
      }
      if (li == 0) break;
      prev_delta.assign(l.inputs, 0.0);
      for (std::size_t o = 0; o < l.outputs; ++o) {
        if (delta[o] == 0.0) continue;
        k.axpy(delta[o], l.row(o), prev_delta.data(), l.inputs);
      }
      for (std::size_t j = 0; j < l.inputs; ++j) {
        if (in[j] <= 0.0) prev_delta[j] = 0.0;  // rectifier derivative
      }
      delta.swap(prev_delta);
    }
  }
  stats.loss *= scale;
  return stats;
}

void sgd_step(DecisionModel& model, const Gradient& g, double lr, const kernels::KernelTable& k) {
  auto& layers = model.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    k.axpy(-lr, g.layers[li].weights.data(), layers[li].weights.data(),
           layers[li].weights.size());
    k.axpy(-lr, g.layers[li].bias.data(), layers[li].bias.data(), layers[li].bias.size());
  }
}

}  // namespace

LossAndGradient loss_and_gradient(const DecisionModel& model, std::span<const Sample> batch,
                                  const kernels::KernelTable& k) {
  if (batch.empty()) throw ArgumentError("loss_and_gradient: empty batch");
  LossAndGradient out;
  out.gradient = zero_gradient(model);
  out.loss = accumulate(model, batch, out.gradient, k).loss;
  return out;
}

double accuracy(const DecisionModel& model, std::span<const Sample> samples, double threshold,
                const kernels::KernelTable& k) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    auto scores = forward(model, s.input, k);
    for (std::size_t i = 0; i < kOperationCount; ++i) {
      if ((scores[i] >= threshold) == (s.labels[i] >= 0.5)) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size() * kOperationCount);
}

TrainResult train(DecisionModel model, std::span<const Sample> train_set, const TrainParams& params,
                  std::span<const Sample> heldout, const kernels::KernelTable& k) {
  if (train_set.empty()) throw ArgumentError("train: empty dataset");
  if (params.batch_size == 0) throw ArgumentError("train: batch size must be positive");

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(params.seed);
  std::vector<Sample> batch;
  Gradient g = zero_gradient(model);

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double loss_sum = 0.0;
    std::size_t batches = 0, correct = 0;
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t end = std::min(order.size(), start + params.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      for (auto& l : g.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
      }
      auto stats = accumulate(model, batch, g, k);
      if (!std::isfinite(stats.loss)) {
        throw TrainingDivergedError("non-finite loss at epoch " + std::to_string(epoch));
      }
      sgd_step(model, g, params.learning_rate, k);
      loss_sum += stats.loss;
      correct += stats.correct;
      ++batches;
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(batches);
    m.train_accuracy =
        static_cast<double>(correct) / static_cast<double>(train_set.size() * kOperationCount);
    if (!heldout.empty()) m.heldout_accuracy = accuracy(model, heldout, 0.5, k);
    result.epochs.push_back(m);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace dlacb::decision
