#pragma once

// Straight-line reference network used to check the library's forward pass
// and gradients. Plain nested loops, no shared code with the library.

#include <cmath>
#include <span>
#include <vector>

#include "dlacb/decision/model.hpp"
#include "dlacb/decision/training.hpp"

namespace oracle {

inline std::vector<double> forward(const dlacb::decision::DecisionModel& m,
                                   std::span<const double> input) {
  std::vector<double> a(input.begin(), input.end());
  const auto& layers = m.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    std::vector<double> z(L.outputs);
    for (std::size_t o = 0; o < L.outputs; ++o) {
      double s = L.bias[o];
      for (std::size_t i = 0; i < L.inputs; ++i) s += L.weights[o * L.inputs + i] * a[i];
      bool last = l + 1 == layers.size();
      z[o] = last ? 1.0 / (1.0 + std::exp(-s)) : (s > 0 ? s : 0.0);
    }
    a = std::move(z);
  }
  return a;
}

inline double loss(const dlacb::decision::DecisionModel& m,
                   std::span<const dlacb::decision::Sample> batch) {
  double total = 0.0;
  for (const auto& s : batch) {
    auto p = oracle::forward(m, s.input);
    for (std::size_t k = 0; k < p.size(); ++k) {
      total -= s.labels[k] * std::log(p[k]) + (1.0 - s.labels[k]) * std::log(1.0 - p[k]);
    }
  }
  return total / (static_cast<double>(batch.size()) * 4.0);
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Central differences on every parameter. Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline GradCheck check_gradient(const dlacb::decision::DecisionModel& model,
                                std::span<const dlacb::decision::Sample> batch,
                                const dlacb::decision::Gradient& analytic, double eps = 1e-5,
                                double floor = 1e-7) {
  GradCheck out;
  auto m = model;
  auto rel = [&](double a, double n) {
    double d = std::max({std::abs(a), std::abs(n), floor});
    return std::abs(a - n) / d;
  };
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    auto probe = [&](double& param, double grad) {
      double saved = param;
      param = saved + eps;
      double up = loss(m, batch);
      param = saved - eps;
      double down = loss(m, batch);
      param = saved;
      double numeric = (up - down) / (2 * eps);
      out.max_rel_error = std::max(out.max_rel_error, rel(grad, numeric));
      ++out.parameters;
    };
    auto& L = m.layers()[l];
    const auto& G = analytic.layers[l];
    for (std::size_t i = 0; i < L.weights.size(); ++i) probe(L.weights[i], G.weights[i]);
    for (std::size_t i = 0; i < L.bias.size(); ++i) probe(L.bias[i], G.bias[i]);
  }
  return out;
}

}  // namespace oracle
