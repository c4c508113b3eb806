#include "dlacb/decision/engine.hpp"

#include "dlacb/util/error.hpp"

namespace dlacb::decision {

DecisionEngine::DecisionEngine(std::shared_ptr<const DecisionModel> model,
                               std::vector<PriorityRule> rules, EngineConfig config)
    : model_(std::move(model)), rules_(std::move(rules)), config_(config) {
  if (!model_) throw ConfigError("decision engine needs a model");
  if (model_->input_width() != config_.user_bits + config_.resource_bits) {
    throw ShapeError("model input width does not match user+resource bit widths");
  }
  validate_rules(rules_);
}

AccessDecision DecisionEngine::decide(std::uint32_t user_index, std::uint32_t resource_id) const {
  auto input = encode_input(user_index, resource_id, config_.user_bits, config_.resource_bits);
  auto scores = forward(*model_, input);
  auto d = apply_priority_rules(rules_, user_index, resource_id,
                                threshold_scores(scores, config_.threshold));
  d.model_scores = scores;
  return d;
}

}  // namespace dlacb::decision
