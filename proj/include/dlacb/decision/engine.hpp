#pragma once

#include <memory>
#include <vector>

#include "dlacb/decision/model.hpp"
#include "dlacb/decision/rules.hpp"

namespace dlacb::decision {

struct EngineConfig {
  double threshold = 0.5;
  unsigned user_bits = kDefaultUserBits;
  unsigned resource_bits = kDefaultResourceBits;
};

// Model prediction followed by the rule-checker.
class DecisionEngine {
 public:
  DecisionEngine(std::shared_ptr<const DecisionModel> model, std::vector<PriorityRule> rules,
                 EngineConfig config = {});

  AccessDecision decide(std::uint32_t user_index, std::uint32_t resource_id) const;

  const DecisionModel& model() const { return *model_; }
  const std::vector<PriorityRule>& rules() const { return rules_; }
  const EngineConfig& config() const { return config_; }

 private:
  std::shared_ptr<const DecisionModel> model_;
  std::vector<PriorityRule> rules_;
  EngineConfig config_;
};

}  // namespace dlacb::decision
