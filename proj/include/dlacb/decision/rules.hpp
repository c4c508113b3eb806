#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlacb/decision/operation.hpp"

namespace dlacb::decision {

enum class Effect : std::uint8_t { allow = 0, deny = 1 };

// Static organisation rule applied on top of the model. Empty optionals are
// wildcards.
struct PriorityRule {
  std::uint32_t priority = 0;
  std::optional<std::uint32_t> user;
  std::optional<std::uint32_t> resource;
  std::optional<Operation> operation;
  Effect effect = Effect::deny;

  bool matches(std::uint32_t user_index, std::uint32_t resource_id, Operation op) const;
  bool operator==(const PriorityRule&) const = default;
};

struct AccessDecision {
  AccessList access_list{};
  Scores model_scores{};
  std::array<bool, kOperationCount> overridden{};
};

// Throws ValidationError if two rules share (priority, user, resource, operation).
void validate_rules(std::span<const PriorityRule> rules);

// Per operation the highest-priority matching rule decides; at equal priority
// DENY beats ALLOW. With no matching rule the model decision stands.
// model_scores is left zeroed; callers fill it in.
AccessDecision apply_priority_rules(std::span<const PriorityRule> rules, std::uint32_t user_index,
                                    std::uint32_t resource_id, const AccessList& model_access);

// Line format: `priority user resource op effect`, `*` as wildcard, `#`
// comments. Errors carry "line N".
std::vector<PriorityRule> parse_rules(std::string_view text);
std::vector<PriorityRule> load_rules_file(const std::filesystem::path& path);
std::string format_rules(std::span<const PriorityRule> rules);
std::string format_rule(const PriorityRule& rule);

}  // namespace dlacb::decision
