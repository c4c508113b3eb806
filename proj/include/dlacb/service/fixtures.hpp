#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "dlacb/decision/engine.hpp"
#include "dlacb/decision/policy.hpp"
#include "dlacb/ledger/state.hpp"

namespace dlacb::service {

using core::KeyPair;
using decision::Operation;

inline constexpr std::uint32_t kFixtureUsers = 100;
inline constexpr std::uint32_t kFixtureResources = 50;
inline constexpr std::size_t kFixtureValidators = 3;
inline constexpr core::Timestamp kFixtureGenesisTime = 1'700'000'000;

struct Pair {
  std::uint32_t user = 0;
  std::uint32_t resource = 0;
  Operation op = Operation::op1;
  bool operator==(const Pair&) const = default;
};

// (user, resource, op) triples chosen from the trained model so every
// decision path has a known witness. Each uses a different user.
struct PinnedPairs {
  Pair model_allow;
  Pair model_deny;
  Pair allow_rule_deny;   // model allows, a DENY rule applies
  Pair deny_rule_allow;   // model denies, an ALLOW rule applies
  Pair allow_rule_allow;
  Pair deny_rule_deny;
  bool operator==(const PinnedPairs&) const = default;
};

struct TrainingReport {
  double heldout_accuracy = 0.0;
  double train_accuracy = 0.0;
  double seconds = 0.0;
  std::size_t train_rows = 0;
  std::size_t heldout_rows = 0;
};

struct FixtureSet {
  std::uint64_t seed = 0;
  KeyPair admin;
  KeyPair storage;
  KeyPair outsider;  // never registered
  std::vector<KeyPair> validators;
  std::vector<KeyPair> users;  // registration order = user index
  decision::SyntheticPolicy policy{0};
  std::shared_ptr<const decision::DecisionModel> model;
  PinnedPairs pins;
  std::vector<decision::PriorityRule> rules;
  ledger::GenesisConfig genesis;
};

// Default recipe on the 100 x 50 synthetic population, 20% held out.
decision::DecisionModel train_default_model(const decision::SyntheticPolicy& policy,
                                            std::uint64_t seed, TrainingReport* report = nullptr);

// Throws ConfigError if the model never allows or never denies.
PinnedPairs pick_pairs(const decision::DecisionModel& model,
                       const decision::SyntheticPolicy& policy);
std::vector<decision::PriorityRule> pinned_rules(const PinnedPairs& pins);

// Keys, policy and genesis derived from the seed; trains a model when none
// is supplied.
FixtureSet make_fixtures(std::uint64_t seed,
                         std::shared_ptr<const decision::DecisionModel> model = nullptr);

std::string resource_name(std::uint32_t id);
Bytes resource_payload(std::uint32_t id);

// Layout: keys/{admin,storage,outsider,v0..v2,user000..user099}.key,
// model.bin, rules.txt, genesis.bin, fixture.txt.
void write_fixtures(const FixtureSet& set, const std::filesystem::path& dir);
// Throws ConfigError when files are missing or disagree with each other.
FixtureSet load_fixtures(const std::filesystem::path& dir);

std::string user_key_name(std::size_t i);

}  // namespace dlacb::service
