#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dlacb/net/world.hpp"
#include "dlacb/service/fixtures.hpp"

namespace dlacb::scenario {

using service::FixtureSet;
using core::Operation;
using ledger::DenyReason;
using ledger::LogKind;

inline constexpr std::size_t kOutsider = static_cast<std::size_t>(-1);

// Actions refer to fixture users by index; kOutsider is the unregistered key.
struct Register {
  std::size_t user = 0;
};
struct Request {
  std::string label;
  std::size_t user = 0;
  std::uint32_t resource = 0;
  Operation op = Operation::op1;
  bool auto_redeem = true;
};
struct Redeem {
  std::string label;
};
struct Inject {
  std::string label;
  std::string behavior;
  // Chosen from the engine so the adversary holds a grantable pair when unset.
  std::optional<std::uint32_t> resource;
  Operation op = Operation::op1;
};
struct Crash {
  std::string node;
};
using ActionBody = std::variant<Register, Request, Redeem, Inject, Crash>;

struct Action {
  std::uint64_t at = 0;  // ticks after setup
  ActionBody body;
};

// Exact log kinds recorded for a labelled request, in ledger order.
struct ExpectSequence {
  std::string label;
  std::vector<LogKind> kinds;
};
struct ExpectTerminal {
  std::string label;
  LogKind kind = LogKind::denied;
  DenyReason reason = DenyReason::none;
  std::optional<bool> overridden;
};
// At least min_count trace lines from `node` whose event starts with `event`.
// node "validators" means every validator.
struct ExpectTrace {
  std::string node;
  std::string event;
  std::size_t min_count = 1;
};
struct ExpectAdversary {
  std::string label;
  std::string outcome;
};
struct ExpectRedemptions {
  std::size_t count = 0;
};
struct ExpectAgreement {};
using Expectation = std::variant<ExpectSequence, ExpectTerminal, ExpectTrace, ExpectAdversary,
                                 ExpectRedemptions, ExpectAgreement>;

struct ScenarioScript {
  std::string name;
  net::NetworkConfig net;
  std::size_t registered_users = 0;  // fixture users 0..n-1 registered before the script
  std::vector<Action> actions;
  std::vector<Expectation> expect;
  std::uint64_t settle_ticks = 1000;
};

struct AssertionResult {
  std::string text;
  bool passed = false;
};

struct ScenarioReport {
  std::string name;
  std::string summary;  // terminal outcome in words
  std::vector<AssertionResult> assertions;
  std::vector<std::string> log;  // ledger entries touching the scripted requests
  std::vector<std::string> trace;
  std::uint64_t ticks = 0;
  bool passed() const;
  std::string to_text() const;
};

std::string describe(const Expectation& e);

// Throws ConfigError when the fixtures cannot back the script.
ScenarioReport run_scenario(const ScenarioScript& script, const FixtureSet& fixtures);

// Names: 1, 2, 3, 4, replay, reuse, tamper, unauthorized. Throws UsageError otherwise.
ScenarioScript builtin_scenario(std::string_view name, const FixtureSet& fixtures,
                                std::uint64_t seed = 1);
std::vector<std::string> builtin_scenario_names();

enum class RuleEffect : std::uint8_t { none, allow, deny };
std::string to_string(RuleEffect e);

struct MatrixRow {
  bool registered = false;
  bool model_allows = false;
  RuleEffect rule = RuleEffect::none;
  std::string expected;
  std::string observed;
  bool passed() const { return expected == observed; }
};

struct MatrixReport {
  std::vector<MatrixRow> rows;
  std::vector<std::string> trace;
  bool passed() const;
  std::string to_text() const;
};

// Outcome text: "denied:<reason>" or "granted".
std::string expected_outcome(bool registered, bool model_allows, RuleEffect rule);
MatrixReport run_matrix(const FixtureSet& fixtures, std::uint64_t seed = 1);

}  // namespace dlacb::scenario
