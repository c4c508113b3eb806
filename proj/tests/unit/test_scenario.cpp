#include <doctest.h>

#include "dlacb/scenario/harness.hpp"
#include "dlacb/util/error.hpp"
#include "service_fixture.hpp"

using namespace dlacb::scenario;
using dlacb::ConfigError;
using dlacb::UsageError;

TEST_CASE("built-in scenarios pass") {
  const auto& fx = svcfix::quick_fixtures();
  for (const auto& name : builtin_scenario_names()) {
    CAPTURE(name);
    auto rep = run_scenario(builtin_scenario(name, fx), fx);
    INFO(rep.to_text());
    CHECK(rep.passed());
  }
  CHECK_THROWS_AS(builtin_scenario("5", fx), UsageError);
}

TEST_CASE("scenario outcomes read as expected") {
  const auto& fx = svcfix::quick_fixtures();
  CHECK(run_scenario(builtin_scenario("1", fx), fx).summary == "r1: denied: unregistered");
  CHECK(run_scenario(builtin_scenario("2", fx), fx).summary == "r1: denied: model");
  CHECK(run_scenario(builtin_scenario("3", fx), fx).summary == "r1: denied: rule");
  CHECK(run_scenario(builtin_scenario("4", fx), fx).summary == "r1: granted, redeemed, logged");
  CHECK(run_scenario(builtin_scenario("replay", fx), fx).summary ==
        "a1: second redemption rejected (already_redeemed)");
}

TEST_CASE("a wrong expectation fails its assertion") {
  const auto& fx = svcfix::quick_fixtures();
  auto s = builtin_scenario("2", fx);
  s.expect.push_back(ExpectTerminal{"r1", LogKind::denied, DenyReason::rule, std::nullopt});
  auto rep = run_scenario(s, fx);
  CHECK(!rep.passed());
  CHECK(rep.assertions.front().passed);
  CHECK(!rep.assertions.back().passed);
  CHECK(rep.to_text().find("FAIL terminal r1 denied reason=rule") != std::string::npos);
}

TEST_CASE("scripted actions: manual redeem and crash") {
  const auto& fx = svcfix::quick_fixtures();
  const auto& q = fx.pins.model_allow;
  ScenarioScript s;
  s.name = "manual";
  s.registered_users = q.user + 1;
  s.actions = {{0, Crash{"v2"}},
               {0, Request{"r1", q.user, q.resource, q.op, false}},
               {30, Redeem{"r1"}}};
  s.expect = {ExpectSequence{"r1",
                             {LogKind::requested, LogKind::authenticated, LogKind::decided,
                              LogKind::link_issued, LogKind::redeemed}},
              ExpectAgreement{}, ExpectRedemptions{1}};
  auto rep = run_scenario(s, fx);
  INFO(rep.to_text());
  CHECK(rep.passed());

  s.actions.push_back({1, Redeem{"missing"}});
  CHECK_THROWS_AS(run_scenario(s, fx), ConfigError);
  s.actions.pop_back();
  s.registered_users = fx.users.size() + 1;
  CHECK_THROWS_AS(run_scenario(s, fx), ConfigError);
  CHECK_THROWS_AS(run_scenario(s, dlacb::service::FixtureSet{}), ConfigError);
}

TEST_CASE("truth table") {
  const auto& fx = svcfix::quick_fixtures();
  CHECK(expected_outcome(true, false, RuleEffect::allow) == "granted");
  CHECK(expected_outcome(false, true, RuleEffect::allow) == "denied:unregistered");
  CHECK(expected_outcome(true, true, RuleEffect::none) == "granted");
  auto m = run_matrix(fx);
  INFO(m.to_text());
  REQUIRE(m.rows.size() == 12);
  CHECK(m.passed());
}

TEST_CASE("reports are reproducible") {
  const auto& fx = svcfix::quick_fixtures();
  auto a = run_scenario(builtin_scenario("4", fx, 9), fx).to_text();
  auto b = run_scenario(builtin_scenario("4", fx, 9), fx).to_text();
  CHECK(a == b);
}
