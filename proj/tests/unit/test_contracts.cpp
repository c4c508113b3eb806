#include "doctest.h"

#include "chain_fixture.hpp"
#include "dlacb/decision/rng.hpp"
#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

using namespace fixture;
using decision::Effect;
using decision::PriorityRule;

namespace {

void register_all(TestChain& c) {
  std::vector<Transaction> setups;
  for (const auto& u : c.users) setups.push_back(c.register_tx(u));
  c.commit(setups);
}

PriorityRule resource_rule(std::uint32_t resource, Effect effect) {
  PriorityRule r;
  r.priority = 10;
  r.resource = resource;
  r.effect = effect;
  return r;
}

}  // namespace

TEST_CASE("access verification check") {
  TestChain c;
  c.commit({c.register_tx(c.users[0])});
  auto now = c.now();
  ReqInfo info{7, Operation::op2, {}};
  auto ok = build_access_request_tx(c.users[0], info, now);
  CHECK(access_verification_check(ok, c.state, now).ok);

  auto stranger = build_access_request_tx(c.users[1], info, now);
  auto r1 = access_verification_check(stranger, c.state, now);
  CHECK_FALSE(r1.ok);
  CHECK(r1.reason == DenyReason::unregistered);

  auto stale = build_access_request_tx(c.users[0], info, now - 2 * c.config.params.freshness_window);
  auto r2 = access_verification_check(stale, c.state, now);
  CHECK_FALSE(r2.ok);
  CHECK(r2.reason == DenyReason::stale);

  auto forged = ok;
  forged.req_info.resource_id = 8;
  auto r3 = access_verification_check(forged, c.state, now);
  CHECK_FALSE(r3.ok);
  CHECK(r3.reason == DenyReason::bad_signature);
}

TEST_CASE("authentication contract") {
  TestChain c({1, 1, 1, 1}, {}, 600, 6);
  register_all(c);
  auto tx = c.request_tx(c.users[5], 7, Operation::op2);
  auto out = authentication_contract(tx, c.state, c.now(), 9);
  REQUIRE(out.verified);
  // Independent expansion: most significant bit first, 16 wide.
  std::vector<std::uint8_t> five(16, 0), seven(16, 0);
  five[13] = five[15] = 1;
  seven[13] = seven[14] = seven[15] = 1;
  CHECK(out.verified->user_bits.bits() == five);
  CHECK(out.verified->req_bits.bits() == seven);
  CHECK(out.verified->time == tx.time);
  CHECK(out.verified->request_id == tx.req_info.request_id);
  CHECK(out.entry.kind == LogKind::authenticated);
  CHECK(out.entry.block_height == 9);

  TestChain replica({1, 1, 1, 1}, {}, 600, 6);
  register_all(replica);
  auto again = authentication_contract(tx, replica.state, replica.now(), 9);
  CHECK(*again.verified == *out.verified);
  CHECK(again.entry == out.entry);

  TestChain empty;
  auto denied = authentication_contract(empty.request_tx(empty.users[0], 1, Operation::op1),
                                        empty.state, empty.now(), 1);
  CHECK_FALSE(denied.verified);
  CHECK(denied.entry.kind == LogKind::denied);
  CHECK(denied.entry.reason == DenyReason::unregistered);
}

TEST_CASE("authorization contract outcomes") {
  SUBCASE("model allows, no rule") {
    TestChain c({-1, 1, -1, -1});
    register_all(c);
    auto applied = c.commit({c.request_tx(c.users[0], 7, Operation::op2)});
    REQUIRE(applied.results.size() == 1);
    CHECK(applied.results[0].granted);
    CHECK(applied.results[0].access_list == decision::AccessList{false, true, false, false});
    CHECK(c.state.access_log.back().kind == LogKind::decided);
    CHECK(c.state.access_log.back().decision == Decision::granted);
  }
  SUBCASE("model allows, deny rule") {
    TestChain c({1, 1, 1, 1}, {resource_rule(5, Effect::deny)});
    register_all(c);
    auto applied = c.commit({c.request_tx(c.users[0], 5, Operation::op2)});
    REQUIRE(applied.results.size() == 1);
    CHECK_FALSE(applied.results[0].granted);
    const auto& e = c.state.access_log.back();
    CHECK(e.kind == LogKind::denied);
    CHECK(e.reason == DenyReason::rule);
    CHECK(e.overridden);
  }
  SUBCASE("model denies, no rule") {
    TestChain c({-1, -1, -1, -1});
    register_all(c);
    auto applied = c.commit({c.request_tx(c.users[0], 7, Operation::op2)});
    REQUIRE(applied.results.size() == 1);
    CHECK_FALSE(applied.results[0].granted);
    CHECK(c.state.access_log.back().reason == DenyReason::model);
    CHECK_FALSE(c.state.access_log.back().overridden);
  }
}

TEST_CASE("authorization freshness guard and origin check") {
  TestChain c;
  register_all(c);
  auto tx = c.request_tx(c.users[0], 7, Operation::op2);
  auto auth = authentication_contract(tx, c.state, c.now(), 1);
  REQUIRE(auth.verified);
  auto s = c.state;
  RequestRecord rec;
  rec.user_pk = tx.user_pk;
  rec.req_info = tx.req_info;
  s.requests.emplace(tx.req_info.request_id, rec);

  auto late = authorization_contract(*auth.verified, s, c.now() + 10 * c.config.params.freshness_window, 1);
  CHECK_FALSE(late.result);
  CHECK(late.entry.kind == LogKind::denied);
  CHECK(late.entry.reason == DenyReason::stale);

  auto wire = *auth.verified;
  wire.contract_origin = false;
  CHECK_THROWS_AS(authorization_contract(wire, s, c.now(), 1), ValidationError);
}

TEST_CASE("truth table over registration, model and rule") {
  int rows = 0;
  for (bool registered : {false, true}) {
    for (bool model_allows : {false, true}) {
      for (int rule : {0, 1, 2}) {  // none, allow, deny
        std::vector<PriorityRule> rules;
        if (rule == 1) rules.push_back(resource_rule(5, Effect::allow));
        if (rule == 2) rules.push_back(resource_rule(5, Effect::deny));
        double b = model_allows ? 2.0 : -2.0;
        TestChain c({b, b, b, b}, rules);
        if (registered) c.commit({c.register_tx(c.users[0])});
        auto applied = c.commit({c.request_tx(c.users[0], 5, Operation::op3)});
        const auto& last = c.state.access_log.back();

        INFO("registered=" << registered << " model=" << model_allows << " rule=" << rule);
        if (!registered) {
          CHECK(applied.results.empty());
          CHECK(last.reason == DenyReason::unregistered);
        } else {
          bool expect = rule == 0 ? model_allows : rule == 1;
          REQUIRE(applied.results.size() == 1);
          CHECK(applied.results[0].granted == expect);
          CHECK(last.kind == (expect ? LogKind::decided : LogKind::denied));
          CHECK(last.overridden == (rule != 0));
          if (!expect) CHECK(last.reason == (rule == 2 ? DenyReason::rule : DenyReason::model));
        }
        ++rows;
      }
    }
  }
  CHECK(rows == 12);
}

TEST_CASE("authorization never follows failed authentication") {
  decision::SplitMix64 rng(44);
  TestChain c({1, -1, 1, -1}, {}, 700, 8);
  std::vector<Transaction> setups;
  for (std::size_t i = 0; i < 4; ++i) setups.push_back(c.register_tx(c.users[i]));
  c.commit(setups);
  for (int round = 0; round < 20; ++round) {
    std::vector<Transaction> pool;
    for (int i = 0; i < 5; ++i) {
      pool.push_back(c.request_tx(c.users[rng.below(8)], static_cast<std::uint32_t>(rng.below(50)),
                                  static_cast<Operation>(rng.below(4))));
    }
    c.commit(pool);
  }
  // Each request's entries: requested, then authenticated + one decision, or a denial.
  std::map<RequestId, std::vector<LogKind>> per_request;
  for (const auto& e : c.state.access_log) per_request[e.request_id].push_back(e.kind);
  CHECK(per_request.size() == 100);
  for (const auto& [id, seq] : per_request) {
    REQUIRE(seq.size() >= 2);
    CHECK(seq[0] == LogKind::requested);
    if (seq[1] == LogKind::denied) {
      CHECK(seq.size() == 2);
    } else {
      CHECK(seq[1] == LogKind::authenticated);
      CHECK(seq.size() == 3);
    }
  }
}

TEST_CASE("request result envelope") {
  TestChain c;
  RequestResult r;
  r.request_id.bytes.fill(3);
  r.user_pk = c.users[0].public_key;
  r.resource_id = 7;
  r.operation = Operation::op2;
  r.access_list = {false, true, false, true};
  r.granted = true;
  r.time = 99;
  CHECK(decode_request_result(encode(r)) == r);
  auto inconsistent = r;
  inconsistent.granted = false;
  CHECK_THROWS_AS(decode_request_result(encode(inconsistent)), FormatError);

  auto env = encrypt_request_result(r, c.storage.public_key, c.validators[0], c.entropy);
  CHECK(decode_result_envelope(encode(env)) == env);
  CHECK(open_request_result(env, c.storage, c.config.validators) == r);
  CHECK_THROWS_AS(open_request_result(env, c.users[0], c.config.validators), DecryptError);

  auto tampered = env;
  tampered.ciphertext[20] ^= 1;
  CHECK_THROWS_AS(open_request_result(tampered, c.storage, c.config.validators), ValidationError);
  auto resigned = tampered;
  resigned = encrypt_request_result(r, c.storage.public_key, c.validators[0], c.entropy);
  resigned.ciphertext[40] ^= 1;
  resigned.validator_sig = crypto::sign(c.validators[0].secret_key, [&] {
    Encoder e;
    e.str("dlacb/result-envelope/v1").bytes(resigned.ciphertext);
    return std::move(e).take();
  }());
  CHECK_THROWS_AS(open_request_result(resigned, c.storage, c.config.validators), DecryptError);

  auto outsider = encrypt_request_result(r, c.storage.public_key, c.users[0], c.entropy);
  CHECK_THROWS_AS(open_request_result(outsider, c.storage, c.config.validators), ValidationError);
}
