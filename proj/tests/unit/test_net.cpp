#include <doctest.h>

#include <algorithm>
#include <thread>

#include "dlacb/core/builders.hpp"
#include "dlacb/core/encoding.hpp"
#include "dlacb/net/live.hpp"
#include "dlacb/util/error.hpp"
#include "world_fixture.hpp"

using namespace fixture;

namespace {

bool lines_with(const World& w, std::string_view node, std::string_view event) {
  auto needle = " " + std::string(node) + " " + std::string(event);
  return std::any_of(w.trace().begin(), w.trace().end(),
                     [&](const std::string& l) { return l.find(needle) != std::string::npos; });
}

class QuietContext final : public NodeContext {
 public:
  explicit QuietContext(Timestamp now) : now_(now) {}
  Timestamp now() const override { return now_; }
  void send(const std::string&, const Message&) override {}
  std::vector<std::string> peers(Role) const override { return {}; }
  void trace(std::string_view, std::string_view) override {}
  bool retransmit() const override { return false; }

 private:
  Timestamp now_;
};

}  // namespace

TEST_CASE("a reorg returns orphaned user transactions to the pool") {
  TestChain c;
  c.commit({c.register_tx(c.users[0])});
  auto fork_point = c.state;
  auto req = c.request_tx(c.users[0], 2, Operation::op1);
  c.commit({req});
  auto short_chain = chain_of(c.state);
  c.state = fork_point;
  c.commit({c.register_tx(c.users[1])});
  c.commit({c.register_tx(c.users[2])});
  auto long_chain = chain_of(c.state);

  ValidatorNode v("v0", c.validators[0], genesis(c.config, c.model), c.model,
                  std::make_shared<crypto::SeededEntropy>(1));
  QuietContext ctx(c.now());
  REQUIRE(v.consider_chain(ctx, short_chain));
  CHECK(v.pool().empty());
  REQUIRE(v.consider_chain(ctx, long_chain));
  REQUIRE(v.pool().size() == 1);
  CHECK(tx_id(v.pool().front()) == tx_id(Transaction{req}));
  CHECK(!v.consider_chain(ctx, short_chain));
}

TEST_CASE("lossy links still finish every replay attack") {
  TestChain c;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    NetworkConfig net;
    net.seed = seed;
    net.latency_max = 1;
    net.drop_probability = 0.3;
    auto w = make_world(c, net);
    auto& a = w->inject_adversary("replay_link", 3, Operation::op1);
    auto& b = w->inject_adversary("reuse_nonce", 4, Operation::op2);
    w->run_until_converged(3000);
    w->run(3);
    CAPTURE(seed);
    CHECK(a.outcomes() == std::vector<std::string>{"redeem:already_redeemed"});
    CHECK(b.outcomes() == std::vector<std::string>{"redeem:wrong_nonce"});
    CHECK(w->storage().service().redemption_count() == 2);
  }
}

TEST_CASE("message codec round-trips every message kind") {
  TestChain c;
  auto tx = c.request_tx(c.users[0], 3, Operation::op2);
  auto sealed = c.seal_next({tx});
  RedeemResponse fail{9, storage::RedeemError::expired, {}};
  PollResponse poll{tx.req_info.request_id, PollStatus::link, "", c.link_tx(tx.req_info.request_id, c.fresh_nonce())};
  std::vector<Message> all = {
      TxGossip{tx},
      BlockAnnounce{sealed.block},
      SyncRequest{7},
      SyncResponse{{make_genesis_block(c.config), sealed.block}},
      ResultDelivery{ResultEnvelope{Bytes{1, 2, 3}, c.validators[0].public_key, {}}},
      ResultAck{crypto::hash(Bytes{1})},
      PollRequest{tx.req_info.request_id},
      poll,
      RedeemRequest{5, LinkToken{}, Nonce{}, Operation::op4},
      fail,
      RedeemResponse{10, std::nullopt, Bytes{7, 7}},
  };
  for (const auto& m : all) {
    auto bytes = encode(m);
    CHECK(encode(decode_message(bytes)) == bytes);
    CHECK(message_name(decode_message(bytes)) == message_name(m));
    if (bytes.size() > 1) {
      Bytes cut(bytes.begin(), bytes.end() - 1);
      CHECK_THROWS_AS(decode_message(cut), FormatError);
    }
  }
  CHECK_THROWS_AS(decode_message(Bytes{42}), FormatError);
  auto frame = encode_frame(Frame{"v1", SyncRequest{3}});
  CHECK(decode_frame(frame).from == "v1");
  CHECK(std::get<SyncRequest>(decode_frame(frame).message).have_blocks == 3);
}

TEST_CASE("network config is validated") {
  TestChain c;
  NetworkConfig net;
  net.drop_probability = 1.0;
  CHECK_THROWS_AS(World(net, world_setup(c)), ConfigError);
  net.drop_probability = 0.0;
  net.latency_min = 3;
  net.latency_max = 1;
  CHECK_THROWS_AS(World(net, world_setup(c)), ConfigError);
  auto s = world_setup(c);
  std::swap(s.validator_keys[0], s.validator_keys[1]);
  CHECK_THROWS_AS(World(NetworkConfig{}, s), ConfigError);
}

TEST_CASE("zero latency delivers next tick to every validator") {
  TestChain c;
  auto w = make_world(c, NetworkConfig{});
  w->run_until_converged(50);
  auto start = w->tick();
  w->user("u0").request_access(w->context("u0"), 2, Operation::op1);
  w->step();
  std::size_t accepted = 0;
  for (const auto& l : w->trace()) {
    if (l.rfind(std::to_string(start + 1) + " v", 0) == 0 && l.find(" tx_accepted ") != std::string::npos) {
      ++accepted;
    }
  }
  CHECK(accepted == 3);
}

TEST_CASE("granted request flows through to redemption") {
  TestChain c;
  auto w = make_world(c, NetworkConfig{});
  auto r0 = w->run_until_converged(100);
  REQUIRE(r0.agreement);
  auto id = w->user("u1").request_access(w->context("u1"), 5, Operation::op3);
  auto r = w->run_until_converged(200);
  CHECK(r.agreement);
  CHECK(r.quiescent);
  const auto* t = w->user("u1").find(id);
  REQUIRE(t);
  CHECK(t->status == RequestStatus::redeemed);
  CHECK(t->payload == payload_for(5));
  for (std::size_t i = 0; i < 3; ++i) {
    const auto* rec = w->validator(i).state().find_request(id);
    REQUIRE(rec);
    CHECK(rec->stage == RequestStage::redeemed);
  }
  CHECK(w->storage().service().redemption_count() == 1);
}

TEST_CASE("model denial reaches the user through polling") {
  TestChain c({-1, -1, -1, -1});
  auto w = make_world(c, NetworkConfig{});
  w->run_until_converged(100);
  auto id = w->user("u0").request_access(w->context("u0"), 1, Operation::op1);
  auto r = w->run_until_converged(200);
  CHECK(r.agreement);
  const auto* t = w->user("u0").find(id);
  REQUIRE(t);
  CHECK(t->status == RequestStatus::denied);
  CHECK(t->deny_reason == "model");
  CHECK(w->storage().service().link_count() == 0);
}

TEST_CASE("duplicate submissions are deduplicated by tx id") {
  TestChain c;
  auto w = make_world(c, NetworkConfig{});
  w->run_until_converged(100);
  auto tx = c.request_tx(c.users[0], 1, Operation::op1);
  tx = build_access_request_tx(c.users[0], tx.req_info, w->now());
  w->submit_transaction("u0", tx);
  w->submit_transaction("u0", tx);
  w->submit_transaction("u1", tx);
  w->step();
  std::size_t in_pools = 0;
  std::size_t on_chain = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (const auto& p : w->validator(i).pool()) in_pools += tx_id(p) == tx_id(Transaction{tx});
    on_chain += w->validator(i).state().tx_ids.count(tx_id(Transaction{tx}));
  }
  CHECK(in_pools + on_chain >= 1);
  CHECK(in_pools <= 3);
  w->run_until_converged(100);
  std::size_t copies = 0;
  for (const auto& b : w->validator(0).state().chain) {
    for (const auto& t : b->transactions) copies += tx_id(t) == tx_id(Transaction{tx});
  }
  CHECK(copies == 1);
}

TEST_CASE("same seed and inputs give identical traces and digests") {
  auto run = [](std::uint64_t seed) {
    TestChain c;
    NetworkConfig net;
    net.seed = seed;
    net.latency_max = 3;
    net.drop_probability = 0.2;
    auto w = make_world(c, net);
    for (std::uint64_t t = 0; t < 1000; ++t) {
      if (t % 50 == 10) {
        auto name = "u" + std::to_string((t / 50) % 4);
        w->user(name).request_access(w->context(name), static_cast<std::uint32_t>(t % 8),
                                     Operation::op2);
      }
      w->step();
    }
    return std::make_pair(w->digest(), w->trace_text());
  };
  auto a = run(77);
  auto b = run(77);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(run(78).second != a.second);
}

TEST_CASE("partitioned origin does not reach validators during the partition") {
  TestChain c;
  NetworkConfig net;
  net.retransmit = false;
  net.partitions = {Partition{40, 70, {{"u2"}}}};
  auto w2 = make_world(c, net);
  w2->run(40);
  REQUIRE(w2->validator(0).state().user_count() == 4);
  auto tx = build_access_request_tx(c.users[2], ReqInfo{1, Operation::op1, RequestId{}}, w2->now());
  w2->submit_transaction("u2", tx);
  w2->run(10);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(w2->validator(i).pool().empty());
    CHECK(w2->validator(i).state().tx_ids.count(tx_id(Transaction{tx})) == 0);
  }
  // After the partition heals a fresh copy gets through.
  w2->run(25);
  w2->submit_transaction("u2", tx);
  w2->run_until_converged(50);
  CHECK(w2->validator(0).state().tx_ids.count(tx_id(Transaction{tx})) == 1);
}

TEST_CASE("drop probability 0.99 still converges with retransmission") {
  // A submission is retried until it goes stale, so delivery is likely but
  // not certain; agreement must hold regardless.
  int included = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TestChain c({1, 1, 1, 1}, {}, 500, 1);
    NetworkConfig net;
    net.seed = seed;
    net.drop_probability = 0.99;
    auto w = make_world(c, net);
    auto r = w->run_until_converged(20000);
    CHECK(r.agreement);
    CHECK(r.quiescent);
    CHECK(w->stats().dropped > 10 * w->stats().delivered);
    included += w->validator(0).state().user_count() == 1;
  }
  CHECK(included >= 8);
}

TEST_CASE("chain keeps growing with one validator crashed") {
  TestChain c({1, 1, 1, 1}, {}, 500, 4);
  auto w = make_world(c, NetworkConfig{});
  w->run_until_converged(100);
  w->crash("v1");
  auto h0 = w->validator(0).state().height();
  auto sealed_before = w->validator(1).blocks_sealed();
  for (int round = 0; round < 30; ++round) {
    auto name = "u" + std::to_string(round % 4);
    w->user(name).request_access(w->context(name), round % 8, Operation::op1);
    w->run(3);
  }
  auto r = w->run_until_converged(500);
  CHECK(r.agreement);
  CHECK(r.tips.size() == 2);
  CHECK(w->validator(1).blocks_sealed() == sealed_before);
  CHECK(w->validator(0).state().height() > h0);
  // Every sealed block came from a surviving leader.
  for (const auto& b : w->validator(0).state().chain) {
    if (b->height > h0) CHECK(b->validator_pk != c.validators[1].public_key);
  }
  for (const auto& name : {"u0", "u1", "u2", "u3"}) {
    for (const auto& t : w->user(name).requests()) CHECK(t.status == RequestStatus::redeemed);
  }
}

TEST_CASE("adversary catalogue") {
  TestChain c;
  auto w = make_world(c, NetworkConfig{});
  w->run_until_converged(100);
  CHECK_THROWS_AS(w->inject_adversary("equivocate"), ConfigError);

  SUBCASE("tamper_block is rejected by every validator") {
    auto id = w->user("u0").request_access(w->context("u0"), 1, Operation::op1);
    w->run_until_converged(100);
    REQUIRE(w->user("u0").find(id)->status == RequestStatus::redeemed);
    auto before = w->validator(0).state().tip_hash();
    auto& adv = w->inject_adversary("tamper_block");
    w->run(5);
    CHECK(adv.finished());
    for (const auto* v : {"v0", "v1", "v2"}) CHECK(lines_with(*w, v, "block_rejected"));
    auto r = w->report();
    CHECK(r.agreement);
    CHECK(w->validator(0).state().tip_hash() == before);
  }
  SUBCASE("replay_link second redemption is refused and logged") {
    auto& adv = w->inject_adversary("replay_link", 4, Operation::op2);
    w->run_until_converged(200);
    REQUIRE(adv.finished());
    CHECK(adv.outcomes() == std::vector<std::string>{"redeem:already_redeemed"});
    CHECK(lines_with(*w, "storage", "redeem_rejected:already_redeemed"));
    CHECK(w->storage().service().redemption_count() == 1);
  }
  SUBCASE("reuse_nonce against a second link fails") {
    auto& adv = w->inject_adversary("reuse_nonce", 4, Operation::op2);
    w->run_until_converged(200);
    REQUIRE(adv.finished());
    CHECK(adv.outcomes() == std::vector<std::string>{"redeem:wrong_nonce"});
  }
  SUBCASE("unauthorized_request is denied as unregistered") {
    auto& adv = w->inject_adversary("unauthorized_request", 2, Operation::op1);
    w->run_until_converged(200);
    REQUIRE(adv.finished());
    CHECK(adv.outcomes() == std::vector<std::string>{"denied:unregistered"});
    LogFilter f;
    f.user_pk = adv.keys().public_key;
    auto log = query_access_log(w->validator(2).state(), f);
    REQUIRE(!log.empty());
    CHECK(log.back().kind == LogKind::denied);
    CHECK(log.back().reason == DenyReason::unregistered);
  }
  // Role separation: only validators ever seal.
  for (const auto& l : w->trace()) {
    if (l.find(" sealed ") != std::string::npos) CHECK(l.find(" v") != std::string::npos);
  }
}

TEST_CASE("live nodes over loopback sockets complete a request") {
  TestChain c({1, 1, 1, 1}, {}, 900, 1);
  auto tick = std::chrono::milliseconds(40);
  auto genesis_state = genesis(c.config, c.model);
  const auto gt = c.config.genesis_time;
  std::vector<std::unique_ptr<LiveRunner>> runners;
  std::vector<PeerAddress> peers;
  for (std::size_t i = 0; i < 3; ++i) {
    auto name = "v" + std::to_string(i);
    runners.push_back(std::make_unique<LiveRunner>(
        std::make_unique<ValidatorNode>(name, c.validators[i], genesis_state, c.model,
                                        std::make_shared<crypto::SeededEntropy>(i + 1)),
        0, gt, tick));
    peers.push_back({name, Role::validator, runners.back()->port()});
  }
  auto service = std::make_shared<storage::StorageService>(
      c.storage, c.config.validators, std::make_shared<crypto::SeededEntropy>(11));
  service->put_resource(3, "doc", Bytes{1, 2, 3});
  runners.push_back(std::make_unique<LiveRunner>(
      std::make_unique<StorageNode>("storage", service, c.storage, 120), 0, gt, tick));
  peers.push_back({"storage", Role::storage, runners.back()->port()});
  runners.push_back(std::make_unique<LiveRunner>(
      std::make_unique<UserNode>("admin", c.admin, std::make_shared<crypto::SeededEntropy>(12), 120), 0, gt, tick));
  peers.push_back({"admin", Role::user, runners.back()->port()});
  runners.push_back(std::make_unique<LiveRunner>(
      std::make_unique<UserNode>("u0", c.users[0], std::make_shared<crypto::SeededEntropy>(13), 120), 0, gt, tick));
  peers.push_back({"u0", Role::user, runners.back()->port()});
  for (auto& r : runners) {
    r->set_peers(peers);
    r->with_node([&](Node& n, NodeContext&) { n.trust_validators(c.config.validators); });
    r->start();
  }
  auto& admin = *runners[4];
  auto& user = *runners[5];
  admin.with_node([&](Node& n, NodeContext& ctx) {
    n.submit(ctx, build_setup_tx(c.admin, c.users[0].public_key, ctx.now()));
  });
  std::this_thread::sleep_for(tick * 6);
  RequestId id;
  user.with_node([&](Node& n, NodeContext& ctx) {
    id = dynamic_cast<UserNode&>(n).request_access(ctx, 3, Operation::op1);
  });
  RequestStatus status = RequestStatus::submitted;
  Bytes payload;
  for (int i = 0; i < 200 && status != RequestStatus::redeemed; ++i) {
    std::this_thread::sleep_for(tick);
    user.with_node([&](Node& n, NodeContext&) {
      const auto* t = dynamic_cast<UserNode&>(n).find(id);
      status = t->status;
      payload = t->payload;
    });
  }
  for (auto& r : runners) r->stop();
  CHECK(status == RequestStatus::redeemed);
  CHECK(payload == Bytes{1, 2, 3});
}
