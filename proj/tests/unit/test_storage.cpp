#include "doctest.h"

#include <filesystem>

#include "chain_fixture.hpp"
#include "dlacb/storage/storage.hpp"
#include "dlacb/util/error.hpp"

using namespace fixture;
using namespace dlacb::storage;

namespace {

struct World {
  TestChain chain;
  std::shared_ptr<crypto::SeededEntropy> entropy = std::make_shared<crypto::SeededEntropy>(900);
  StorageService storage{chain.storage, chain.config.validators, entropy};

  World() {
    for (std::uint32_t id = 0; id < 4; ++id) {
      storage.put_resource(id, "doc-" + std::to_string(id), Bytes(10 + id, static_cast<std::uint8_t>(id)));
    }
  }

  ledger::ResultEnvelope envelope(const KeyPair& user, std::uint32_t resource, Operation op,
                                  decision::AccessList list, std::uint8_t id) {
    ledger::RequestResult r;
    r.request_id.bytes.fill(id);
    r.user_pk = user.public_key;
    r.resource_id = resource;
    r.operation = op;
    r.access_list = list;
    r.granted = list[decision::index_of(op)];
    r.time = 1000;
    return ledger::encrypt_request_result(r, chain.storage.public_key, chain.validators[0], *entropy);
  }
};

}  // namespace

TEST_CASE("resources") {
  World w;
  auto m = w.storage.get_metadata(2);
  CHECK(m.digest == crypto::hash(Bytes(12, 2)));
  CHECK(m.size == 12);
  CHECK_THROWS_AS(w.storage.put_resource(2, "again", {}), ValidationError);
  CHECK_THROWS_AS(w.storage.get_metadata(99), NotFoundError);
  CHECK(w.storage.list_resources().size() == 4);
}

TEST_CASE("resources persist in a data directory") {
  auto dir = std::filesystem::temp_directory_path() / "dlacb_test_storage";
  std::filesystem::remove_all(dir);
  TestChain c;
  auto entropy = std::make_shared<crypto::SeededEntropy>(1);
  {
    StorageService s(c.storage, c.config.validators, entropy, dir);
    s.put_resource(5, "report v1", Bytes{1, 2, 3});
  }
  StorageService s(c.storage, c.config.validators, entropy, dir);
  auto m = s.get_metadata(5);
  CHECK(m.name == "report v1");
  CHECK(std::filesystem::exists(dir / "objects" / m.digest.hex()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("granted result yields a link only the requester can open") {
  World w;
  const auto& user = w.chain.users[0];
  auto out = w.storage.handle_request_result(w.envelope(user, 1, Operation::op2, {false, true, false, false}, 1), 1000);
  REQUIRE(out);
  REQUIRE(std::holds_alternative<LinkTx>(out.value()));
  const auto& tx = std::get<LinkTx>(out.value());
  CHECK(core::verify_transaction_signature(tx, w.chain.storage.public_key));
  auto grant = open_link(tx, user);
  CHECK(grant.resource_id == 1);
  CHECK(tx.nonce_commitment == core::nonce_commitment(grant.nonce));
  CHECK(tx.issued_at == 1000);

  std::vector<KeyPair> others = w.chain.validators;
  others.push_back(w.chain.admin);
  others.push_back(w.chain.storage);
  for (std::size_t i = 1; i < w.chain.users.size(); ++i) others.push_back(w.chain.users[i]);
  for (const auto& k : others) CHECK_THROWS_AS(open_link(tx, k), DecryptError);
}

TEST_CASE("denied and replayed results produce no link") {
  World w;
  const auto& user = w.chain.users[0];
  auto denied = w.storage.handle_request_result(w.envelope(user, 1, Operation::op2, {true, false, true, true}, 2), 1000);
  REQUIRE(denied);
  CHECK(std::holds_alternative<Denial>(denied.value()));
  CHECK(w.storage.link_count() == 0);

  auto env = w.envelope(user, 1, Operation::op1, {true, false, false, false}, 3);
  CHECK(w.storage.handle_request_result(env, 1000));
  auto replay = w.storage.handle_request_result(env, 1001);
  CHECK(replay.error() == ResultRejection::already_served);
  CHECK(w.storage.link_count() == 1);

  auto forged = w.envelope(user, 1, Operation::op1, {true, false, false, false}, 4);
  forged.validator_sig.bytes[0] ^= 1;
  CHECK(w.storage.handle_request_result(forged, 1000).error() == ResultRejection::forged);

  auto wrong_target = w.envelope(user, 1, Operation::op1, {true, true, true, true}, 5);
  auto reenc = ledger::encrypt_request_result(ledger::decode_request_result(crypto::decrypt(w.chain.storage.secret_key, wrong_target.ciphertext)),
                                              user.public_key, w.chain.validators[0], *w.entropy);
  CHECK(w.storage.handle_request_result(reenc, 1000).error() == ResultRejection::undecryptable);
  CHECK(w.storage.audit().size() >= 4);
}

TEST_CASE("redemption") {
  World w;
  const auto& user = w.chain.users[0];
  auto out = w.storage.handle_request_result(w.envelope(user, 3, Operation::op2, {false, true, false, true}, 1), 1000);
  auto grant = open_link(std::get<LinkTx>(out.value()), user);

  Nonce wrong = grant.nonce;
  wrong.bytes[0] ^= 1;
  LinkToken unknown;
  CHECK(w.storage.redeem(unknown, grant.nonce, Operation::op2, 1001).error() == RedeemError::unknown_token);
  CHECK(w.storage.redeem(grant.token, wrong, Operation::op2, 1001).error() == RedeemError::wrong_nonce);
  CHECK(w.storage.redeem(grant.token, grant.nonce, Operation::op1, 1001).error() ==
        RedeemError::operation_not_permitted);

  auto ok = w.storage.redeem(grant.token, grant.nonce, Operation::op2, 1001);
  REQUIRE(ok);
  CHECK(ok.value().payload == Bytes(13, 3));
  const auto& st = ok.value().storage_tx;
  CHECK(st.nonce == grant.nonce);
  CHECK(st.user_pk == user.public_key);
  CHECK(core::verify_transaction_signature(st, w.chain.storage.public_key));

  CHECK(w.storage.redeem(grant.token, grant.nonce, Operation::op2, 1002).error() == RedeemError::already_redeemed);
  CHECK(w.storage.redeem(grant.token, grant.nonce, Operation::op4, 1002).error() == RedeemError::already_redeemed);
  CHECK(w.storage.redemption_count() == 1);
}

TEST_CASE("link expiry") {
  World w;
  CHECK(w.storage.expire_links(5000) == 0);
  const auto& user = w.chain.users[0];
  auto a = open_link(std::get<LinkTx>(w.storage.handle_request_result(w.envelope(user, 0, Operation::op1, {true, true, true, true}, 1), 1000).value()), user);
  auto b = open_link(std::get<LinkTx>(w.storage.handle_request_result(w.envelope(user, 0, Operation::op1, {true, true, true, true}, 2), 1000).value()), user);
  CHECK(w.storage.redeem(b.token, b.nonce, Operation::op1, 1300));
  CHECK(w.storage.expire_links(1300) == 0);
  CHECK(w.storage.expire_links(1301) == 1);
  CHECK(w.storage.expire_links(1302) == 0);
  CHECK(w.storage.redeem(a.token, a.nonce, Operation::op1, 1200).error() == RedeemError::expired);

  World v;
  auto c = open_link(std::get<LinkTx>(v.storage.handle_request_result(v.envelope(user, 0, Operation::op1, {true, true, true, true}, 1), 1000).value()), user);
  CHECK(v.storage.redeem(c.token, c.nonce, Operation::op1, 1301).error() == RedeemError::expired);
}

TEST_CASE("payloads only flow through granted links") {
  // Small world: every user, resource and operation; the requested op is granted
  // only on even (user + resource + op).
  World w;
  int served = 0, expected = 0;
  std::uint8_t id = 0;
  for (std::size_t u = 0; u < w.chain.users.size(); ++u) {
    for (std::uint32_t r = 0; r < 4; ++r) {
      for (std::size_t op = 0; op < 4; ++op) {
        decision::AccessList list{};
        list[op] = (u + r + op) % 2 == 0;
        if (list[op]) ++expected;
        auto out = w.storage.handle_request_result(
            w.envelope(w.chain.users[u], r, static_cast<Operation>(op), list, ++id), 1000);
        REQUIRE(out);
        if (!std::holds_alternative<LinkTx>(out.value())) continue;
        auto g = open_link(std::get<LinkTx>(out.value()), w.chain.users[u]);
        for (std::size_t try_op = 0; try_op < 4; ++try_op) {
          auto red = w.storage.redeem(g.token, g.nonce, static_cast<Operation>(try_op), 1001);
          if (red) {
            CHECK(try_op == op);
            CHECK(red.value().payload == Bytes(10 + r, static_cast<std::uint8_t>(r)));
            ++served;
          }
        }
      }
    }
  }
  CHECK(served == expected);
}
