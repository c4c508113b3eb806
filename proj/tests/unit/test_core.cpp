#include "doctest.h"

#include <set>

#include "dlacb/core/builders.hpp"
#include "dlacb/core/encoding.hpp"
#include "dlacb/core/render.hpp"
#include "dlacb/util/error.hpp"
#include "tx_gen.hpp"

using namespace dlacb;
using namespace dlacb::core;

namespace {

struct Keys {
  crypto::SeededEntropy entropy{100};
  KeyPair admin = crypto::generate_keypair(entropy);
  KeyPair user = crypto::generate_keypair(entropy);
  KeyPair storage = crypto::generate_keypair(entropy);
  KeyPair validator = crypto::generate_keypair(entropy);
};

ReqInfo info(std::uint32_t resource, Operation op, std::uint8_t id) {
  ReqInfo r{resource, op, {}};
  r.request_id.bytes.fill(id);
  return r;
}

}  // namespace

TEST_CASE("built transactions verify and are deterministic") {
  Keys k;
  auto setup = build_setup_tx(k.admin, k.user.public_key, 1000);
  CHECK(verify_transaction_signature(setup, k.storage.public_key));
  CHECK(encode(Transaction(setup)) == encode(Transaction(build_setup_tx(k.admin, k.user.public_key, 1000))));

  auto req = build_access_request_tx(k.user, info(7, Operation::op2, 1), 1000);
  CHECK(verify_transaction_signature(req, k.storage.public_key));
  CHECK_NOTHROW(build_access_request_tx(k.user, info(0, Operation::op1, 2), 1000));
  auto bad = info(7, Operation::op1, 3);
  bad.operation = static_cast<Operation>(4);
  CHECK_THROWS_AS(build_access_request_tx(k.user, bad, 1000), ValidationError);

  Nonce n;
  n.bytes.fill(9);
  auto link = build_link_tx(k.storage, req.req_info.request_id, 1001, nonce_commitment(n), Bytes{1, 2, 3});
  CHECK(verify_transaction_signature(link, k.storage.public_key));
  auto st = build_storage_tx(k.storage, n, 1002, k.user.public_key);
  CHECK(verify_transaction_signature(st, k.storage.public_key));
  // Storage record signed by someone other than storage.
  CHECK_FALSE(verify_transaction_signature(build_storage_tx(k.user, n, 1002, k.user.public_key),
                                           k.storage.public_key));
}

TEST_CASE("any single field edit breaks the signature") {
  Keys k;
  auto setup = build_setup_tx(k.admin, k.user.public_key, 1000);
  auto s1 = setup;
  s1.user_pk = k.storage.public_key;
  CHECK_FALSE(verify_transaction_signature(s1, k.storage.public_key));
  auto s2 = setup;
  s2.time += 1;
  CHECK_FALSE(verify_transaction_signature(s2, k.storage.public_key));
  auto s3 = setup;
  s3.admin_pk = k.validator.public_key;
  CHECK_FALSE(verify_transaction_signature(s3, k.storage.public_key));

  auto req = build_access_request_tx(k.user, info(7, Operation::op2, 1), 1000);
  auto r1 = req;
  r1.time -= 1;
  CHECK_FALSE(verify_transaction_signature(r1, k.storage.public_key));
  auto r2 = req;
  r2.req_info.resource_id = 8;
  CHECK_FALSE(verify_transaction_signature(r2, k.storage.public_key));
  auto r3 = req;
  r3.req_info.operation = Operation::op3;
  CHECK_FALSE(verify_transaction_signature(r3, k.storage.public_key));
  auto r4 = req;
  r4.req_info.request_id.bytes[0] ^= 1;
  CHECK_FALSE(verify_transaction_signature(r4, k.storage.public_key));

  Nonce n;
  auto link = build_link_tx(k.storage, req.req_info.request_id, 1001, nonce_commitment(n), Bytes{1, 2, 3});
  auto l1 = link;
  l1.ciphertext[1] ^= 1;
  CHECK_FALSE(verify_transaction_signature(l1, k.storage.public_key));
  auto l2 = link;
  l2.issued_at += 1;
  CHECK_FALSE(verify_transaction_signature(l2, k.storage.public_key));
  auto l3 = link;
  l3.nonce_commitment.bytes[5] ^= 1;
  CHECK_FALSE(verify_transaction_signature(l3, k.storage.public_key));

  auto st = build_storage_tx(k.storage, n, 1002, k.user.public_key);
  auto t1 = st;
  t1.nonce.bytes[0] = 1;
  CHECK_FALSE(verify_transaction_signature(t1, k.storage.public_key));
  auto t2 = st;
  t2.user_pk = k.admin.public_key;
  CHECK_FALSE(verify_transaction_signature(t2, k.storage.public_key));
}

TEST_CASE("verified records are accepted only from the local contract") {
  VerifiedTx v;
  v.time = 5;
  v.user_bits = decision::binary_repr(5, 16);
  v.req_bits = decision::binary_repr(7, 16);
  CHECK_FALSE(verify_transaction_signature(v, {}));
  v.contract_origin = true;
  CHECK(verify_transaction_signature(v, {}));
  // The flag is local: it does not survive the wire.
  auto decoded = std::get<VerifiedTx>(decode_transaction(encode(Transaction(v))));
  CHECK_FALSE(decoded.contract_origin);
  CHECK(decoded == v);
}

TEST_CASE("encoding round trips random transactions") {
  decision::SplitMix64 rng(77);
  for (int i = 0; i < 2000; ++i) {
    auto tx = txgen::random_transaction(rng);
    auto bytes = encode(tx);
    auto back = decode_transaction(bytes);
    REQUIRE(back == tx);
    REQUIRE(encode(back) == bytes);
  }
}

TEST_CASE("encoding is injective over ten thousand distinct transactions") {
  decision::SplitMix64 rng(78);
  std::set<Bytes> encodings;
  std::set<Digest> ids;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto tx = txgen::random_transaction(rng);
    // Stamp a distinct timestamp so the corpus is distinct by construction.
    std::visit(
        [i](auto& t) {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>, LinkTx>) {
            t.issued_at = i;
          } else {
            t.time = i;
          }
        },
        tx);
    encodings.insert(encode(tx));
    ids.insert(tx_id(tx));
  }
  CHECK(encodings.size() == 10000);
  CHECK(ids.size() == 10000);
}

TEST_CASE("tx ids") {
  decision::SplitMix64 rng(79);
  auto tx = txgen::random_transaction(rng);
  CHECK(tx_id(tx) == tx_id(tx));
  CHECK(tx_id(tx).bytes.size() == 32);
  AccReqTx a{};
  auto b = a;
  b.req_info.request_id.bytes[15] = 1;
  CHECK(tx_id(a) != tx_id(b));
}

TEST_CASE("decoder rejects malformed records") {
  Keys k;
  auto bytes = encode(Transaction(build_setup_tx(k.admin, k.user.public_key, 1000)));
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_transaction(trailing), FormatError);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_transaction(truncated), FormatError);
  auto bad_kind = bytes;
  bad_kind[0] = 9;
  CHECK_THROWS_AS(decode_transaction(bad_kind), FormatError);

  VerifiedTx v;
  v.user_bits = decision::binary_repr(1, 3);
  auto vb = encode(Transaction(v));
  // 1 kind + 8 time + 2 width, then the packed byte; set a padding bit.
  vb[11] |= 0x01;
  CHECK_THROWS_AS(decode_transaction(vb), FormatError);
}

TEST_CASE("block sealing and hash chain") {
  Keys k;
  Block genesis;
  genesis.genesis_payload = {1, 2, 3};
  Block b1;
  b1.height = 1;
  b1.prev_hash = block_hash(genesis);
  b1.time = 10;
  b1.transactions.push_back(build_setup_tx(k.admin, k.user.public_key, 10));
  b1 = seal(b1, k.validator);
  CHECK(verify_block_signature(b1));
  CHECK(b1.validator_pk == k.validator.public_key);
  CHECK(decode_block(encode(b1)) == b1);

  auto tampered = b1;
  tampered.time = 11;
  CHECK_FALSE(verify_block_signature(tampered));
  auto g2 = genesis;
  g2.genesis_payload[0] = 9;
  CHECK(block_hash(g2) != b1.prev_hash);

  auto enc = encode(b1);
  for (std::size_t i = 0; i < enc.size(); i += 7) {
    auto m = enc;
    m[i] ^= 0x20;
    try {
      auto d = decode_block(m);
      CHECK_FALSE((verify_block_signature(d) && block_hash(d) == block_hash(b1)));
    } catch (const FormatError&) {
    }
  }
}

TEST_CASE("text rendering names fields") {
  Keys k;
  auto text = to_text(Transaction(build_setup_tx(k.admin, k.user.public_key, 1000)));
  CHECK(text.rfind("T_Setup", 0) == 0);
  CHECK(text.find(k.user.public_key.hex().substr(0, 8)) != std::string::npos);
}
