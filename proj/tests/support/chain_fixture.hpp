#pragma once

#include <memory>

#include "dlacb/core/builders.hpp"
#include "dlacb/decision/model_io.hpp"
#include "dlacb/ledger/ledger.hpp"

namespace fixture {

using namespace dlacb;
using namespace dlacb::core;
using namespace dlacb::ledger;

// Zero-weight model whose output biases set the four scores directly.
inline std::shared_ptr<const decision::DecisionModel> biased_model(std::array<double, 4> bias) {
  auto m = decision::DecisionModel::zeros(decision::default_dims());
  m.layers().back().bias.assign(bias.begin(), bias.end());
  return std::make_shared<const decision::DecisionModel>(std::move(m));
}

struct TestChain {
  crypto::SeededEntropy entropy;
  KeyPair admin;
  KeyPair storage;
  std::vector<KeyPair> validators;
  std::vector<KeyPair> users;
  std::shared_ptr<const decision::DecisionModel> model;
  GenesisConfig config;
  LedgerState state;
  std::uint64_t next_id = 1;

  explicit TestChain(std::array<double, 4> bias = {1, 1, 1, 1},
                 std::vector<decision::PriorityRule> rules = {}, std::uint64_t seed = 500,
                 std::size_t n_users = 4)
      : entropy(seed) {
    admin = crypto::generate_keypair(entropy);
    storage = crypto::generate_keypair(entropy);
    for (int i = 0; i < 3; ++i) validators.push_back(crypto::generate_keypair(entropy));
    for (std::size_t i = 0; i < n_users; ++i) users.push_back(crypto::generate_keypair(entropy));
    model = biased_model(bias);
    config.admin_pks = {admin.public_key};
    for (const auto& v : validators) config.validators.push_back(v.public_key);
    config.storage_pk = storage.public_key;
    config.engine_fingerprint = decision::model_fingerprint(*model);
    config.rules = std::move(rules);
    config.genesis_time = 1'700'000'000;
    state = genesis(config, model);
  }

  std::uint64_t next_height() const { return state.height() + 1; }
  Timestamp slot_time(std::uint64_t h) const { return config.genesis_time + h; }
  Timestamp now() const { return slot_time(next_height()); }
  const KeyPair& leader(std::uint64_t h) const { return validators[h % validators.size()]; }

  SealOutcome seal_next(const std::vector<Transaction>& pool) {
    auto h = next_height();
    return build_block(state, pool, leader(h), h, slot_time(h));
  }

  // Seals the pool into the next block and applies it; returns the outcome.
  Applied commit(const std::vector<Transaction>& pool) {
    auto sealed = seal_next(pool);
    auto r = apply_block(state, sealed.block);
    if (!r) throw std::runtime_error("commit rejected: " + to_string(r.error().reason) + " " +
                                     r.error().detail);
    state = r.value().state;
    return std::move(r.value());
  }

  SetupTx register_tx(const KeyPair& user) { return build_setup_tx(admin, user.public_key, now()); }

  AccReqTx request_tx(const KeyPair& user, std::uint32_t resource, Operation op) {
    ReqInfo info{resource, op, {}};
    for (std::size_t i = 0; i < 8; ++i) info.request_id.bytes[i] = static_cast<std::uint8_t>(next_id >> (8 * i));
    ++next_id;
    return build_access_request_tx(user, info, now());
  }

  Nonce fresh_nonce() {
    Nonce n;
    entropy.fill(n.bytes);
    return n;
  }

  LinkTx link_tx(const RequestId& id, const Nonce& n) {
    return build_link_tx(storage, id, now(), nonce_commitment(n), Bytes{0xaa});
  }

  StorageTx storage_tx(const Nonce& n, const KeyPair& user) {
    return build_storage_tx(storage, n, now(), user.public_key);
  }
};

}  // namespace fixture
