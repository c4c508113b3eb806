#pragma once

#include <algorithm>
#include <memory>

#include "dlacb/decision/training.hpp"
#include "dlacb/service/client.hpp"
#include "dlacb/service/fixtures.hpp"

namespace svcfix {

using namespace dlacb;
using namespace dlacb::service;

// Fixtures over a briefly trained model: enough for the pinned witnesses.
inline const FixtureSet& quick_fixtures() {
  static const FixtureSet set = [] {
    decision::SyntheticPolicy policy(3);
    auto rows = decision::generate_dataset(policy, kFixtureUsers, kFixtureResources);
    decision::TrainParams p;
    p.epochs = 15;
    auto model = decision::train(decision::DecisionModel::random(decision::default_dims(), 3),
                                 decision::to_samples(rows), p)
                     .model;
    return make_fixtures(3, std::make_shared<const decision::DecisionModel>(std::move(model)));
  }();
  return set;
}

inline std::uint32_t highest_pinned_user(const PinnedPairs& p) {
  return std::max({p.model_allow.user, p.model_deny.user, p.allow_rule_deny.user,
                   p.deny_rule_allow.user, p.allow_rule_allow.user, p.deny_rule_deny.user});
}

inline net::WorldSetup world_setup(const FixtureSet& f) {
  net::WorldSetup s;
  s.genesis = f.genesis;
  s.model = f.model;
  s.validator_keys = f.validators;
  s.storage_keys = f.storage;
  s.admin_keys = f.admin;
  return s;
}

inline net::NetworkConfig net_config(std::uint64_t seed) {
  net::NetworkConfig c;
  c.seed = seed;
  return c;
}

// Simulated network behind a LocalService; users 0..n-1 registered in order.
struct SimStack {
  const FixtureSet& fx;
  std::unique_ptr<net::World> world;
  std::shared_ptr<SimBackend> backend;
  LocalService service;
  Client client;

  explicit SimStack(const FixtureSet& f, std::size_t n_users, std::uint64_t seed = 1)
      : fx(f),
        world(std::make_unique<net::World>(net_config(seed), world_setup(f))),
        backend(std::make_shared<SimBackend>(*world)),
        service(backend),
        client(service, std::make_shared<crypto::SeededEntropy>(seed + 100)) {
    for (std::uint32_t r = 0; r < kFixtureResources; ++r) {
      world->storage().service().put_resource(r, resource_name(r), resource_payload(r));
    }
    for (std::size_t i = 0; i < n_users; ++i) {
      auto r = client.register_user(f.admin, f.users[i].public_key);
      if (!r.ok()) throw std::runtime_error("registration failed: " + r.detail);
    }
  }
};

}  // namespace svcfix
