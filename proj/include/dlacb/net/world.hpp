#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dlacb/decision/rng.hpp"
#include "dlacb/net/adversary.hpp"
#include "dlacb/net/nodes.hpp"

namespace dlacb::net {

// While active, messages between nodes in different groups are dropped.
// Nodes listed in no group form one implicit group of their own.
struct Partition {
  std::uint64_t from_tick = 0;
  std::uint64_t to_tick = 0;  // exclusive
  std::vector<std::vector<std::string>> groups;
};

struct NetworkConfig {
  std::uint64_t seed = 1;
  // Extra ticks on top of next-tick delivery, drawn uniformly from [min, max].
  std::uint64_t latency_min = 0;
  std::uint64_t latency_max = 0;
  double drop_probability = 0.0;
  std::vector<Partition> partitions;
  bool retransmit = true;
};

struct WorldSetup {
  ledger::GenesisConfig genesis;
  std::shared_ptr<const decision::DecisionModel> model;
  std::vector<KeyPair> validator_keys;  // same order as genesis.validators
  KeyPair storage_keys;
  KeyPair admin_keys;
  std::uint64_t link_lifetime = storage::kDefaultLinkLifetime;
};

struct ConvergenceReport {
  bool agreement = false;
  bool quiescent = false;
  std::uint64_t height = 0;
  std::uint64_t ticks = 0;
  std::map<std::string, Digest> tips;  // honest validators only
  std::string to_text() const;
};

struct NetworkStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

// Single-threaded discrete-event simulator. One tick is one second of ledger
// time; tick 0 is the genesis time.
class World {
 public:
  // Throws ConfigError on drop >= 1, an inverted latency range, or keys that
  // do not match the genesis configuration.
  World(NetworkConfig net, WorldSetup setup);
  ~World();

  std::uint64_t tick() const { return tick_; }
  Timestamp now() const;

  ValidatorNode& validator(std::size_t i) { return *validators_.at(i); }
  std::size_t validator_count() const { return validators_.size(); }
  StorageNode& storage() { return *storage_; }
  UserNode& admin() { return *admin_; }
  UserNode& add_user(const std::string& name, KeyPair keys);
  UserNode& user(const std::string& name);
  Node& node(const std::string& name);
  // Context for driving a node from outside the event loop.
  NodeContext& context(const std::string& name);

  void submit_transaction(const std::string& origin, const core::Transaction& tx);
  // Submits a T_Setup from the admin node.
  void register_user(const PublicKey& pk);

  void step();
  void run(std::uint64_t ticks);
  // Steps until agreement with nothing left in flight, or max_ticks elapse.
  ConvergenceReport run_until_converged(std::uint64_t max_ticks);
  ConvergenceReport report() const;

  void crash(const std::string& name);
  bool crashed(const std::string& name) const;

  // Throws ConfigError on an unknown behavior name. The adversary gets its own
  // key; for link attacks it is registered first and starts a few ticks later.
  AdversaryNode& inject_adversary(std::string_view behavior, std::uint32_t resource_id = 0,
                                  core::Operation op = core::Operation::op1);

  const std::vector<std::string>& trace() const { return trace_; }
  std::string trace_text() const;
  const NetworkStats& stats() const { return stats_; }
  // Hash over every validator state digest and the full trace.
  Digest digest() const;

 private:
  class Context;
  friend class Context;

  struct Envelope {
    std::string from;
    std::string to;
    Message message;
  };

  template <class N>
  N& install(std::unique_ptr<N> node);
  void send(const std::string& from, const std::string& to, const Message& m);
  bool partitioned(const std::string& a, const std::string& b, std::uint64_t at) const;
  void record(const std::string& node, std::string_view event, std::string_view ref);
  std::shared_ptr<crypto::EntropySource> entropy_for(const std::string& name) const;
  bool quiescent() const;

  NetworkConfig net_;
  WorldSetup setup_;
  decision::SplitMix64 rng_;
  std::uint64_t tick_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<std::string, Node*> by_name_;
  std::map<std::string, std::unique_ptr<Context>> contexts_;
  std::map<Role, std::vector<std::string>> roles_;
  std::vector<ValidatorNode*> validators_;
  StorageNode* storage_ = nullptr;
  UserNode* admin_ = nullptr;
  std::vector<UserNode*> users_;
  std::set<std::string> crashed_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, Envelope> queue_;
  std::vector<std::string> trace_;
  NetworkStats stats_;
  std::uint64_t adversaries_ = 0;
  crypto::SeededEntropy key_entropy_;
};

}  // namespace dlacb::net
