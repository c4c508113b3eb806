#include "dlacb/net/world.hpp"

#include <algorithm>
#include <sstream>

#include "dlacb/core/builders.hpp"
#include "dlacb/core/encoding.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::net {

class World::Context final : public NodeContext {
 public:
  Context(World& world, std::string name) : world_(world), name_(std::move(name)) {}
  Timestamp now() const override { return world_.now(); }
  void send(const std::string& to, const Message& m) override { world_.send(name_, to, m); }
  std::vector<std::string> peers(Role role) const override {
    auto it = world_.roles_.find(role);
    return it == world_.roles_.end() ? std::vector<std::string>{} : it->second;
  }
  void trace(std::string_view event, std::string_view ref) override {
    world_.record(name_, event, ref);
  }
  bool retransmit() const override { return world_.net_.retransmit; }

 private:
  World& world_;
  std::string name_;
};

std::string ConvergenceReport::to_text() const {
  std::ostringstream out;
  out << "agreement " << (agreement ? "yes" : "no") << "\nquiescent " << (quiescent ? "yes" : "no")
      << "\nheight " << height << "\nticks " << ticks << "\n";
  for (const auto& [name, tip] : tips) out << "tip " << name << " " << tip.hex() << "\n";
  return out.str();
}

World::World(NetworkConfig net, WorldSetup setup)
    : net_(std::move(net)),
      setup_(std::move(setup)),
      rng_(net_.seed),
      key_entropy_(net_.seed ^ 0x6b657973ULL) {
  if (!(net_.drop_probability >= 0.0 && net_.drop_probability < 1.0)) {
    throw ConfigError("drop probability must be in [0, 1)");
  }
  if (net_.latency_min > net_.latency_max) throw ConfigError("latency range is inverted");
  const auto& g = setup_.genesis;
  if (setup_.validator_keys.size() != g.validators.size()) {
    throw ConfigError("validator keys do not match the genesis validator set");
  }
  for (std::size_t i = 0; i < g.validators.size(); ++i) {
    if (setup_.validator_keys[i].public_key != g.validators[i]) {
      throw ConfigError("validator key " + std::to_string(i) + " does not match genesis");
    }
  }
  if (setup_.storage_keys.public_key != g.storage_pk) {
    throw ConfigError("storage key does not match genesis");
  }
  if (std::find(g.admin_pks.begin(), g.admin_pks.end(), setup_.admin_keys.public_key) ==
      g.admin_pks.end()) {
    throw ConfigError("admin key is not a genesis admin");
  }
  auto state = ledger::genesis(g, setup_.model);
  for (std::size_t i = 0; i < g.validators.size(); ++i) {
    auto name = "v" + std::to_string(i);
    validators_.push_back(&install(std::make_unique<ValidatorNode>(
        name, setup_.validator_keys[i], state, setup_.model, entropy_for(name))));
  }
  auto service = std::make_shared<storage::StorageService>(
      setup_.storage_keys, g.validators, entropy_for("storage"), std::nullopt, setup_.link_lifetime);
  storage_ = &install(std::make_unique<StorageNode>("storage", service, setup_.storage_keys,
                                                    g.params.freshness_window));
  admin_ = &install(std::make_unique<UserNode>("admin", setup_.admin_keys, entropy_for("admin"),
                                               g.params.freshness_window));
}

World::~World() = default;

template <class N>
N& World::install(std::unique_ptr<N> node) {
  const auto& name = node->name();
  if (by_name_.count(name)) throw ConfigError("duplicate node name '" + name + "'");
  node->trust_validators(setup_.genesis.validators);
  N& ref = *node;
  by_name_[name] = &ref;
  roles_[ref.role()].push_back(name);
  contexts_[name] = std::make_unique<Context>(*this, name);
  nodes_.push_back(std::move(node));
  return ref;
}

std::shared_ptr<crypto::EntropySource> World::entropy_for(const std::string& name) const {
  Encoder e;
  e.str("dlacb/sim-node").u64(net_.seed).str(name);
  auto seed = crypto::hash(e.data());
  return std::make_shared<crypto::SeededEntropy>(seed.view());
}

Timestamp World::now() const { return setup_.genesis.genesis_time + tick_; }

UserNode& World::add_user(const std::string& name, KeyPair keys) {
  auto& u = install(std::make_unique<UserNode>(name, std::move(keys), entropy_for(name),
                                               setup_.genesis.params.freshness_window));
  users_.push_back(&u);
  return u;
}

UserNode& World::user(const std::string& name) {
  auto* n = dynamic_cast<UserNode*>(&node(name));
  if (!n) throw ArgumentError("'" + name + "' is not a user node");
  return *n;
}

Node& World::node(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ArgumentError("unknown node '" + name + "'");
  return *it->second;
}

NodeContext& World::context(const std::string& name) {
  auto it = contexts_.find(name);
  if (it == contexts_.end()) throw ArgumentError("unknown node '" + name + "'");
  return *it->second;
}

void World::submit_transaction(const std::string& origin, const core::Transaction& tx) {
  node(origin).submit(context(origin), tx);
}

void World::register_user(const PublicKey& pk) {
  submit_transaction("admin", core::build_setup_tx(setup_.admin_keys, pk, now()));
}

void World::send(const std::string& from, const std::string& to, const Message& m) {
  ++stats_.sent;
  if (crashed_.count(from)) return;
  if (net_.drop_probability > 0.0 && rng_.uniform() < net_.drop_probability) {
    ++stats_.dropped;
    return;
  }
  std::uint64_t extra = net_.latency_min;
  if (net_.latency_max > net_.latency_min) {
    extra += rng_.below(net_.latency_max - net_.latency_min + 1);
  }
  queue_.emplace(std::make_pair(tick_ + 1 + extra, seq_++), Envelope{from, to, m});
}

bool World::partitioned(const std::string& a, const std::string& b, std::uint64_t at) const {
  for (const auto& p : net_.partitions) {
    if (at < p.from_tick || at >= p.to_tick) continue;
    auto group_of = [&](const std::string& n) -> std::ptrdiff_t {
      for (std::size_t i = 0; i < p.groups.size(); ++i) {
        if (std::find(p.groups[i].begin(), p.groups[i].end(), n) != p.groups[i].end()) {
          return static_cast<std::ptrdiff_t>(i);
        }
      }
      return -1;
    };
    if (group_of(a) != group_of(b)) return true;
  }
  return false;
}

void World::record(const std::string& node, std::string_view event, std::string_view ref) {
  std::string line = std::to_string(tick_);
  line += ' ';
  line += node;
  line += ' ';
  line += event;
  line += ' ';
  line += ref.empty() ? "-" : ref;
  trace_.push_back(std::move(line));
}

void World::step() {
  ++tick_;
  while (!queue_.empty() && queue_.begin()->first.first <= tick_) {
    auto env = std::move(queue_.begin()->second);
    queue_.erase(queue_.begin());
    if (crashed_.count(env.to) || partitioned(env.from, env.to, tick_)) {
      ++stats_.dropped;
      continue;
    }
    auto it = by_name_.find(env.to);
    if (it == by_name_.end()) continue;
    ++stats_.delivered;
    it->second->on_message(*contexts_[env.to], env.from, env.message);
  }
  for (auto& n : nodes_) {
    if (!crashed_.count(n->name())) n->on_tick(*contexts_[n->name()]);
  }
}

void World::run(std::uint64_t ticks) {
  for (std::uint64_t i = 0; i < ticks; ++i) step();
}

bool World::quiescent() const {
  for (const auto& n : nodes_) {
    if (crashed_.count(n->name())) continue;
    if (n->unconfirmed_count() > 0) return false;
    if (auto* v = dynamic_cast<const ValidatorNode*>(n.get())) {
      if (!v->pool().empty() || v->undelivered_count() > 0) return false;
    }
    if (auto* a = dynamic_cast<const AdversaryNode*>(n.get()); a && !a->finished()) return false;
    if (auto* u = dynamic_cast<const UserNode*>(n.get())) {
      for (const auto& r : u->requests()) {
        if (r.status == RequestStatus::pending) return false;
        if (r.status == RequestStatus::link && r.correlation != 0) return false;
      }
    }
  }
  return true;
}

ConvergenceReport World::report() const {
  ConvergenceReport r;
  r.ticks = tick_;
  r.agreement = true;
  std::optional<Digest> tip;
  std::optional<Digest> digest;
  for (const auto* v : validators_) {
    if (crashed_.count(v->name())) continue;
    auto t = v->state().tip_hash();
    auto d = ledger::state_digest(v->state());
    r.tips[v->name()] = t;
    if (!tip) {
      tip = t;
      digest = d;
    } else if (t != *tip || d != *digest) {
      r.agreement = false;
    }
    r.height = std::max(r.height, v->state().height());
  }
  r.quiescent = quiescent();
  return r;
}

ConvergenceReport World::run_until_converged(std::uint64_t max_ticks) {
  for (std::uint64_t i = 0; i < max_ticks; ++i) {
    step();
    if (!quiescent()) continue;
    auto r = report();
    if (r.agreement) return r;
  }
  return report();
}

void World::crash(const std::string& name) {
  node(name);
  if (crashed_.insert(name).second) record(name, "crash", "-");
}

bool World::crashed(const std::string& name) const { return crashed_.count(name) > 0; }

AdversaryNode& World::inject_adversary(std::string_view behavior, std::uint32_t resource_id,
                                       core::Operation op) {
  auto b = parse_behavior(behavior);
  auto name = "adv" + std::to_string(adversaries_++);
  auto keys = crypto::generate_keypair(key_entropy_);
  Timestamp start = now() + 1;
  if (b == Behavior::replay_link || b == Behavior::reuse_nonce) {
    register_user(keys.public_key);
    start = now() + 4;
  }
  auto& adv = install(std::make_unique<AdversaryNode>(name, keys, entropy_for(name),
                                                      setup_.genesis.params.freshness_window, b,
                                                      start, resource_id, op));
  users_.push_back(&adv);
  record(name, "adversary", to_string(b));
  return adv;
}

std::string World::trace_text() const {
  std::string out;
  for (const auto& l : trace_) {
    out += l;
    out += '\n';
  }
  return out;
}

Digest World::digest() const {
  Encoder e;
  for (const auto* v : validators_) e.fixed(ledger::state_digest(v->state()));
  e.str(trace_text());
  return crypto::hash(e.data());
}

}  // namespace dlacb::net
