#include "dlacb/service/fixtures.hpp"

#include <chrono>
#include <set>
#include <sstream>

#include "dlacb/core/encoding.hpp"
#include "dlacb/decision/model_io.hpp"
#include "dlacb/decision/training.hpp"
#include "dlacb/ledger/ledger.hpp"
#include "dlacb/util/error.hpp"
#include "dlacb/util/file.hpp"

namespace dlacb::service {

namespace fs = std::filesystem;
using decision::DecisionModel;
using decision::Effect;
using decision::PriorityRule;

DecisionModel train_default_model(const decision::SyntheticPolicy& policy, std::uint64_t seed,
                                  TrainingReport* report) {
  auto rows = decision::generate_dataset(policy, kFixtureUsers, kFixtureResources);
  auto split = decision::split_dataset(std::move(rows), 0.2, seed);
  auto train_set = decision::to_samples(split.train);
  auto held = decision::to_samples(split.heldout);
  decision::TrainParams params;
  params.seed = seed;
  auto start = std::chrono::steady_clock::now();
  auto result = decision::train(DecisionModel::random(decision::default_dims(), seed), train_set,
                                params);
  if (report) {
    report->seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report->heldout_accuracy = decision::accuracy(result.model, held);
    report->train_accuracy = decision::accuracy(result.model, train_set);
    report->train_rows = train_set.size();
    report->heldout_rows = held.size();
  }
  return std::move(result.model);
}

PinnedPairs pick_pairs(const DecisionModel& model, const decision::SyntheticPolicy& policy) {
  decision::DecisionEngine engine(std::make_shared<const DecisionModel>(model), {});
  std::vector<Pair> allows;
  std::vector<Pair> denies;
  std::set<std::uint32_t> used;
  for (std::uint32_t u = 0; u < kFixtureUsers && (allows.size() < 3 || denies.size() < 3); ++u) {
    for (std::uint32_t r = 0; r < kFixtureResources && !used.count(u); ++r) {
      auto d = engine.decide(u, r);
      for (std::size_t i = 0; i < decision::kOperationCount; ++i) {
        auto op = static_cast<Operation>(i);
        // Only pairs where the model agrees with the ground truth.
        if (d.access_list[i] != policy.grant(u, r, op)) continue;
        auto& bucket = d.access_list[i] ? allows : denies;
        if (bucket.size() < 3) {
          bucket.push_back({u, r, op});
          used.insert(u);
          break;
        }
      }
    }
  }
  if (allows.size() < 3 || denies.size() < 3) {
    throw ConfigError("model does not yield both allow and deny witnesses");
  }
  return PinnedPairs{allows[0], denies[0], allows[1], denies[1], allows[2], denies[2]};
}

std::vector<PriorityRule> pinned_rules(const PinnedPairs& pins) {
  auto rule = [](const Pair& p, Effect e) {
    return PriorityRule{10, p.user, p.resource, p.op, e};
  };
  return {rule(pins.allow_rule_deny, Effect::deny), rule(pins.deny_rule_allow, Effect::allow),
          rule(pins.allow_rule_allow, Effect::allow), rule(pins.deny_rule_deny, Effect::deny)};
}

namespace {

struct Keys {
  KeyPair admin, storage, outsider;
  std::vector<KeyPair> validators, users;
};

Keys derive_keys(std::uint64_t seed) {
  crypto::SeededEntropy entropy(seed);
  Keys k;
  k.admin = crypto::generate_keypair(entropy);
  k.storage = crypto::generate_keypair(entropy);
  for (std::size_t i = 0; i < kFixtureValidators; ++i) {
    k.validators.push_back(crypto::generate_keypair(entropy));
  }
  for (std::uint32_t i = 0; i < kFixtureUsers; ++i) k.users.push_back(crypto::generate_keypair(entropy));
  k.outsider = crypto::generate_keypair(entropy);
  return k;
}

ledger::GenesisConfig genesis_for(const FixtureSet& s) {
  ledger::GenesisConfig g;
  g.admin_pks = {s.admin.public_key};
  for (const auto& v : s.validators) g.validators.push_back(v.public_key);
  g.storage_pk = s.storage.public_key;
  g.engine_fingerprint = decision::model_fingerprint(*s.model);
  g.rules = s.rules;
  g.genesis_time = kFixtureGenesisTime;
  return g;
}

}  // namespace

FixtureSet make_fixtures(std::uint64_t seed, std::shared_ptr<const DecisionModel> model) {
  FixtureSet s;
  s.seed = seed;
  auto keys = derive_keys(seed);
  s.admin = keys.admin;
  s.storage = keys.storage;
  s.outsider = keys.outsider;
  s.validators = keys.validators;
  s.users = keys.users;
  s.policy = decision::SyntheticPolicy(seed);
  if (!model) model = std::make_shared<const DecisionModel>(train_default_model(s.policy, seed));
  s.model = std::move(model);
  s.pins = pick_pairs(*s.model, s.policy);
  s.rules = pinned_rules(s.pins);
  s.genesis = genesis_for(s);
  return s;
}

std::string resource_name(std::uint32_t id) {
  std::ostringstream out;
  out << "record-" << id;
  return out.str();
}

Bytes resource_payload(std::uint32_t id) {
  auto text = "resource " + std::to_string(id) + " contents\n";
  return Bytes(text.begin(), text.end());
}

std::string user_key_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "user%03zu", i);
  return buf;
}

namespace {

std::string format_pair(const Pair& p) {
  return std::to_string(p.user) + " " + std::to_string(p.resource) + " " +
         decision::operation_name(p.op);
}

Pair parse_pair(std::istringstream& in) {
  Pair p;
  std::string op;
  if (!(in >> p.user >> p.resource >> op)) throw ConfigError("fixture.txt: malformed pair");
  auto parsed = decision::parse_operation(op);
  if (!parsed) throw ConfigError("fixture.txt: bad operation " + op);
  p.op = *parsed;
  return p;
}

void write_key(const fs::path& path, const KeyPair& k) {
  crypto::write_key_file(path, k.secret_key.view());
}

}  // namespace

void write_fixtures(const FixtureSet& s, const fs::path& dir) {
  fs::create_directories(dir / "keys");
  write_key(dir / "keys" / "admin.key", s.admin);
  write_key(dir / "keys" / "storage.key", s.storage);
  write_key(dir / "keys" / "outsider.key", s.outsider);
  for (std::size_t i = 0; i < s.validators.size(); ++i) {
    write_key(dir / "keys" / ("v" + std::to_string(i) + ".key"), s.validators[i]);
  }
  for (std::size_t i = 0; i < s.users.size(); ++i) {
    write_key(dir / "keys" / (user_key_name(i) + ".key"), s.users[i]);
  }
  decision::save_model(*s.model, dir / "model.bin");
  auto rules = decision::format_rules(s.rules);
  write_file(dir / "rules.txt", as_bytes(rules));
  write_file(dir / "genesis.bin", core::encode(ledger::make_genesis_block(s.genesis)));
  std::ostringstream meta;
  meta << "seed " << s.seed << "\n"
       << "users " << s.users.size() << "\n"
       << "model_allow " << format_pair(s.pins.model_allow) << "\n"
       << "model_deny " << format_pair(s.pins.model_deny) << "\n"
       << "allow_rule_deny " << format_pair(s.pins.allow_rule_deny) << "\n"
       << "deny_rule_allow " << format_pair(s.pins.deny_rule_allow) << "\n"
       << "allow_rule_allow " << format_pair(s.pins.allow_rule_allow) << "\n"
       << "deny_rule_deny " << format_pair(s.pins.deny_rule_deny) << "\n";
  write_file(dir / "fixture.txt", as_bytes(meta.str()));
}

FixtureSet load_fixtures(const fs::path& dir) {
  if (!fs::exists(dir / "fixture.txt")) {
    throw ConfigError("no fixtures in " + dir.string() + " (run init first)");
  }
  FixtureSet s;
  std::size_t n_users = 0;
  try {
    std::istringstream meta(read_text_file(dir / "fixture.txt"));
    std::string line;
    while (std::getline(meta, line)) {
      std::istringstream in(line);
      std::string key;
      if (!(in >> key)) continue;
      if (key == "seed") in >> s.seed;
      else if (key == "users") in >> n_users;
      else if (key == "model_allow") s.pins.model_allow = parse_pair(in);
      else if (key == "model_deny") s.pins.model_deny = parse_pair(in);
      else if (key == "allow_rule_deny") s.pins.allow_rule_deny = parse_pair(in);
      else if (key == "deny_rule_allow") s.pins.deny_rule_allow = parse_pair(in);
      else if (key == "allow_rule_allow") s.pins.allow_rule_allow = parse_pair(in);
      else if (key == "deny_rule_deny") s.pins.deny_rule_deny = parse_pair(in);
    }
    auto keys = dir / "keys";
    s.admin = crypto::read_keypair_file(keys / "admin.key");
    s.storage = crypto::read_keypair_file(keys / "storage.key");
    s.outsider = crypto::read_keypair_file(keys / "outsider.key");
    for (std::size_t i = 0; i < kFixtureValidators; ++i) {
      s.validators.push_back(crypto::read_keypair_file(keys / ("v" + std::to_string(i) + ".key")));
    }
    for (std::size_t i = 0; i < n_users; ++i) {
      s.users.push_back(crypto::read_keypair_file(keys / (user_key_name(i) + ".key")));
    }
    s.model = std::make_shared<const DecisionModel>(decision::load_model(dir / "model.bin"));
    s.rules = decision::load_rules_file(dir / "rules.txt");
    s.genesis = ledger::decode_genesis_config(
        core::decode_block(read_file(dir / "genesis.bin")).genesis_payload);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("fixtures: ") + e.what());
  }
  s.policy = decision::SyntheticPolicy(s.seed);
  if (s.genesis.engine_fingerprint != decision::model_fingerprint(*s.model)) {
    throw ConfigError("fixtures: model.bin does not match the genesis fingerprint");
  }
  if (s.genesis.rules != s.rules) throw ConfigError("fixtures: rules.txt does not match genesis");
  return s;
}

}  // namespace dlacb::service
