#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <thread>

#include "dlacb/decision/model_io.hpp"
#include "dlacb/decision/policy.hpp"
#include "dlacb/decision/training.hpp"
#include "dlacb/ledger/ledger.hpp"
#include "dlacb/net/messages.hpp"
#include "dlacb/scenario/harness.hpp"
#include "dlacb/service/client.hpp"
#include "dlacb/service/config.hpp"
#include "dlacb/service/http.hpp"
#include "dlacb/storage/storage.hpp"
#include "dlacb/util/error.hpp"
#include "dlacb/util/file.hpp"

namespace fs = std::filesystem;
using namespace dlacb;
using namespace dlacb::service;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7100;
};

Endpoint parse_endpoint(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos) throw UsageError("--api wants host:port, got '" + s + "'");
  Endpoint e;
  e.host = s.substr(0, colon);
  try {
    auto port = std::stoul(s.substr(colon + 1));
    if (port == 0 || port > 65535) throw std::out_of_range("port");
    e.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw UsageError("bad port in '" + s + "'");
  }
  return e;
}

template <class T>
int report_failure(const ApiResult<T>& r) {
  std::cerr << "error: " << to_string(r.status);
  if (!r.detail.empty()) std::cerr << ": " << r.detail;
  std::cerr << "\n";
  return r.status == Status::usage_error ? kExitUsage : kExitFailure;
}

// init ---------------------------------------------------------------------

struct InitOptions {
  fs::path dir = "dlacb-data";
  std::uint64_t seed = 1;
  std::uint16_t base_port = 7000;
  std::uint64_t tick_ms = 1000;
  bool force = false;
};

void stock_resources(const FixtureSet& fx, const fs::path& dir) {
  storage::StorageService store(fx.storage, fx.genesis.validators, crypto::system_entropy(), dir);
  for (std::uint32_t r = 0; r < kFixtureResources; ++r) {
    store.put_resource(r, resource_name(r), resource_payload(r));
  }
}

int run_init(const InitOptions& o) {
  if (fs::exists(o.dir / "fixture.txt") && !o.force) {
    throw ConfigError(o.dir.string() + " already holds fixtures; pass --force to replace them");
  }
  // Chains and stored resources belong to the old genesis.
  fs::remove_all(o.dir / "state");
  TrainingReport tr;
  decision::SyntheticPolicy policy(o.seed);
  auto model = std::make_shared<const decision::DecisionModel>(
      train_default_model(policy, o.seed, &tr));
  auto fx = make_fixtures(o.seed, model);
  fx.genesis.genesis_time = static_cast<core::Timestamp>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  write_fixtures(fx, o.dir);

  std::vector<net::PeerAddress> peers;
  for (std::size_t i = 0; i < fx.validators.size(); ++i) {
    peers.push_back({"v" + std::to_string(i), net::Role::validator,
                     static_cast<std::uint16_t>(o.base_port + i)});
  }
  peers.push_back({"storage", net::Role::storage,
                   static_cast<std::uint16_t>(o.base_port + fx.validators.size())});
  fs::create_directories(o.dir / "nodes");
  for (std::size_t i = 0; i < peers.size(); ++i) {
    ServiceConfig c;
    c.role = peers[i].role;
    c.name = peers[i].name;
    c.port = peers[i].port;
    c.api_port = c.role == net::Role::validator ? static_cast<std::uint16_t>(o.base_port + 100 + i) : 0;
    c.data_dir = fs::path("..") / "state" / c.name;
    c.key_file = fs::path("..") / "keys" / (c.name + ".key");
    c.genesis_file = fs::path("..") / "genesis.bin";
    c.model_file = fs::path("..") / "model.bin";
    c.rules_file = fs::path("..") / "rules.txt";
    c.tick_ms = o.tick_ms;
    for (const auto& p : peers) {
      if (p.name != c.name) c.peers.push_back(p);
    }
    write_file(o.dir / "nodes" / (c.name + ".conf"), as_bytes(format_config(c)));
  }
  stock_resources(fx, o.dir / "state" / "storage");

  std::cout << "fixtures written to " << o.dir.string() << "\n"
            << "users " << fx.users.size() << ", resources " << kFixtureResources
            << ", validators " << fx.validators.size() << "\n"
            << "model held-out accuracy " << tr.heldout_accuracy << " (" << tr.seconds << " s)\n"
            << "node configs in " << (o.dir / "nodes").string() << ", APIs on ports "
            << o.base_port + 100 << "-" << o.base_port + 102 << "\n";
  return 0;
}

// node start ---------------------------------------------------------------

struct NodeOptions {
  std::string config;
  std::string role;
  std::string name;
  std::optional<std::uint16_t> port;
  std::optional<std::uint16_t> api_port;
  std::optional<std::string> data_dir;
  double run_for = 0;
  bool quiet = false;
};

fs::path chain_file(const ServiceConfig& c) { return c.data_dir / "chain.bin"; }

void save_chain(const ServiceConfig& c, const ledger::LedgerState& state) {
  net::SyncResponse resp{ledger::chain_of(state)};
  write_file(chain_file(c), net::encode(net::Message{resp}));
}

std::optional<ledger::Chain> load_chain(const ServiceConfig& c) {
  if (!fs::exists(chain_file(c))) return std::nullopt;
  auto m = net::decode_message(read_file(chain_file(c)));
  const auto* resp = std::get_if<net::SyncResponse>(&m);
  if (!resp) throw ConfigError(chain_file(c).string() + " does not hold a chain");
  return resp->blocks;
}

int run_node(const NodeOptions& o) {
  ServiceConfig c;
  if (!o.config.empty()) c = load_config(o.config);
  if (!o.role.empty()) c.role = parse_role(o.role);
  if (!o.name.empty()) c.name = o.name;
  if (o.port) c.port = *o.port;
  if (o.api_port) c.api_port = *o.api_port;
  if (o.data_dir) c.data_dir = *o.data_dir;
  if (c.name.empty()) throw ConfigError("node name missing");
  if (c.role == net::Role::user) throw ConfigError("user nodes run through the client commands");

  auto assets = load_assets(c);
  auto genesis = ledger::decode_genesis_config(assets.genesis_block.genesis_payload);
  auto tick = std::chrono::milliseconds(c.tick_ms);
  fs::create_directories(c.data_dir);

  std::unique_ptr<net::Node> node;
  if (c.role == net::Role::validator) {
    node = std::make_unique<net::ValidatorNode>(
        c.name, assets.keys, ledger::genesis_from_block(assets.genesis_block, assets.model),
        assets.model, crypto::system_entropy());
  } else {
    auto store = std::make_shared<storage::StorageService>(
        assets.keys, genesis.validators, crypto::system_entropy(), c.data_dir);
    node = std::make_unique<net::StorageNode>(c.name, store, assets.keys,
                                              genesis.params.freshness_window);
  }
  node->trust_validators(genesis.validators);

  net::LiveRunner runner(std::move(node), c.port, genesis.genesis_time, tick);
  runner.set_clock_origin(std::chrono::system_clock::time_point(std::chrono::seconds(genesis.genesis_time)));
  runner.set_peers(c.peers);
  if (!o.quiet) runner.set_trace_sink([](const std::string& line) { std::cout << line << "\n" << std::flush; });

  auto* validator = c.role == net::Role::validator ? &runner : nullptr;
  if (validator) {
    if (auto chain = load_chain(c)) {
      runner.with_node([&](net::Node& n, net::NodeContext& ctx) {
        if (!static_cast<net::ValidatorNode&>(n).consider_chain(ctx, *chain)) {
          std::cerr << "warning: stored chain rejected, starting from genesis\n";
        }
      });
    }
  }

  std::shared_ptr<LiveBackend> backend;
  std::unique_ptr<LocalService> local;
  std::unique_ptr<HttpServer> http;
  if (validator && c.api_port) {
    std::string storage_name;
    for (const auto& p : c.peers) {
      if (p.role == net::Role::storage) storage_name = p.name;
    }
    if (storage_name.empty()) throw ConfigError("no storage peer configured for the API");
    backend = std::make_shared<LiveBackend>(runner, storage_name);
    local = std::make_unique<LocalService>(backend);
    http = std::make_unique<HttpServer>(*local, c.host, c.api_port);
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  runner.start();
  if (http) http->start();
  std::cerr << c.name << " (" << net::to_string(c.role) << ") on port " << runner.port();
  if (http) std::cerr << ", API on " << c.host << ":" << http->port();
  std::cerr << "\n";

  auto started = std::chrono::steady_clock::now();
  std::uint64_t saved_height = 0;
  auto persist = [&] {
    if (!validator) return;
    runner.with_node([&](net::Node& n, net::NodeContext&) {
      const auto& state = static_cast<net::ValidatorNode&>(n).state();
      if (state.height() != saved_height) {
        save_chain(c, state);
        saved_height = state.height();
      }
    });
  };
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    persist();
    if (o.run_for > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() >= o.run_for) {
      break;
    }
  }
  if (http) http->stop();
  runner.stop();
  persist();
  return 0;
}

// client commands ------------------------------------------------------------

KeyPair read_key(const std::string& path) {
  try {
    return crypto::read_keypair_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int run_register(const Endpoint& api, const std::string& admin_key, const std::string& user_key,
                 const std::string& pk_hex) {
  HttpService svc(api.host, api.port);
  Client client(svc);
  PublicKey pk;
  if (!pk_hex.empty()) {
    try {
      pk = PublicKey::from_hex(pk_hex);
    } catch (const Error& e) {
      throw UsageError(std::string("bad public key: ") + e.what());
    }
  } else if (!user_key.empty()) {
    pk = read_key(user_key).public_key;
  } else {
    throw UsageError("register-user needs --user-key or --pk");
  }
  auto r = client.register_user(read_key(admin_key), pk);
  if (!r.ok()) return report_failure(r);
  std::cout << "tx " << r.value->hex() << "\n";
  return 0;
}

int run_request(const Endpoint& api, const std::string& key, std::uint32_t resource,
                const std::string& op) {
  HttpService svc(api.host, api.port);
  Client client(svc);
  auto r = client.request_access(read_key(key), resource, op);
  if (!r.ok()) return report_failure(r);
  std::cout << r.value->hex() << "\n";
  return 0;
}

int run_poll(const Endpoint& api, const std::string& key, const std::string& id_hex, double wait) {
  HttpService svc(api.host, api.port);
  Client client(svc);
  RequestId id;
  try {
    id = RequestId::from_hex(id_hex);
  } catch (const Error& e) {
    throw UsageError(std::string("bad request id: ") + e.what());
  }
  auto user = read_key(key);
  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(wait);
  for (;;) {
    auto r = client.poll(id, user);
    if (!r.ok()) return report_failure(r);
    const auto& out = *r.value;
    if (out.state == PollState::pending && std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(250));
      continue;
    }
    switch (out.state) {
      case PollState::pending: std::cout << "pending\n"; break;
      case PollState::denied: std::cout << "denied " << out.reason << "\n"; break;
      case PollState::link:
        std::cout << "link\ntoken " << out.link->grant.token.hex() << "\nnonce "
                  << out.link->grant.nonce.hex() << "\nresource " << out.link->grant.resource_id
                  << "\nexpires_at " << out.link->expires_at << "\n";
        break;
    }
    return 0;
  }
}

int run_redeem(const Endpoint& api, const std::string& token_hex, const std::string& nonce_hex,
               const std::string& op, const std::string& out_path) {
  HttpService svc(api.host, api.port);
  Client client(svc);
  LinkToken token;
  Nonce nonce;
  try {
    token = LinkToken::from_hex(token_hex);
    nonce = Nonce::from_hex(nonce_hex);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto r = client.redeem(token, nonce, op);
  if (!r.ok()) return report_failure(r);
  if (out_path.empty()) {
    std::cout.write(reinterpret_cast<const char*>(r.value->data()),
                    static_cast<std::streamsize>(r.value->size()));
  } else {
    write_file(out_path, *r.value);
    std::cout << r.value->size() << " bytes written to " << out_path << "\n";
  }
  return 0;
}

int run_logs(const Endpoint& api, const LogQuery& q) {
  HttpService svc(api.host, api.port);
  Client client(svc);
  auto r = client.logs(q);
  if (!r.ok()) return report_failure(r);
  for (const auto& e : *r.value) std::cout << ledger::to_text(e) << "\n";
  return 0;
}

int run_chain(const Endpoint& api, std::uint64_t from, std::uint64_t to) {
  HttpService svc(api.host, api.port);
  Client client(svc);
  auto r = client.chain(from, to);
  if (!r.ok()) return report_failure(r);
  for (const auto& b : *r.value) std::cout << to_text(b) << "\n";
  return 0;
}

int run_keygen(const std::string& out) {
  auto k = crypto::generate_keypair(*crypto::system_entropy());
  crypto::write_key_file(out, k.secret_key.view());
  std::cout << k.public_key.hex() << "\n";
  return 0;
}

// scenario and model -----------------------------------------------------------

FixtureSet fixtures_at(const fs::path& dir, std::uint64_t seed) {
  if (fs::exists(dir / "fixture.txt")) return load_fixtures(dir);
  std::cerr << "no fixtures in " << dir.string() << ", generating (seed " << seed << ")\n";
  auto fx = make_fixtures(seed);
  write_fixtures(fx, dir);
  return fx;
}

int run_scenarios(std::vector<std::string> names, const fs::path& dir, std::uint64_t seed,
                  bool trace) {
  auto fx = fixtures_at(dir, seed);
  bool all_passed = true;
  std::vector<std::pair<std::string, bool>> table;
  if (names.size() == 1 && names[0] == "all") {
    names = scenario::builtin_scenario_names();
    names.push_back("matrix");
  }
  for (const auto& name : names) {
    if (name == "matrix") {
      auto m = scenario::run_matrix(fx, seed);
      std::cout << "scenario matrix: " << (m.passed() ? "PASS" : "FAIL") << "\n" << m.to_text();
      if (trace) {
        for (const auto& t : m.trace) std::cout << t << "\n";
      }
      table.emplace_back(name, m.passed());
      all_passed = all_passed && m.passed();
      continue;
    }
    auto rep = scenario::run_scenario(scenario::builtin_scenario(name, fx, seed), fx);
    if (trace) {
      std::cout << rep.to_text();
    } else {
      std::cout << "scenario " << rep.name << ": " << (rep.passed() ? "PASS" : "FAIL") << "\n"
                << "outcome " << rep.summary << "\n";
      for (const auto& a : rep.assertions) {
        std::cout << (a.passed ? "  ok   " : "  FAIL ") << a.text << "\n";
      }
      for (const auto& l : rep.log) std::cout << "  " << l << "\n";
    }
    table.emplace_back(name, rep.passed());
    all_passed = all_passed && rep.passed();
  }
  if (table.size() > 1) {
    std::cout << "\nsummary\n";
    for (const auto& [name, ok] : table) std::cout << "  " << name << " " << (ok ? "PASS" : "FAIL") << "\n";
  }
  return all_passed ? 0 : kExitFailure;
}

int run_model_train(const std::string& out, std::uint64_t seed) {
  TrainingReport tr;
  decision::SyntheticPolicy policy(seed);
  auto model = train_default_model(policy, seed, &tr);
  decision::save_model(model, out);
  std::cout << "train rows " << tr.train_rows << ", held-out rows " << tr.heldout_rows << "\n"
            << "train accuracy " << tr.train_accuracy << "\n"
            << "held-out accuracy " << tr.heldout_accuracy << "\n"
            << "seconds " << tr.seconds << "\n"
            << "model " << out << " " << fs::file_size(out) << " bytes, fingerprint "
            << decision::model_fingerprint(model).hex() << "\n";
  return 0;
}

int run_model_eval(const std::string& path, std::uint64_t seed, double threshold) {
  auto model = decision::load_model(path);
  decision::SyntheticPolicy policy(seed);
  auto rows = decision::generate_dataset(policy, kFixtureUsers, kFixtureResources);
  auto split = decision::split_dataset(rows, 0.2, seed);
  auto all = decision::to_samples(rows);
  auto held = decision::to_samples(split.heldout);
  auto held_acc = decision::accuracy(model, held);
  std::cout << "population accuracy " << decision::accuracy(model, all) << "\n"
            << "held-out accuracy " << held_acc << "\n";
  return held_acc >= threshold ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blockchain access control node and client"};
  app.require_subcommand(1);
  std::string api_text = "127.0.0.1:7100";
  auto add_api = [&](CLI::App* cmd) {
    cmd->add_option("--api", api_text, "validator API as host:port")->capture_default_str();
  };
  std::function<int()> action;

  InitOptions init;
  auto* init_cmd = app.add_subcommand("init", "generate keys, model, rules, genesis and node configs");
  init_cmd->add_option("--dir", init.dir)->capture_default_str();
  init_cmd->add_option("--seed", init.seed)->capture_default_str();
  init_cmd->add_option("--base-port", init.base_port)->capture_default_str();
  init_cmd->add_option("--tick-ms", init.tick_ms)->capture_default_str();
  init_cmd->add_flag("--force", init.force);
  init_cmd->callback([&] { action = [&] { return run_init(init); }; });

  std::string keygen_out;
  auto* keygen_cmd = app.add_subcommand("keygen", "write a fresh key file, print its public key");
  keygen_cmd->add_option("--out", keygen_out)->required();
  keygen_cmd->callback([&] { action = [&] { return run_keygen(keygen_out); }; });

  NodeOptions node;
  auto* node_cmd = app.add_subcommand("node", "run a node");
  node_cmd->require_subcommand(1);
  auto* start_cmd = node_cmd->add_subcommand("start", "start a validator or storage node");
  start_cmd->add_option("--config", node.config, "node config file");
  start_cmd->add_option("--role", node.role, "validator | storage");
  start_cmd->add_option("--name", node.name);
  start_cmd->add_option("--port", node.port);
  start_cmd->add_option("--api-port", node.api_port);
  start_cmd->add_option("--data-dir", node.data_dir);
  start_cmd->add_option("--run-for", node.run_for, "stop after this many seconds");
  start_cmd->add_flag("--quiet", node.quiet, "no trace output");
  start_cmd->callback([&] { action = [&] { return run_node(node); }; });

  std::string admin_key, user_key, pk_hex;
  auto* reg_cmd = app.add_subcommand("register-user", "submit a user registration");
  add_api(reg_cmd);
  reg_cmd->add_option("--admin-key", admin_key)->required();
  reg_cmd->add_option("--user-key", user_key);
  reg_cmd->add_option("--pk", pk_hex);
  reg_cmd->callback([&] {
    action = [&] { return run_register(parse_endpoint(api_text), admin_key, user_key, pk_hex); };
  });

  std::string key, op = "op1";
  std::uint32_t resource = 0;
  auto* req_cmd = app.add_subcommand("request-access", "submit an access request, print its id");
  add_api(req_cmd);
  req_cmd->add_option("--key", key)->required();
  req_cmd->add_option("--resource", resource)->required();
  req_cmd->add_option("--op", op)->capture_default_str();
  req_cmd->callback([&] {
    action = [&] { return run_request(parse_endpoint(api_text), key, resource, op); };
  });

  std::string id_hex;
  double wait = 0;
  auto* poll_cmd = app.add_subcommand("poll", "show a request's status");
  add_api(poll_cmd);
  poll_cmd->add_option("--key", key)->required();
  poll_cmd->add_option("--id", id_hex)->required();
  poll_cmd->add_option("--wait", wait, "seconds to keep polling while pending");
  poll_cmd->callback([&] { action = [&] { return run_poll(parse_endpoint(api_text), key, id_hex, wait); }; });

  std::string token_hex, nonce_hex, out_path;
  auto* redeem_cmd = app.add_subcommand("redeem", "exchange a link for the resource");
  add_api(redeem_cmd);
  redeem_cmd->add_option("--token", token_hex)->required();
  redeem_cmd->add_option("--nonce", nonce_hex)->required();
  redeem_cmd->add_option("--op", op)->capture_default_str();
  redeem_cmd->add_option("--out", out_path, "write the payload here instead of stdout");
  redeem_cmd->callback([&] {
    action = [&] { return run_redeem(parse_endpoint(api_text), token_hex, nonce_hex, op, out_path); };
  });

  LogQuery query;
  std::string q_user, q_resource, q_decision, q_kind, q_from, q_to;
  auto* logs_cmd = app.add_subcommand("logs", "query the access log");
  add_api(logs_cmd);
  logs_cmd->add_option("--user", q_user, "public key hex");
  logs_cmd->add_option("--resource", q_resource);
  logs_cmd->add_option("--decision", q_decision, "none | granted | denied");
  logs_cmd->add_option("--kind", q_kind);
  logs_cmd->add_option("--from", q_from, "minimum block height");
  logs_cmd->add_option("--to", q_to, "maximum block height");
  logs_cmd->callback([&] {
    action = [&] {
      auto set = [](std::optional<std::string>& field, const std::string& v, CLI::App* cmd,
                    const char* name) {
        if (cmd->count(name)) field = v;
      };
      set(query.user, q_user, logs_cmd, "--user");
      set(query.resource, q_resource, logs_cmd, "--resource");
      set(query.decision, q_decision, logs_cmd, "--decision");
      set(query.kind, q_kind, logs_cmd, "--kind");
      set(query.from, q_from, logs_cmd, "--from");
      set(query.to, q_to, logs_cmd, "--to");
      return run_logs(parse_endpoint(api_text), query);
    };
  });

  std::uint64_t from = 0, to = std::numeric_limits<std::uint64_t>::max();
  auto* chain_cmd = app.add_subcommand("chain", "list block summaries");
  add_api(chain_cmd);
  chain_cmd->add_option("--from", from);
  chain_cmd->add_option("--to", to);
  chain_cmd->callback([&] { action = [&] { return run_chain(parse_endpoint(api_text), from, to); }; });

  std::vector<std::string> scenario_names;
  fs::path fixture_dir = "dlacb-data";
  std::uint64_t seed = 1;
  bool trace = false;
  auto* scenario_cmd = app.add_subcommand("scenario", "simulated end-to-end scenarios");
  scenario_cmd->require_subcommand(1);
  auto* run_cmd = scenario_cmd->add_subcommand("run", "run scenarios: 1 2 3 4 replay reuse tamper unauthorized matrix all");
  run_cmd->add_option("names", scenario_names)->required();
  run_cmd->add_option("--dir", fixture_dir, "fixture directory, generated when missing")->capture_default_str();
  run_cmd->add_option("--seed", seed)->capture_default_str();
  run_cmd->add_flag("--trace", trace, "print the full trace");
  run_cmd->callback([&] {
    action = [&] { return run_scenarios(scenario_names, fixture_dir, seed, trace); };
  });

  std::string model_path = "model.bin";
  double threshold = 0.95;
  auto* model_cmd = app.add_subcommand("model", "decision model");
  model_cmd->require_subcommand(1);
  auto* train_cmd = model_cmd->add_subcommand("train", "train on the synthetic policy");
  train_cmd->add_option("--out", model_path)->capture_default_str();
  train_cmd->add_option("--seed", seed)->capture_default_str();
  train_cmd->callback([&] { action = [&] { return run_model_train(model_path, seed); }; });
  auto* eval_cmd = model_cmd->add_subcommand("eval", "accuracy against the synthetic policy");
  eval_cmd->add_option("--model", model_path)->capture_default_str();
  eval_cmd->add_option("--seed", seed)->capture_default_str();
  eval_cmd->add_option("--min-accuracy", threshold)->capture_default_str();
  eval_cmd->callback([&] { action = [&] { return run_model_eval(model_path, seed, threshold); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  try {
    return action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
