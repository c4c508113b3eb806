#include "dlacb/service/config.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "dlacb/core/encoding.hpp"
#include "dlacb/decision/model_io.hpp"
#include "dlacb/decision/rules.hpp"
#include "dlacb/ledger/state.hpp"
#include "dlacb/util/error.hpp"
#include "dlacb/util/file.hpp"

namespace dlacb::service {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_uint(const std::string& v, const std::string& where) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty() ||
      x > std::numeric_limits<T>::max()) {
    throw ConfigError(where + ": invalid number '" + v + "'");
  }
  return static_cast<T>(x);
}

fs::path resolve(const fs::path& base, const std::string& v) {
  fs::path p(v);
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

net::Role parse_role(std::string_view s) {
  if (s == "validator") return net::Role::validator;
  if (s == "storage") return net::Role::storage;
  if (s == "user") return net::Role::user;
  throw ConfigError("unknown role '" + std::string(s) + "'");
}

ServiceConfig parse_config(std::string_view text, const fs::path& base_dir) {
  ServiceConfig c;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (trim(raw).empty()) continue;
    auto where = "config line " + std::to_string(line_no);
    auto eq = raw.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    auto key = trim(std::string_view(raw).substr(0, eq));
    auto value = trim(std::string_view(raw).substr(eq + 1));
    if (key == "role") c.role = parse_role(value);
    else if (key == "name") c.name = value;
    else if (key == "host") c.host = value;
    else if (key == "port") c.port = parse_uint<std::uint16_t>(value, where);
    else if (key == "api_port") c.api_port = parse_uint<std::uint16_t>(value, where);
    else if (key == "data_dir") c.data_dir = resolve(base_dir, value);
    else if (key == "key") c.key_file = resolve(base_dir, value);
    else if (key == "genesis") c.genesis_file = resolve(base_dir, value);
    else if (key == "model") c.model_file = resolve(base_dir, value);
    else if (key == "rules") c.rules_file = resolve(base_dir, value);
    else if (key == "tick_ms") c.tick_ms = parse_uint<std::uint64_t>(value, where);
    else if (key == "peer") {
      std::istringstream p(value);
      std::string name, role, port;
      if (!(p >> name >> role >> port)) throw ConfigError(where + ": peer needs name role port");
      c.peers.push_back({name, parse_role(role), parse_uint<std::uint16_t>(port, where)});
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  if (c.name.empty()) throw ConfigError("config: name is required");
  if (c.tick_ms == 0) throw ConfigError("config: tick_ms must be positive");
  return c;
}

void apply_env(ServiceConfig& c, const EnvLookup& env) {
  if (auto v = env("DLACB_PORT")) c.port = parse_uint<std::uint16_t>(*v, "DLACB_PORT");
  if (auto v = env("DLACB_API_PORT")) c.api_port = parse_uint<std::uint16_t>(*v, "DLACB_API_PORT");
  if (auto v = env("DLACB_DATA_DIR")) c.data_dir = *v;
}

ServiceConfig load_config(const fs::path& path, const EnvLookup& env) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  auto c = parse_config(text, path.parent_path());
  apply_env(c, env);
  return c;
}

std::string format_config(const ServiceConfig& c) {
  std::ostringstream out;
  out << "role = " << net::to_string(c.role) << "\n"
      << "name = " << c.name << "\n"
      << "host = " << c.host << "\n"
      << "port = " << c.port << "\n"
      << "api_port = " << c.api_port << "\n"
      << "data_dir = " << c.data_dir.string() << "\n"
      << "key = " << c.key_file.string() << "\n"
      << "genesis = " << c.genesis_file.string() << "\n"
      << "model = " << c.model_file.string() << "\n"
      << "rules = " << c.rules_file.string() << "\n"
      << "tick_ms = " << c.tick_ms << "\n";
  for (const auto& p : c.peers) {
    out << "peer = " << p.name << " " << net::to_string(p.role) << " " << p.port << "\n";
  }
  return out.str();
}

NodeAssets load_assets(const ServiceConfig& c) {
  NodeAssets a;
  try {
    a.keys = crypto::read_keypair_file(c.key_file);
    a.genesis_block = core::decode_block(read_file(c.genesis_file));
    a.model = std::make_shared<const decision::DecisionModel>(decision::load_model(c.model_file));
    auto genesis = ledger::decode_genesis_config(a.genesis_block.genesis_payload);
    if (genesis.engine_fingerprint != decision::model_fingerprint(*a.model)) {
      throw ConfigError("model " + c.model_file.string() + " does not match the genesis fingerprint");
    }
    if (!c.rules_file.empty() && decision::load_rules_file(c.rules_file) != genesis.rules) {
      throw ConfigError("rules " + c.rules_file.string() + " differ from the genesis rules");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return a;
}

}  // namespace dlacb::service
