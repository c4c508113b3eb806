#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dlacb/core/types.hpp"
#include "dlacb/decision/model.hpp"
#include "dlacb/net/live.hpp"

namespace dlacb::service {

// key = value lines, '#' starts a comment. Keys:
//   role      validator | storage | user
//   name      node name, unique in the peer list
//   host      listen address for the API (default 127.0.0.1)
//   port      node port
//   api_port  HTTP API port, 0 for none
//   data_dir  chain and resource storage
//   key genesis model rules   file paths, relative to the config file
//   tick_ms   length of one ledger second in wall milliseconds
//   peer      "<name> <role> <port>", repeated
// DLACB_PORT, DLACB_API_PORT and DLACB_DATA_DIR override the file.
struct ServiceConfig {
  net::Role role = net::Role::validator;
  std::string name;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::uint16_t api_port = 0;
  std::filesystem::path data_dir = "dlacb-data";
  std::filesystem::path key_file;
  std::filesystem::path genesis_file;
  std::filesystem::path model_file;
  std::filesystem::path rules_file;
  std::uint64_t tick_ms = 1000;
  std::vector<net::PeerAddress> peers;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

// Throw ConfigError with the offending line.
ServiceConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env());
void apply_env(ServiceConfig& config, const EnvLookup& env);
std::string format_config(const ServiceConfig& config);

net::Role parse_role(std::string_view s);  // throws ConfigError

// Everything a node needs at startup, checked for mutual consistency.
struct NodeAssets {
  core::KeyPair keys;
  core::Block genesis_block;
  std::shared_ptr<const decision::DecisionModel> model;
};
NodeAssets load_assets(const ServiceConfig& config);

}  // namespace dlacb::service
