#include "dlacb/decision/rules.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "dlacb/util/error.hpp"

namespace dlacb::decision {

bool PriorityRule::matches(std::uint32_t user_index, std::uint32_t resource_id,
                           Operation op) const {
  return (!user || *user == user_index) && (!resource || *resource == resource_id) &&
         (!operation || *operation == op);
}

void validate_rules(std::span<const PriorityRule> rules) {
  using Key = std::tuple<std::uint32_t, std::optional<std::uint32_t>,
                         std::optional<std::uint32_t>, std::optional<Operation>>;
  std::set<Key> seen;
  for (const auto& r : rules) {
    if (!seen.emplace(r.priority, r.user, r.resource, r.operation).second) {
      throw ValidationError("duplicate rule: " + format_rule(r));
    }
  }
}

AccessDecision apply_priority_rules(std::span<const PriorityRule> rules, std::uint32_t user_index,
                                    std::uint32_t resource_id, const AccessList& model_access) {
  AccessDecision d;
  d.access_list = model_access;
  for (std::size_t i = 0; i < kOperationCount; ++i) {
    const auto op = static_cast<Operation>(i);
    const PriorityRule* best = nullptr;
    for (const auto& r : rules) {
      if (!r.matches(user_index, resource_id, op)) continue;
      if (!best || r.priority > best->priority ||
          (r.priority == best->priority && r.effect == Effect::deny)) {
        best = &r;
      }
    }
    if (best) {
      d.access_list[i] = best->effect == Effect::allow;
      d.overridden[i] = true;
    }
  }
  return d;
}

namespace {

std::optional<std::uint32_t> parse_u32_field(std::string_view tok, std::size_t line,
                                             const char* what) {
  if (tok == "*") return std::nullopt;
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size()) {
    throw FormatError("rules line " + std::to_string(line) + ": invalid " + what + " '" +
                      std::string(tok) + "'");
  }
  return v;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<PriorityRule> parse_rules(std::string_view text) {
  std::vector<PriorityRule> rules;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 5) {
      throw FormatError("rules line " + std::to_string(line) + ": expected 5 fields, got " +
                        std::to_string(tok.size()));
    }
    PriorityRule r;
    auto prio = parse_u32_field(tok[0], line, "priority");
    if (!prio) throw FormatError("rules line " + std::to_string(line) + ": priority cannot be *");
    r.priority = *prio;
    r.user = parse_u32_field(tok[1], line, "user");
    r.resource = parse_u32_field(tok[2], line, "resource");
    if (tok[3] != "*") {
      r.operation = parse_operation(tok[3]);
      if (!r.operation) {
        throw FormatError("rules line " + std::to_string(line) + ": invalid operation '" +
                          tok[3] + "'");
      }
    }
    auto eff = upper(tok[4]);
    if (eff == "ALLOW") {
      r.effect = Effect::allow;
    } else if (eff == "DENY") {
      r.effect = Effect::deny;
    } else {
      throw FormatError("rules line " + std::to_string(line) + ": invalid effect '" + tok[4] +
                        "'");
    }
    rules.push_back(r);
  }
  try {
    validate_rules(rules);
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  return rules;
}

std::vector<PriorityRule> load_rules_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open rules file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

std::string format_rule(const PriorityRule& r) {
  std::ostringstream out;
  out << r.priority << ' ' << (r.user ? std::to_string(*r.user) : "*") << ' '
      << (r.resource ? std::to_string(*r.resource) : "*") << ' '
      << (r.operation ? operation_name(*r.operation) : "*") << ' '
      << (r.effect == Effect::allow ? "ALLOW" : "DENY");
  return out.str();
}

std::string format_rules(std::span<const PriorityRule> rules) {
  std::string out = "# priority user resource op effect\n";
  for (const auto& r : rules) out += format_rule(r) + "\n";
  return out;
}

}  // namespace dlacb::decision
