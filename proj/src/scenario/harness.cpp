#include "dlacb/scenario/harness.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dlacb/ledger/ledger.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::scenario {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

std::string join_kinds(const std::vector<LogKind>& kinds) {
  std::string out;
  for (const auto& k : kinds) out += (out.empty() ? "" : ",") + ledger::to_string(k);
  return out;
}

net::WorldSetup setup_from(const FixtureSet& f) {
  net::WorldSetup s;
  s.genesis = f.genesis;
  s.model = f.model;
  s.validator_keys = f.validators;
  s.storage_keys = f.storage;
  s.admin_keys = f.admin;
  return s;
}

class Run {
 public:
  Run(const ScenarioScript& script, const FixtureSet& fx)
      : script_(script), fx_(fx), world_(script.net, setup_from(fx)) {
    for (std::uint32_t r = 0; r < service::kFixtureResources; ++r) {
      world_.storage().service().put_resource(r, service::resource_name(r),
                                              service::resource_payload(r));
    }
    if (script.registered_users > fx.users.size()) {
      throw ConfigError("script registers more users than the fixtures hold");
    }
    for (std::size_t i = 0; i < script.registered_users; ++i) register_user(i);
    origin_ = world_.tick();
  }

  ScenarioReport execute() {
    auto actions = script_.actions;
    std::stable_sort(actions.begin(), actions.end(),
                     [](const Action& a, const Action& b) { return a.at < b.at; });
    for (const auto& a : actions) {
      while (world_.tick() < origin_ + a.at) world_.step();
      std::visit([this](const auto& body) { apply(body); }, a.body);
    }
    world_.run_until_converged(script_.settle_ticks);
    // Convergence ignores messages still in flight, such as an adversary's last send.
    world_.run(script_.net.latency_max + 2);

    ScenarioReport rep;
    rep.name = script_.name;
    rep.ticks = world_.tick();
    for (const auto& e : script_.expect) {
      rep.assertions.push_back({describe(e), check(e)});
    }
    rep.summary = summary();
    for (const auto& e : honest().access_log) {
      for (const auto& [label, id] : requests_) {
        if (e.request_id == id) {
          rep.log.push_back(label + " " + ledger::to_text(e));
          break;
        }
      }
    }
    rep.trace = world_.trace();
    return rep;
  }

  net::World& world() { return world_; }

 private:
  const ledger::LedgerState& honest() {
    for (std::size_t i = 0; i < world_.validator_count(); ++i) {
      auto& v = world_.validator(i);
      if (!world_.crashed(v.name())) return v.state();
    }
    throw ConfigError("every validator crashed");
  }

  std::string user_name(std::size_t user) {
    if (user == kOutsider) return "outsider";
    if (user >= fx_.users.size()) throw ConfigError("fixture user " + std::to_string(user) + " missing");
    return "u" + std::to_string(user);
  }

  net::UserNode& user_node(std::size_t user) {
    auto name = user_name(user);
    if (!added_.count(name)) {
      world_.add_user(name, user == kOutsider ? fx_.outsider : fx_.users[user]);
      added_.insert(name);
    }
    return world_.user(name);
  }

  void register_user(std::size_t user) {
    const auto& pk = user == kOutsider ? fx_.outsider.public_key : fx_.users.at(user).public_key;
    world_.register_user(pk);
    auto expected_index = honest().user_count();
    world_.run_until_converged(script_.settle_ticks);
    const auto* rec = honest().find_user(pk);
    if (!rec || rec->index != expected_index) {
      throw ConfigError("registration of " + user_name(user) + " did not land at index " +
                        std::to_string(expected_index));
    }
  }

  void apply(const Register& a) { register_user(a.user); }

  void apply(const Request& a) {
    auto name = user_name(a.user);
    auto& node = user_node(a.user);
    auto id = node.request_access(world_.context(name), a.resource, a.op, a.auto_redeem);
    requests_.emplace_back(a.label, id);
    owners_[a.label] = name;
  }

  void apply(const Redeem& a) {
    auto it = owners_.find(a.label);
    if (it == owners_.end()) throw ConfigError("redeem of unknown request " + a.label);
    world_.user(it->second).redeem(world_.context(it->second), request_id(a.label));
  }

  void apply(const Inject& a) {
    world_.run_until_converged(script_.settle_ticks);
    auto resource = a.resource;
    auto op = a.op;
    if (!resource) {
      // The adversary takes the next user index on registration.
      auto index = static_cast<std::uint32_t>(honest().user_count());
      for (std::uint32_t r = 0; r < service::kFixtureResources && !resource; ++r) {
        auto d = honest().engine->decide(index, r);
        for (std::size_t k = 0; k < decision::kOperationCount; ++k) {
          if (d.access_list[k]) {
            resource = r;
            op = static_cast<Operation>(k);
            break;
          }
        }
      }
      if (!resource) throw ConfigError("no grantable pair for the adversary");
    }
    adversaries_[a.label] = &world_.inject_adversary(a.behavior, *resource, op);
  }

  void apply(const Crash& a) { world_.crash(a.node); }

  core::RequestId request_id(const std::string& label) const {
    for (const auto& [l, id] : requests_) {
      if (l == label) return id;
    }
    throw ConfigError("unknown request label " + label);
  }

  std::vector<ledger::LogEntry> entries_for(const std::string& label) {
    auto id = request_id(label);
    std::vector<ledger::LogEntry> out;
    for (const auto& e : honest().access_log) {
      if (e.request_id == id) out.push_back(e);
    }
    return out;
  }

  std::size_t trace_count(const std::string& node, const std::string& event) const {
    std::size_t n = 0;
    auto prefix_node = node + " ";
    for (const auto& line : world_.trace()) {
      auto first = line.find(' ');
      if (first == std::string::npos) continue;
      auto rest = std::string_view(line).substr(first + 1);
      if (!rest.starts_with(prefix_node)) continue;
      if (rest.substr(prefix_node.size()).starts_with(event)) ++n;
    }
    return n;
  }

  bool check(const Expectation& e) {
    return std::visit(
        overloaded{
            [&](const ExpectSequence& x) {
              std::vector<LogKind> kinds;
              for (const auto& entry : entries_for(x.label)) kinds.push_back(entry.kind);
              return kinds == x.kinds;
            },
            [&](const ExpectTerminal& x) {
              auto entries = entries_for(x.label);
              if (entries.empty()) return false;
              const auto& t = entries.back();
              bool overridden = std::any_of(entries.begin(), entries.end(),
                                            [](const auto& y) { return y.overridden; });
              return t.kind == x.kind && t.reason == x.reason &&
                     (!x.overridden || *x.overridden == overridden);
            },
            [&](const ExpectTrace& x) {
              if (x.node != "validators") return trace_count(x.node, x.event) >= x.min_count;
              for (std::size_t i = 0; i < world_.validator_count(); ++i) {
                const auto& name = world_.validator(i).name();
                if (world_.crashed(name)) continue;
                if (trace_count(name, x.event) < x.min_count) return false;
              }
              return true;
            },
            [&](const ExpectAdversary& x) {
              auto it = adversaries_.find(x.label);
              return it != adversaries_.end() && it->second->finished() &&
                     it->second->outcomes() == std::vector<std::string>{x.outcome};
            },
            [&](const ExpectRedemptions& x) {
              return world_.storage().service().redemption_count() == x.count;
            },
            [&](const ExpectAgreement&) { return world_.report().agreement; },
        },
        e);
  }

  std::string summary() {
    std::vector<std::string> parts;
    for (const auto& [label, id] : requests_) {
      auto entries = entries_for(label);
      if (entries.empty()) {
        parts.push_back(label + ": not recorded");
        continue;
      }
      const auto& t = entries.back();
      if (t.kind == LogKind::denied) {
        parts.push_back(label + ": denied: " + ledger::to_string(t.reason));
      } else if (t.kind == LogKind::redeemed) {
        parts.push_back(label + ": granted, redeemed, logged");
      } else {
        parts.push_back(label + ": " + ledger::to_string(t.kind));
      }
    }
    for (const auto& [label, adv] : adversaries_) {
      std::string text = adv->outcomes().empty() ? "unfinished" : adv->outcomes().back();
      if (text == "redeem:already_redeemed" || text == "redeem:wrong_nonce") {
        text = "second redemption rejected (" + text.substr(7) + ")";
      } else if (text == "tampered_block_sent") {
        std::size_t rejected = 0;
        for (std::size_t i = 0; i < world_.validator_count(); ++i) {
          if (trace_count(world_.validator(i).name(), "block_rejected")) ++rejected;
        }
        text = "tampered block rejected by " + std::to_string(rejected) + "/" +
               std::to_string(world_.validator_count()) + " validators";
      }
      parts.push_back(label + ": " + text);
    }
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
    return out;
  }

  const ScenarioScript& script_;
  const FixtureSet& fx_;
  net::World world_;
  std::uint64_t origin_ = 0;
  std::set<std::string> added_;
  std::vector<std::pair<std::string, core::RequestId>> requests_;
  std::map<std::string, std::string> owners_;
  std::map<std::string, const net::AdversaryNode*> adversaries_;
};

const service::Pair& pin_for(const FixtureSet& f, bool model_allows, RuleEffect rule) {
  const auto& p = f.pins;
  switch (rule) {
    case RuleEffect::none: return model_allows ? p.model_allow : p.model_deny;
    case RuleEffect::allow: return model_allows ? p.allow_rule_allow : p.deny_rule_allow;
    case RuleEffect::deny: return model_allows ? p.allow_rule_deny : p.deny_rule_deny;
  }
  throw ConfigError("bad rule effect");
}

}  // namespace

bool ScenarioReport::passed() const {
  return !assertions.empty() &&
         std::all_of(assertions.begin(), assertions.end(), [](const auto& a) { return a.passed; });
}

std::string ScenarioReport::to_text() const {
  std::ostringstream out;
  out << "scenario " << name << ": " << (passed() ? "PASS" : "FAIL") << "\n";
  out << "outcome " << summary << "\n";
  for (const auto& a : assertions) out << (a.passed ? "  ok   " : "  FAIL ") << a.text << "\n";
  out << "log\n";
  for (const auto& l : log) out << "  " << l << "\n";
  out << "trace\n";
  for (const auto& t : trace) out << t << "\n";
  return out.str();
}

std::string describe(const Expectation& e) {
  return std::visit(
      overloaded{
          [](const ExpectSequence& x) { return "sequence " + x.label + " " + join_kinds(x.kinds); },
          [](const ExpectTerminal& x) {
            std::string s = "terminal " + x.label + " " + ledger::to_string(x.kind);
            if (x.reason != DenyReason::none) s += " reason=" + ledger::to_string(x.reason);
            if (x.overridden) s += *x.overridden ? " overridden" : " not-overridden";
            return s;
          },
          [](const ExpectTrace& x) {
            return "trace " + x.node + " " + x.event + " x>=" + std::to_string(x.min_count);
          },
          [](const ExpectAdversary& x) { return "adversary " + x.label + " " + x.outcome; },
          [](const ExpectRedemptions& x) { return "redemptions " + std::to_string(x.count); },
          [](const ExpectAgreement&) { return std::string("validators agree"); },
      },
      e);
}

ScenarioReport run_scenario(const ScenarioScript& script, const FixtureSet& fixtures) {
  if (!fixtures.model || fixtures.users.empty() || fixtures.validators.empty()) {
    throw ConfigError("fixtures not built");
  }
  Run run(script, fixtures);
  return run.execute();
}

std::vector<std::string> builtin_scenario_names() {
  return {"1", "2", "3", "4", "replay", "reuse", "tamper", "unauthorized"};
}

ScenarioScript builtin_scenario(std::string_view name, const FixtureSet& f, std::uint64_t seed) {
  const auto& p = f.pins;
  ScenarioScript s;
  s.name = std::string(name);
  s.net.seed = seed;
  s.registered_users = f.users.size();
  using K = LogKind;
  if (name == "1") {
    s.actions = {{0, Request{"r1", kOutsider, p.model_allow.resource, p.model_allow.op}}};
    s.expect = {ExpectTerminal{"r1", K::denied, DenyReason::unregistered, false},
                ExpectSequence{"r1", {K::requested, K::denied}}};
  } else if (name == "2") {
    const auto& q = p.model_deny;
    s.actions = {{0, Request{"r1", q.user, q.resource, q.op}}};
    s.expect = {ExpectTerminal{"r1", K::denied, DenyReason::model, false},
                ExpectSequence{"r1", {K::requested, K::authenticated, K::denied}}};
  } else if (name == "3") {
    const auto& q = p.allow_rule_deny;
    s.actions = {{0, Request{"r1", q.user, q.resource, q.op}}};
    s.expect = {ExpectTerminal{"r1", K::denied, DenyReason::rule, true},
                ExpectSequence{"r1", {K::requested, K::authenticated, K::denied}}};
  } else if (name == "4") {
    const auto& q = p.model_allow;
    s.actions = {{0, Request{"r1", q.user, q.resource, q.op}}};
    s.expect = {ExpectSequence{"r1",
                               {K::requested, K::authenticated, K::decided, K::link_issued,
                                K::redeemed}},
                ExpectTrace{"u" + std::to_string(q.user), "access"}, ExpectRedemptions{1}};
  } else if (name == "replay" || name == "reuse") {
    bool replay = name == "replay";
    s.actions = {{0, Inject{"a1", replay ? "replay_link" : "reuse_nonce", std::nullopt}}};
    s.expect = {ExpectAdversary{"a1", replay ? "redeem:already_redeemed" : "redeem:wrong_nonce"},
                ExpectRedemptions{1}, ExpectAgreement{}};
  } else if (name == "tamper") {
    const auto& q = p.model_allow;
    s.actions = {{0, Request{"r1", q.user, q.resource, q.op}}, {8, Inject{"a1", "tamper_block", 0}}};
    s.expect = {ExpectAdversary{"a1", "tampered_block_sent"},
                ExpectTrace{"validators", "block_rejected", 2}, ExpectAgreement{},
                ExpectRedemptions{1}};
  } else if (name == "unauthorized") {
    s.actions = {{0, Inject{"a1", "unauthorized_request", p.model_allow.resource,
                            p.model_allow.op}}};
    s.expect = {ExpectAdversary{"a1", "denied:unregistered"}, ExpectRedemptions{0}};
  } else {
    throw UsageError("unknown scenario '" + std::string(name) + "'");
  }
  return s;
}

std::string to_string(RuleEffect e) {
  switch (e) {
    case RuleEffect::none: return "none";
    case RuleEffect::allow: return "allow";
    case RuleEffect::deny: return "deny";
  }
  return "?";
}

std::string expected_outcome(bool registered, bool model_allows, RuleEffect rule) {
  if (!registered) return "denied:unregistered";
  if (rule == RuleEffect::allow) return "granted";
  if (rule == RuleEffect::deny) return "denied:rule";
  return model_allows ? "granted" : "denied:model";
}

bool MatrixReport::passed() const {
  return rows.size() == 12 &&
         std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.passed(); });
}

std::string MatrixReport::to_text() const {
  std::ostringstream out;
  out << "registered model rule  expected             observed             result\n";
  for (const auto& r : rows) {
    auto pad = [](std::string s, std::size_t w) {
      s.resize(std::max(s.size(), w), ' ');
      return s;
    };
    out << pad(r.registered ? "yes" : "no", 11) << pad(r.model_allows ? "allow" : "deny", 6)
        << pad(to_string(r.rule), 6) << pad(r.expected, 21) << pad(r.observed, 21)
        << (r.passed() ? "PASS" : "FAIL") << "\n";
  }
  return out.str();
}

MatrixReport run_matrix(const FixtureSet& f, std::uint64_t seed) {
  MatrixReport rep;
  for (bool registered : {true, false}) {
    for (bool model_allows : {true, false}) {
      for (auto rule : {RuleEffect::none, RuleEffect::allow, RuleEffect::deny}) {
        const auto& pin = pin_for(f, model_allows, rule);
        ScenarioScript s;
        s.name = "matrix";
        s.net.seed = seed;
        // Unregistered rows stop one short, so the pinned user's rule index stays vacant.
        s.registered_users = registered ? pin.user + 1 : pin.user;
        s.actions = {{0, Request{"r", pin.user, pin.resource, pin.op}}};
        s.expect = {ExpectAgreement{}};
        auto report = run_scenario(s, f);

        MatrixRow row{registered, model_allows, rule,
                      expected_outcome(registered, model_allows, rule), "unrecorded"};
        for (const auto& line : report.log) {
          if (line.find("kind=denied") != std::string::npos) {
            auto at = line.find("reason=");
            row.observed = "denied:" + line.substr(at + 7, line.find(' ', at) - at - 7);
          } else if (line.find("kind=decided") != std::string::npos) {
            row.observed = "granted";
          }
        }
        for (auto& t : report.trace) rep.trace.push_back(std::move(t));
        rep.rows.push_back(std::move(row));
      }
    }
  }
  return rep;
}

}  // namespace dlacb::scenario
