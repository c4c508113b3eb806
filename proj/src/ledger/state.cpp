#include "dlacb/ledger/state.hpp"

#include <sstream>

#include "dlacb/core/encoding.hpp"
#include "dlacb/core/render.hpp"
#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::ledger {
namespace {

constexpr std::uint32_t kGenesisVersion = 1;
constexpr std::uint32_t kMaxListLen = 1u << 16;

void encode_rule(Encoder& e, const decision::PriorityRule& r) {
  e.u32(r.priority);
  e.boolean(r.user.has_value()).u32(r.user.value_or(0));
  e.boolean(r.resource.has_value()).u32(r.resource.value_or(0));
  e.boolean(r.operation.has_value())
      .u8(static_cast<std::uint8_t>(r.operation.value_or(Operation::op1)));
  e.u8(static_cast<std::uint8_t>(r.effect));
}

decision::PriorityRule decode_rule(Decoder& d) {
  decision::PriorityRule r;
  r.priority = d.u32();
  bool has_user = d.boolean();
  auto user = d.u32();
  if (has_user) r.user = user;
  bool has_res = d.boolean();
  auto res = d.u32();
  if (has_res) r.resource = res;
  bool has_op = d.boolean();
  auto op = decision::operation_from_index(d.u8());
  if (!op) throw FormatError("rule operation out of range");
  if (has_op) r.operation = *op;
  auto eff = d.u8();
  if (eff > 1) throw FormatError("rule effect out of range");
  r.effect = static_cast<decision::Effect>(eff);
  // Canonical form: absent fields encode as zero.
  if ((!has_user && user != 0) || (!has_res && res != 0) || (!has_op && *op != Operation::op1)) {
    throw FormatError("non-canonical wildcard rule field");
  }
  return r;
}

}  // namespace

bool GenesisConfig::operator==(const GenesisConfig& o) const {
  return admin_pks == o.admin_pks && validators == o.validators && storage_pk == o.storage_pk &&
         engine_fingerprint == o.engine_fingerprint && rules == o.rules &&
         engine.threshold == o.engine.threshold && engine.user_bits == o.engine.user_bits &&
         engine.resource_bits == o.engine.resource_bits && genesis_time == o.genesis_time &&
         params == o.params;
}

Bytes encode(const GenesisConfig& c) {
  Encoder e;
  e.u32(kGenesisVersion);
  e.u32(static_cast<std::uint32_t>(c.admin_pks.size()));
  for (const auto& pk : c.admin_pks) e.fixed(pk);
  e.u32(static_cast<std::uint32_t>(c.validators.size()));
  for (const auto& pk : c.validators) e.fixed(pk);
  e.fixed(c.storage_pk).fixed(c.engine_fingerprint);
  e.u32(static_cast<std::uint32_t>(c.rules.size()));
  for (const auto& r : c.rules) encode_rule(e, r);
  e.f64(c.engine.threshold).u16(static_cast<std::uint16_t>(c.engine.user_bits));
  e.u16(static_cast<std::uint16_t>(c.engine.resource_bits));
  e.u64(c.genesis_time);
  e.u64(c.params.freshness_window).u64(c.params.nonce_lifetime).u64(c.params.block_interval);
  return std::move(e).take();
}

GenesisConfig decode_genesis_config(ByteView data) {
  Decoder d(data);
  if (d.u32() != kGenesisVersion) throw FormatError("unsupported genesis version");
  GenesisConfig c;
  auto n_admin = d.u32();
  if (n_admin > kMaxListLen) throw FormatError("admin list too long");
  for (std::uint32_t i = 0; i < n_admin; ++i) c.admin_pks.push_back(d.fixed<PublicKey>());
  auto n_val = d.u32();
  if (n_val > kMaxListLen) throw FormatError("validator list too long");
  for (std::uint32_t i = 0; i < n_val; ++i) c.validators.push_back(d.fixed<PublicKey>());
  c.storage_pk = d.fixed<PublicKey>();
  c.engine_fingerprint = d.fixed<Digest>();
  auto n_rules = d.u32();
  if (n_rules > kMaxListLen) throw FormatError("rule list too long");
  for (std::uint32_t i = 0; i < n_rules; ++i) c.rules.push_back(decode_rule(d));
  c.engine.threshold = d.f64();
  c.engine.user_bits = d.u16();
  c.engine.resource_bits = d.u16();
  c.genesis_time = d.u64();
  c.params.freshness_window = d.u64();
  c.params.nonce_lifetime = d.u64();
  c.params.block_interval = d.u64();
  d.finish();
  return c;
}

std::string to_string(LogKind k) {
  switch (k) {
    case LogKind::requested: return "requested";
    case LogKind::authenticated: return "authenticated";
    case LogKind::decided: return "decided";
    case LogKind::link_issued: return "link_issued";
    case LogKind::redeemed: return "redeemed";
    case LogKind::denied: return "denied";
    case LogKind::expired: return "expired";
  }
  return "?";
}

std::string to_string(Decision d) {
  switch (d) {
    case Decision::none: return "none";
    case Decision::granted: return "granted";
    case Decision::denied: return "denied";
  }
  return "?";
}

std::string to_string(DenyReason r) {
  switch (r) {
    case DenyReason::none: return "none";
    case DenyReason::unregistered: return "unregistered";
    case DenyReason::stale: return "stale";
    case DenyReason::bad_signature: return "bad_signature";
    case DenyReason::model: return "model";
    case DenyReason::rule: return "rule";
  }
  return "?";
}

std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::bad_signature: return "bad_signature";
    case RejectReason::stale_time: return "stale_time";
    case RejectReason::unauthorized_sender: return "unauthorized_sender";
    case RejectReason::duplicate: return "duplicate";
    case RejectReason::wrong_leader: return "wrong_leader";
    case RejectReason::broken_chain: return "broken_chain";
    case RejectReason::bad_height: return "bad_height";
    case RejectReason::bad_time: return "bad_time";
    case RejectReason::duplicate_user: return "duplicate_user";
    case RejectReason::replay: return "replay";
    case RejectReason::expired: return "expired";
    case RejectReason::unknown_nonce: return "unknown_nonce";
    case RejectReason::unknown_request: return "unknown_request";
    case RejectReason::verified_mismatch: return "verified_mismatch";
    case RejectReason::malformed: return "malformed";
  }
  return "?";
}

std::string to_text(const LogEntry& e) {
  std::ostringstream out;
  out << "height=" << e.block_height << " time=" << e.time << " kind=" << to_string(e.kind)
      << " user=" << core::short_hex(e.user_pk.view()) << " resource=" << e.resource_id
      << " op=" << decision::operation_name(e.operation) << " decision=" << to_string(e.decision);
  if (e.reason != DenyReason::none) out << " reason=" << to_string(e.reason);
  if (e.overridden) out << " overridden=true";
  out << " request=" << e.request_id.hex();
  return out.str();
}

Digest LedgerState::tip_hash() const { return core::block_hash(tip()); }

const UserRecord* LedgerState::find_user(const PublicKey& pk) const {
  auto it = users.find(crypto::hash(pk.view()));
  return it == users.end() ? nullptr : &it->second;
}

const RequestRecord* LedgerState::find_request(const RequestId& id) const {
  auto it = requests.find(id);
  return it == requests.end() ? nullptr : &it->second;
}

bool is_fresh(Timestamp tx_time, Timestamp now, std::uint64_t window) {
  return tx_time + window >= now && tx_time <= now + window;
}

}  // namespace dlacb::ledger
