#include "dlacb/ledger/contracts.hpp"

#include <algorithm>

#include "dlacb/core/encoding.hpp"
#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::ledger {
namespace {

const std::string_view kEnvelopeLabel = "dlacb/result-envelope/v1";

Bytes envelope_signing_bytes(ByteView ciphertext) {
  Encoder e;
  e.str(kEnvelopeLabel).bytes(ciphertext);
  return std::move(e).take();
}

std::uint8_t pack(const decision::AccessList& list) {
  std::uint8_t v = 0;
  for (std::size_t i = 0; i < list.size(); ++i) v |= static_cast<std::uint8_t>(list[i]) << i;
  return v;
}

LogEntry base_entry(const AccReqTx& tx, std::uint64_t height, Timestamp now) {
  LogEntry e;
  e.user_pk = tx.user_pk;
  e.resource_id = tx.req_info.resource_id;
  e.operation = tx.req_info.operation;
  e.request_id = tx.req_info.request_id;
  e.block_height = height;
  e.time = now;
  return e;
}

}  // namespace

Bytes encode(const RequestResult& r) {
  Encoder e;
  e.fixed(r.request_id).fixed(r.user_pk).u32(r.resource_id);
  e.u8(static_cast<std::uint8_t>(r.operation)).u8(pack(r.access_list));
  e.boolean(r.granted).u64(r.time);
  return std::move(e).take();
}

RequestResult decode_request_result(ByteView data) {
  Decoder d(data);
  RequestResult r;
  r.request_id = d.fixed<RequestId>();
  r.user_pk = d.fixed<PublicKey>();
  r.resource_id = d.u32();
  auto op = decision::operation_from_index(d.u8());
  if (!op) throw FormatError("request result operation out of range");
  r.operation = *op;
  auto bits = d.u8();
  if (bits >> decision::kOperationCount) throw FormatError("request result access list padding");
  for (std::size_t i = 0; i < decision::kOperationCount; ++i) r.access_list[i] = (bits >> i) & 1;
  r.granted = d.boolean();
  r.time = d.u64();
  d.finish();
  if (r.granted != r.access_list[decision::index_of(r.operation)]) {
    throw FormatError("request result grant flag disagrees with access list");
  }
  return r;
}

VerificationCheck access_verification_check(const AccReqTx& tx, const LedgerState& state,
                                            Timestamp now) {
  if (!state.find_user(tx.user_pk)) return {false, DenyReason::unregistered};
  if (!is_fresh(tx.time, now, state.config.params.freshness_window)) {
    return {false, DenyReason::stale};
  }
  if (!crypto::verify(tx.user_pk, core::signing_bytes(tx), tx.user_sig)) {
    return {false, DenyReason::bad_signature};
  }
  return {true, DenyReason::none};
}

AuthenticationOutcome authentication_contract(const AccReqTx& tx, const LedgerState& state,
                                              Timestamp now, std::uint64_t height) {
  AuthenticationOutcome out;
  out.entry = base_entry(tx, height, now);
  auto check = access_verification_check(tx, state, now);
  if (!check.ok) {
    out.entry.kind = LogKind::denied;
    out.entry.decision = Decision::denied;
    out.entry.reason = check.reason;
    return out;
  }
  const auto& cfg = state.config.engine;
  VerifiedTx v;
  v.time = tx.time;
  v.user_bits = decision::binary_repr(state.find_user(tx.user_pk)->index, cfg.user_bits);
  v.req_bits = decision::binary_repr(tx.req_info.resource_id, cfg.resource_bits);
  v.request_id = tx.req_info.request_id;
  v.contract_origin = true;
  out.verified = std::move(v);
  out.entry.kind = LogKind::authenticated;
  return out;
}

AuthorizationOutcome authorization_contract(const VerifiedTx& tx, const LedgerState& state,
                                            Timestamp now, std::uint64_t height) {
  if (!tx.contract_origin) throw ValidationError("T_Verified did not come from the local contract");
  const RequestRecord* req = state.find_request(tx.request_id);
  if (!req) throw ValidationError("authorization for unknown request " + tx.request_id.hex());
  if (!state.engine) throw ConfigError("ledger state has no decision engine");

  AuthorizationOutcome out;
  LogEntry& e = out.entry;
  e.user_pk = req->user_pk;
  e.resource_id = req->req_info.resource_id;
  e.operation = req->req_info.operation;
  e.request_id = tx.request_id;
  e.block_height = height;
  e.time = now;

  if (!is_fresh(tx.time, now, state.config.params.freshness_window)) {
    e.kind = LogKind::denied;
    e.decision = Decision::denied;
    e.reason = DenyReason::stale;
    return out;
  }

  auto user_index = static_cast<std::uint32_t>(tx.user_bits.to_uint());
  auto resource_id = static_cast<std::uint32_t>(tx.req_bits.to_uint());
  out.decision = state.engine->decide(user_index, resource_id);

  std::size_t op = decision::index_of(req->req_info.operation);
  RequestResult r;
  r.request_id = tx.request_id;
  r.user_pk = req->user_pk;
  r.resource_id = resource_id;
  r.operation = req->req_info.operation;
  r.access_list = out.decision.access_list;
  r.granted = r.access_list[op];
  r.time = tx.time;
  out.result = r;

  e.overridden = out.decision.overridden[op];
  if (r.granted) {
    e.kind = LogKind::decided;
    e.decision = Decision::granted;
  } else {
    e.kind = LogKind::denied;
    e.decision = Decision::denied;
    e.reason = e.overridden ? DenyReason::rule : DenyReason::model;
  }
  return out;
}

Bytes encode(const ResultEnvelope& env) {
  Encoder e;
  e.bytes(env.ciphertext).fixed(env.validator_pk).fixed(env.validator_sig);
  return std::move(e).take();
}

ResultEnvelope decode_result_envelope(ByteView data) {
  Decoder d(data);
  ResultEnvelope env;
  env.ciphertext = d.bytes();
  env.validator_pk = d.fixed<PublicKey>();
  env.validator_sig = d.fixed<Signature>();
  d.finish();
  return env;
}

ResultEnvelope encrypt_request_result(const RequestResult& result, const PublicKey& storage_pk,
                                      const KeyPair& validator, crypto::EntropySource& entropy) {
  ResultEnvelope env;
  env.ciphertext = crypto::encrypt(storage_pk, encode(result), entropy);
  env.validator_pk = validator.public_key;
  env.validator_sig = crypto::sign(validator.secret_key, envelope_signing_bytes(env.ciphertext));
  return env;
}

RequestResult open_request_result(const ResultEnvelope& env, const KeyPair& storage,
                                  std::span<const PublicKey> validators) {
  if (std::find(validators.begin(), validators.end(), env.validator_pk) == validators.end()) {
    throw ValidationError("result envelope from a non-validator key");
  }
  if (!crypto::verify(env.validator_pk, envelope_signing_bytes(env.ciphertext), env.validator_sig)) {
    throw ValidationError("result envelope signature does not verify");
  }
  return decode_request_result(crypto::decrypt(storage.secret_key, env.ciphertext));
}

}  // namespace dlacb::ledger
