#pragma once

#include <optional>
#include <span>

#include "dlacb/ledger/state.hpp"

namespace dlacb::ledger {

struct RequestResult {
  RequestId request_id;
  PublicKey user_pk;
  std::uint32_t resource_id = 0;
  Operation operation = Operation::op1;
  decision::AccessList access_list{};
  bool granted = false;  // access_list[operation]
  Timestamp time = 0;
  bool operator==(const RequestResult&) const = default;
};

Bytes encode(const RequestResult& r);
RequestResult decode_request_result(ByteView data);  // throws FormatError

struct VerificationCheck {
  bool ok = false;
  DenyReason reason = DenyReason::none;
};

// Membership of H(pk) in M, freshness against `now`, and the user signature.
VerificationCheck access_verification_check(const AccReqTx& tx, const LedgerState& state,
                                            Timestamp now);

struct AuthenticationOutcome {
  std::optional<VerifiedTx> verified;
  LogEntry entry;  // authenticated, or denied with the failure reason
};

AuthenticationOutcome authentication_contract(const AccReqTx& tx, const LedgerState& state,
                                              Timestamp now, std::uint64_t height);

struct AuthorizationOutcome {
  std::optional<RequestResult> result;  // absent only when the freshness guard fails
  decision::AccessDecision decision;
  LogEntry entry;  // decided (granted) or denied
};

// The request must already be recorded in state.requests; it supplies the
// requester key and the operation.
AuthorizationOutcome authorization_contract(const VerifiedTx& tx, const LedgerState& state,
                                            Timestamp now, std::uint64_t height);

// Off-chain delivery of a result from the sealing validator to storage.
struct ResultEnvelope {
  Bytes ciphertext;
  PublicKey validator_pk;
  Signature validator_sig;  // over the ciphertext
  bool operator==(const ResultEnvelope&) const = default;
};

Bytes encode(const ResultEnvelope& env);
ResultEnvelope decode_result_envelope(ByteView data);

ResultEnvelope encrypt_request_result(const RequestResult& result, const PublicKey& storage_pk,
                                      const KeyPair& validator, crypto::EntropySource& entropy);

// Throws ValidationError if the sender is not a validator or the signature
// fails, DecryptError if the ciphertext does not open under `storage`.
RequestResult open_request_result(const ResultEnvelope& env, const KeyPair& storage,
                                  std::span<const PublicKey> validators);

}  // namespace dlacb::ledger
