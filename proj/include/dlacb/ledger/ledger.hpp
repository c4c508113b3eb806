#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlacb/decision/model.hpp"
#include "dlacb/ledger/contracts.hpp"
#include "dlacb/ledger/state.hpp"
#include "dlacb/util/expected.hpp"

namespace dlacb::ledger {

// Unsigned block at height 0 carrying the encoded config.
Block make_genesis_block(const GenesisConfig& config);

// Throws ConfigError on fewer than 3 validators, no admins, or a model whose
// fingerprint differs from the pinned one.
LedgerState genesis(const GenesisConfig& config, std::shared_ptr<const decision::DecisionModel> model);
LedgerState genesis_from_block(const Block& block,
                               std::shared_ptr<const decision::DecisionModel> model);

const PublicKey& expected_leader(std::uint64_t height, std::span<const PublicKey> validators);

// Checks a network transaction against the state and the local pool.
Expected<void, Rejection> validate_transaction(const LedgerState& state, const Transaction& tx,
                                               Timestamp now);

struct Applied {
  LedgerState state;
  std::vector<RequestResult> results;  // one per authorized request, block order
  std::vector<LogEntry> new_entries;
};

// State is never modified; on success the returned state has the block appended.
Expected<Applied, Rejection> apply_block(const LedgerState& state, const Block& block);

Expected<LedgerState, Rejection> register_user(const LedgerState& state, const SetupTx& tx);
Expected<LedgerState, Rejection> record_nonce(const LedgerState& state, const Digest& commitment,
                                              const RequestId& request_id, Timestamp issued_at);
Expected<LedgerState, Rejection> redeem_nonce(const LedgerState& state, const Nonce& nonce,
                                              Timestamp now);

struct SealOutcome {
  Block block;
  std::vector<std::pair<Transaction, Rejection>> dropped;
};

// Leader-side block construction: runs the pool through the contracts in
// order, inserting derived T_Verified records and dropping what fails.
SealOutcome build_block(const LedgerState& state, std::span<const Transaction> pool,
                        const KeyPair& leader, std::uint64_t height, Timestamp now);

struct LogFilter {
  std::optional<PublicKey> user_pk;
  std::optional<std::uint32_t> resource_id;
  std::optional<Decision> decision;
  std::optional<LogKind> kind;
  std::optional<std::uint64_t> min_height;
  std::optional<std::uint64_t> max_height;
};

std::vector<LogEntry> query_access_log(const LedgerState& state, const LogFilter& filter = {});

using Chain = std::vector<Block>;

// Longest chain; at equal length the lexicographically smaller tip hash.
// Throws ArgumentError on an empty candidate list.
std::size_t fork_choice(std::span<const Chain> candidates);

// Replays blocks[1..] on top of the genesis in blocks[0].
Expected<LedgerState, Rejection> replay_chain(std::span<const Block> blocks,
                                              std::shared_ptr<const decision::DecisionModel> model);

Chain chain_of(const LedgerState& state);

// Canonical encoding of the replicated part of the state.
Bytes encode_state(const LedgerState& state);
Digest state_digest(const LedgerState& state);
std::string render_state(const LedgerState& state);

}  // namespace dlacb::ledger
