#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dlacb/core/types.hpp"
#include "dlacb/ledger/contracts.hpp"
#include "dlacb/storage/storage.hpp"

namespace dlacb::net {

using core::Block;
using core::Transaction;

struct TxGossip {
  Transaction tx;
};

struct BlockAnnounce {
  Block block;
};

struct SyncRequest {
  std::uint64_t have_blocks = 0;
};

// Full chain including genesis.
struct SyncResponse {
  std::vector<Block> blocks;
};

struct ResultDelivery {
  ledger::ResultEnvelope envelope;
};

// Digest of the acknowledged envelope ciphertext.
struct ResultAck {
  core::Digest envelope_digest;
};

struct PollRequest {
  core::RequestId request_id;
};

enum class PollStatus : std::uint8_t { unknown = 0, pending = 1, denied = 2, link = 3 };
std::string to_string(PollStatus s);

struct PollResponse {
  core::RequestId request_id;
  PollStatus status = PollStatus::unknown;
  std::string reason;
  std::optional<core::LinkTx> link;
};

struct RedeemRequest {
  std::uint64_t correlation = 0;
  core::LinkToken token;
  core::Nonce nonce;
  core::Operation operation = core::Operation::op1;
};

struct RedeemResponse {
  std::uint64_t correlation = 0;
  std::optional<storage::RedeemError> error;  // absent on success
  Bytes payload;
};

using Message = std::variant<TxGossip, BlockAnnounce, SyncRequest, SyncResponse, ResultDelivery,
                             ResultAck, PollRequest, PollResponse, RedeemRequest, RedeemResponse>;

std::string message_name(const Message& m);

// u8 tag followed by the body in the canonical encoding.
Bytes encode(const Message& m);
Message decode_message(ByteView data);  // throws FormatError

}  // namespace dlacb::net
