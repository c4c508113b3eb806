#pragma once

// Canonical byte layout (all integers big-endian):
//
//   ReqInfo     u32 resource_id | u8 operation | 16 request_id
//   BitVector   u16 width | ceil(width/8) bytes, MSB first, zero padding
//   Transaction u8 kind, then
//     1 Setup    32 admin_pk | 32 user_pk | u64 time | 64 admin_sig
//     2 AccReq   32 user_pk | u64 time | ReqInfo | 64 user_sig
//     3 Link     16 request_id | u64 issued_at | 32 nonce_commitment |
//                u32 len + ciphertext | 64 storage_sig
//     4 Storage  16 nonce | u64 time | 32 user_pk | 64 storage_sig
//     5 Verified u64 time | BitVector user_bits | BitVector req_bits | 16 request_id
//   Block       u64 height | 32 prev_hash | u64 time | u32 n | n x (u32 len + tx) |
//               32 validator_pk | u32 len + genesis_payload | 64 validator_sig
//
// Signing payloads are the record encoding with the signature omitted and a
// domain label prefixed, so a signature for one record type never verifies
// as another.

#include "dlacb/core/types.hpp"
#include "dlacb/util/codec.hpp"

namespace dlacb::core {

void encode_into(Encoder& e, const ReqInfo& r);
void encode_into(Encoder& e, const BitVector& b);
ReqInfo decode_req_info(Decoder& d);
BitVector decode_bits(Decoder& d);

Bytes encode(const Transaction& tx);
Transaction decode_transaction(ByteView data);

Bytes encode(const Block& block);
Block decode_block(ByteView data);

Bytes signing_bytes(const SetupTx& tx);
Bytes signing_bytes(const AccReqTx& tx);
Bytes signing_bytes(const LinkTx& tx);
Bytes signing_bytes(const StorageTx& tx);
Bytes signing_bytes(const Block& block);

Digest tx_id(const Transaction& tx);
Digest block_hash(const Block& block);

}  // namespace dlacb::core
