#include "dlacb/core/encoding.hpp"

#include "dlacb/util/error.hpp"

namespace dlacb::core {
namespace {

constexpr std::string_view kSetupDomain = "dlacb/setup/v1";
constexpr std::string_view kAccReqDomain = "dlacb/accreq/v1";
constexpr std::string_view kLinkDomain = "dlacb/link/v1";
constexpr std::string_view kStorageDomain = "dlacb/storage/v1";
constexpr std::string_view kBlockDomain = "dlacb/block/v1";

constexpr std::size_t kMaxTransactionsPerBlock = 1u << 16;

void setup_payload(Encoder& e, const SetupTx& t) {
  e.fixed(t.admin_pk).fixed(t.user_pk).u64(t.time);
}
void accreq_payload(Encoder& e, const AccReqTx& t) {
  e.fixed(t.user_pk).u64(t.time);
  encode_into(e, t.req_info);
}
void link_payload(Encoder& e, const LinkTx& t) {
  e.fixed(t.request_id).u64(t.issued_at).fixed(t.nonce_commitment).bytes(t.ciphertext);
}
void storage_payload(Encoder& e, const StorageTx& t) {
  e.fixed(t.nonce).u64(t.time).fixed(t.user_pk);
}
void block_payload(Encoder& e, const Block& b);

void encode_tx_into(Encoder& e, const Transaction& tx) {
  e.u8(static_cast<std::uint8_t>(kind_of(tx)));
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, SetupTx>) {
          setup_payload(e, t);
          e.fixed(t.admin_sig);
        } else if constexpr (std::is_same_v<T, AccReqTx>) {
          accreq_payload(e, t);
          e.fixed(t.user_sig);
        } else if constexpr (std::is_same_v<T, LinkTx>) {
          link_payload(e, t);
          e.fixed(t.storage_sig);
        } else if constexpr (std::is_same_v<T, StorageTx>) {
          storage_payload(e, t);
          e.fixed(t.storage_sig);
        } else {
          e.u64(t.time);
          encode_into(e, t.user_bits);
          encode_into(e, t.req_bits);
          e.fixed(t.request_id);
        }
      },
      tx);
}

Transaction decode_tx_from(Decoder& d) {
  switch (static_cast<TxKind>(d.u8())) {
    case TxKind::setup: {
      SetupTx t;
      t.admin_pk = d.fixed<PublicKey>();
      t.user_pk = d.fixed<PublicKey>();
      t.time = d.u64();
      t.admin_sig = d.fixed<Signature>();
      return t;
    }
    case TxKind::acc_req: {
      AccReqTx t;
      t.user_pk = d.fixed<PublicKey>();
      t.time = d.u64();
      t.req_info = decode_req_info(d);
      t.user_sig = d.fixed<Signature>();
      return t;
    }
    case TxKind::link: {
      LinkTx t;
      t.request_id = d.fixed<RequestId>();
      t.issued_at = d.u64();
      t.nonce_commitment = d.fixed<Digest>();
      t.ciphertext = d.bytes();
      t.storage_sig = d.fixed<Signature>();
      return t;
    }
    case TxKind::storage: {
      StorageTx t;
      t.nonce = d.fixed<Nonce>();
      t.time = d.u64();
      t.user_pk = d.fixed<PublicKey>();
      t.storage_sig = d.fixed<Signature>();
      return t;
    }
    case TxKind::verified: {
      VerifiedTx t;
      t.time = d.u64();
      t.user_bits = decode_bits(d);
      t.req_bits = decode_bits(d);
      t.request_id = d.fixed<RequestId>();
      return t;
    }
  }
  throw FormatError("unknown transaction kind");
}

void block_payload(Encoder& e, const Block& b) {
  e.u64(b.height).fixed(b.prev_hash).u64(b.time);
  e.u32(static_cast<std::uint32_t>(b.transactions.size()));
  for (const auto& tx : b.transactions) e.bytes(encode(tx));
  e.fixed(b.validator_pk).bytes(b.genesis_payload);
}

template <class F>
Bytes with_domain(std::string_view domain, F&& body) {
  Encoder e;
  e.str(domain);
  body(e);
  return std::move(e).take();
}

}  // namespace

void encode_into(Encoder& e, const ReqInfo& r) {
  e.u32(r.resource_id).u8(static_cast<std::uint8_t>(r.operation)).fixed(r.request_id);
}

ReqInfo decode_req_info(Decoder& d) {
  ReqInfo r;
  r.resource_id = d.u32();
  auto op = decision::operation_from_index(d.u8());
  if (!op) throw FormatError("operation index out of range");
  r.operation = *op;
  r.request_id = d.fixed<RequestId>();
  return r;
}

void encode_into(Encoder& e, const BitVector& b) {
  e.u16(static_cast<std::uint16_t>(b.width()));
  std::vector<std::uint8_t> packed((b.width() + 7) / 8, 0);
  for (std::size_t i = 0; i < b.width(); ++i) {
    if (b[i]) packed[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  e.raw(packed);
}

BitVector decode_bits(Decoder& d) {
  const std::size_t width = d.u16();
  auto packed = d.raw((width + 7) / 8);
  std::vector<std::uint8_t> bits(width);
  for (std::size_t i = 0; i < width; ++i) bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1u;
  for (std::size_t i = width; i < packed.size() * 8; ++i) {
    if ((packed[i / 8] >> (7 - i % 8)) & 1u) throw FormatError("non-zero bit vector padding");
  }
  return BitVector(std::move(bits));
}

Bytes encode(const Transaction& tx) {
  Encoder e;
  encode_tx_into(e, tx);
  return std::move(e).take();
}

Transaction decode_transaction(ByteView data) {
  Decoder d(data);
  auto tx = decode_tx_from(d);
  d.finish();
  return tx;
}

Bytes encode(const Block& block) {
  Encoder e;
  block_payload(e, block);
  e.fixed(block.validator_sig);
  return std::move(e).take();
}

Block decode_block(ByteView data) {
  Decoder d(data);
  Block b;
  b.height = d.u64();
  b.prev_hash = d.fixed<Digest>();
  b.time = d.u64();
  const auto n = d.u32();
  if (n > kMaxTransactionsPerBlock) throw FormatError("too many transactions in block");
  b.transactions.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) b.transactions.push_back(decode_transaction(d.bytes()));
  b.validator_pk = d.fixed<PublicKey>();
  b.genesis_payload = d.bytes();
  b.validator_sig = d.fixed<Signature>();
  d.finish();
  return b;
}

Bytes signing_bytes(const SetupTx& tx) {
  return with_domain(kSetupDomain, [&](Encoder& e) { setup_payload(e, tx); });
}
Bytes signing_bytes(const AccReqTx& tx) {
  return with_domain(kAccReqDomain, [&](Encoder& e) { accreq_payload(e, tx); });
}
Bytes signing_bytes(const LinkTx& tx) {
  return with_domain(kLinkDomain, [&](Encoder& e) { link_payload(e, tx); });
}
Bytes signing_bytes(const StorageTx& tx) {
  return with_domain(kStorageDomain, [&](Encoder& e) { storage_payload(e, tx); });
}
Bytes signing_bytes(const Block& block) {
  return with_domain(kBlockDomain, [&](Encoder& e) { block_payload(e, block); });
}

Digest tx_id(const Transaction& tx) { return crypto::hash(encode(tx)); }

Digest block_hash(const Block& block) { return crypto::hash(encode(block)); }

}  // namespace dlacb::core
