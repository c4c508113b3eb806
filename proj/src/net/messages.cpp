#include "dlacb/net/messages.hpp"

#include "dlacb/core/encoding.hpp"
#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::net {
namespace {

constexpr std::uint32_t kMaxBlocks = 1u << 20;

void put_tx(Encoder& e, const Transaction& tx) { e.bytes(core::encode(tx)); }
Transaction get_tx(Decoder& d) { return core::decode_transaction(d.bytes()); }
void put_block(Encoder& e, const Block& b) { e.bytes(core::encode(b)); }
Block get_block(Decoder& d) { return core::decode_block(d.bytes()); }

}  // namespace

std::string to_string(PollStatus s) {
  switch (s) {
    case PollStatus::unknown: return "unknown";
    case PollStatus::pending: return "pending";
    case PollStatus::denied: return "denied";
    case PollStatus::link: return "link";
  }
  return "?";
}

std::string message_name(const Message& m) {
  static const char* names[] = {"tx_gossip",  "block_announce", "sync_request",  "sync_response",
                                "result",     "result_ack",     "poll_request",  "poll_response",
                                "redeem",     "redeem_response"};
  return names[m.index()];
}

Bytes encode(const Message& m) {
  Encoder e;
  e.u8(static_cast<std::uint8_t>(m.index()));
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TxGossip>) {
          put_tx(e, x.tx);
        } else if constexpr (std::is_same_v<T, BlockAnnounce>) {
          put_block(e, x.block);
        } else if constexpr (std::is_same_v<T, SyncRequest>) {
          e.u64(x.have_blocks);
        } else if constexpr (std::is_same_v<T, SyncResponse>) {
          e.u32(static_cast<std::uint32_t>(x.blocks.size()));
          for (const auto& b : x.blocks) put_block(e, b);
        } else if constexpr (std::is_same_v<T, ResultDelivery>) {
          e.bytes(ledger::encode(x.envelope));
        } else if constexpr (std::is_same_v<T, ResultAck>) {
          e.fixed(x.envelope_digest);
        } else if constexpr (std::is_same_v<T, PollRequest>) {
          e.fixed(x.request_id);
        } else if constexpr (std::is_same_v<T, PollResponse>) {
          e.fixed(x.request_id).u8(static_cast<std::uint8_t>(x.status)).str(x.reason);
          e.boolean(x.link.has_value());
          if (x.link) put_tx(e, *x.link);
        } else if constexpr (std::is_same_v<T, RedeemRequest>) {
          e.u64(x.correlation).fixed(x.token).fixed(x.nonce).u8(static_cast<std::uint8_t>(x.operation));
        } else {
          e.u64(x.correlation).boolean(x.error.has_value());
          e.u8(x.error ? static_cast<std::uint8_t>(*x.error) : 0).bytes(x.payload);
        }
      },
      m);
  return std::move(e).take();
}

Message decode_message(ByteView data) {
  Decoder d(data);
  auto tag = d.u8();
  Message out;
  switch (tag) {
    case 0: out = TxGossip{get_tx(d)}; break;
    case 1: out = BlockAnnounce{get_block(d)}; break;
    case 2: out = SyncRequest{d.u64()}; break;
    case 3: {
      auto n = d.u32();
      if (n > kMaxBlocks) throw FormatError("sync response too long");
      SyncResponse r;
      for (std::uint32_t i = 0; i < n; ++i) r.blocks.push_back(get_block(d));
      out = std::move(r);
      break;
    }
    case 4: out = ResultDelivery{ledger::decode_result_envelope(d.bytes())}; break;
    case 5: out = ResultAck{d.fixed<core::Digest>()}; break;
    case 6: out = PollRequest{d.fixed<core::RequestId>()}; break;
    case 7: {
      PollResponse r;
      r.request_id = d.fixed<core::RequestId>();
      auto s = d.u8();
      if (s > 3) throw FormatError("poll status out of range");
      r.status = static_cast<PollStatus>(s);
      r.reason = d.str();
      if (d.boolean()) {
        auto tx = get_tx(d);
        if (!std::holds_alternative<core::LinkTx>(tx)) throw FormatError("poll link is not a T_Link");
        r.link = std::get<core::LinkTx>(tx);
      }
      out = std::move(r);
      break;
    }
    case 8: {
      RedeemRequest r;
      r.correlation = d.u64();
      r.token = d.fixed<core::LinkToken>();
      r.nonce = d.fixed<core::Nonce>();
      auto op = decision::operation_from_index(d.u8());
      if (!op) throw FormatError("redeem operation out of range");
      r.operation = *op;
      out = r;
      break;
    }
    case 9: {
      RedeemResponse r;
      r.correlation = d.u64();
      bool has_error = d.boolean();
      auto err = d.u8();
      if (err > 4 || (!has_error && err != 0)) throw FormatError("redeem error out of range");
      if (has_error) r.error = static_cast<storage::RedeemError>(err);
      r.payload = d.bytes();
      out = std::move(r);
      break;
    }
    default: throw FormatError("unknown message tag " + std::to_string(tag));
  }
  d.finish();
  return out;
}

}  // namespace dlacb::net
