#include "dlacb/storage/storage.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "dlacb/core/builders.hpp"
#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::storage {
namespace {

constexpr std::string_view kIndexName = "index.txt";

std::filesystem::path object_path(const std::filesystem::path& dir, const Digest& d) {
  return dir / "objects" / d.hex();
}

}  // namespace

Bytes encode(const LinkGrant& g) {
  Encoder e;
  e.fixed(g.token).fixed(g.nonce).u64(g.issued_at).u32(g.resource_id);
  return std::move(e).take();
}

LinkGrant decode_link_grant(ByteView data) {
  Decoder d(data);
  LinkGrant g;
  g.token = d.fixed<LinkToken>();
  g.nonce = d.fixed<Nonce>();
  g.issued_at = d.u64();
  g.resource_id = d.u32();
  d.finish();
  return g;
}

LinkGrant open_link(const LinkTx& tx, const KeyPair& user) {
  return decode_link_grant(crypto::decrypt(user.secret_key, tx.ciphertext));
}

std::string to_string(ResultRejection r) {
  switch (r) {
    case ResultRejection::forged: return "forged";
    case ResultRejection::undecryptable: return "undecryptable";
    case ResultRejection::already_served: return "already_served";
  }
  return "?";
}

std::string to_string(RedeemError e) {
  switch (e) {
    case RedeemError::unknown_token: return "unknown_token";
    case RedeemError::wrong_nonce: return "wrong_nonce";
    case RedeemError::expired: return "expired";
    case RedeemError::already_redeemed: return "already_redeemed";
    case RedeemError::operation_not_permitted: return "operation_not_permitted";
  }
  return "?";
}

std::optional<RedeemError> parse_redeem_error(std::string_view name) {
  for (auto e : {RedeemError::unknown_token, RedeemError::wrong_nonce, RedeemError::expired,
                 RedeemError::already_redeemed, RedeemError::operation_not_permitted}) {
    if (to_string(e) == name) return e;
  }
  return std::nullopt;
}

StorageService::StorageService(KeyPair keys, std::vector<PublicKey> validators,
                               std::shared_ptr<crypto::EntropySource> entropy,
                               std::optional<std::filesystem::path> data_dir,
                               std::uint64_t link_lifetime)
    : keys_(std::move(keys)),
      validators_(std::move(validators)),
      entropy_(std::move(entropy)),
      data_dir_(std::move(data_dir)),
      link_lifetime_(link_lifetime) {
  if (!entropy_) throw ConfigError("storage needs an entropy source");
  if (!data_dir_) return;
  std::filesystem::create_directories(*data_dir_ / "objects");
  std::ifstream in(*data_dir_ / kIndexName);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ResourceMetadata m;
    std::string digest;
    if (!(fields >> m.id >> digest >> m.size) || !std::getline(fields >> std::ws, m.name)) {
      throw FormatError("storage index line " + std::to_string(n) + " is malformed");
    }
    m.digest = Digest::from_hex(digest);
    resources_[m.id] = m;
  }
}

ResourceMetadata StorageService::put_resource(std::uint32_t id, std::string name, Bytes payload) {
  if (resources_.count(id)) throw ValidationError("resource " + std::to_string(id) + " already exists");
  if (name.empty() || name.find('\n') != std::string::npos) {
    throw ValidationError("resource name must be one non-empty line");
  }
  ResourceMetadata m{id, std::move(name), crypto::hash(payload), payload.size()};
  if (data_dir_) {
    auto path = object_path(*data_dir_, m.digest);
    if (!std::filesystem::exists(path)) {
      std::ofstream out(path, std::ios::binary);
      out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
      if (!out) throw Error("cannot write " + path.string());
    }
  } else {
    memory_payloads_[id] = std::move(payload);
  }
  resources_[id] = m;
  if (data_dir_) write_index();
  return m;
}

ResourceMetadata StorageService::get_metadata(std::uint32_t id) const {
  auto it = resources_.find(id);
  if (it == resources_.end()) throw NotFoundError("unknown resource " + std::to_string(id));
  return it->second;
}

std::vector<ResourceMetadata> StorageService::list_resources() const {
  std::vector<ResourceMetadata> out;
  for (const auto& [id, m] : resources_) out.push_back(m);
  return out;
}

void StorageService::write_index() const {
  auto tmp = *data_dir_ / "index.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& [id, m] : resources_) {
      out << m.id << ' ' << m.digest.hex() << ' ' << m.size << ' ' << m.name << '\n';
    }
    if (!out) throw Error("cannot write storage index");
  }
  std::filesystem::rename(tmp, *data_dir_ / kIndexName);
}

Bytes StorageService::load_payload(const ResourceMetadata& meta) const {
  if (!data_dir_) return memory_payloads_.at(meta.id);
  std::ifstream in(object_path(*data_dir_, meta.digest), std::ios::binary);
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (crypto::hash(data) != meta.digest) {
    throw FormatError("stored object for resource " + std::to_string(meta.id) + " is corrupt");
  }
  return data;
}

void StorageService::record(Timestamp t, std::string event, std::string detail) {
  audit_.push_back({t, std::move(event), std::move(detail)});
}

Expected<ResultOutcome, ResultRejection> StorageService::handle_request_result(
    const ledger::ResultEnvelope& env, Timestamp now) {
  ledger::RequestResult result;
  try {
    result = ledger::open_request_result(env, keys_, validators_);
  } catch (const ValidationError& e) {
    record(now, "result_rejected", std::string("forged: ") + e.what());
    return unexpected(ResultRejection::forged);
  } catch (const Error& e) {
    record(now, "result_rejected", std::string("undecryptable: ") + e.what());
    return unexpected(ResultRejection::undecryptable);
  }
  if (!served_.insert(result.request_id).second) {
    record(now, "result_rejected", "already served " + result.request_id.hex());
    return unexpected(ResultRejection::already_served);
  }

  if (!result.granted || !resources_.count(result.resource_id)) {
    Denial d{result.request_id, result.user_pk, result.resource_id, result.operation,
             result.granted ? "unknown_resource" : "decision"};
    record(now, "denied", "request " + result.request_id.hex() + " " + d.reason);
    return ResultOutcome(std::move(d));
  }

  AccessLink link;
  entropy_->fill(link.token.bytes);
  entropy_->fill(link.nonce.bytes);
  link.resource_id = result.resource_id;
  link.permitted_ops = result.access_list;
  link.user_pk = result.user_pk;
  link.request_id = result.request_id;
  link.issued_at = now;
  link.expires_at = now + link_lifetime_;

  LinkGrant grant{link.token, link.nonce, now, link.resource_id};
  auto ct = crypto::encrypt(result.user_pk, encode(grant), *entropy_);
  auto tx = core::build_link_tx(keys_, result.request_id, now, core::nonce_commitment(link.nonce),
                                std::move(ct));
  record(now, "link_issued", "request " + result.request_id.hex());
  links_.emplace(link.token, link);
  return ResultOutcome(std::move(tx));
}

Expected<Redemption, RedeemError> StorageService::redeem(const LinkToken& token, const Nonce& nonce,
                                                         Operation op, Timestamp now) {
  auto fail = [&](RedeemError e) {
    record(now, "redeem_rejected", to_string(e) + " token " + token.hex());
    return unexpected(e);
  };
  auto it = links_.find(token);
  if (it == links_.end()) return fail(RedeemError::unknown_token);
  auto& link = it->second;
  if (link.nonce != nonce) return fail(RedeemError::wrong_nonce);
  if (link.redeemed) return fail(RedeemError::already_redeemed);
  if (link.expired || now > link.expires_at) {
    link.expired = true;
    return fail(RedeemError::expired);
  }
  if (!link.permitted_ops[decision::index_of(op)]) return fail(RedeemError::operation_not_permitted);

  Redemption r;
  r.payload = load_payload(resources_.at(link.resource_id));
  link.redeemed = true;
  ++redemptions_;
  r.storage_tx = core::build_storage_tx(keys_, nonce, now, link.user_pk);
  record(now, "redeemed", "request " + link.request_id.hex() + " op " + decision::operation_name(op));
  return r;
}

std::size_t StorageService::expire_links(Timestamp now) {
  std::size_t n = 0;
  for (auto& [token, link] : links_) {
    if (link.redeemed || link.expired || link.expires_at >= now) continue;
    link.expired = true;
    ++n;
  }
  if (n) record(now, "expired", std::to_string(n) + " links");
  return n;
}

const AccessLink* StorageService::find_link(const LinkToken& token) const {
  auto it = links_.find(token);
  return it == links_.end() ? nullptr : &it->second;
}

}  // namespace dlacb::storage
