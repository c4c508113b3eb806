#include "dlacb/crypto/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::crypto {
namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error("libsodium initialization failed");
}

constexpr std::uint8_t kCiphertextVersion = 1;
constexpr std::string_view kKdfLabel = "dlacb-hybrid-v1";

struct Curve25519Public {
  std::array<std::uint8_t, 32> bytes;
};

Curve25519Public to_curve(const PublicKey& pk) {
  Curve25519Public out{};
  if (crypto_sign_ed25519_pk_to_curve25519(out.bytes.data(), pk.bytes.data()) != 0) {
    throw KeyError("public key is not a valid curve point");
  }
  return out;
}

// Derives the AEAD key and nonce from the shared secret and both public values.
void derive(const std::uint8_t* shared, const std::uint8_t* epk, const std::uint8_t* rpk,
            std::uint8_t* key, std::uint8_t* nonce) {
  Encoder e;
  e.raw(as_bytes(kKdfLabel)).raw({shared, 32}).raw({epk, 32}).raw({rpk, 32});
  auto k = hash(e.data());
  std::memcpy(key, k.bytes.data(), 32);
  Encoder n;
  n.raw(as_bytes(kKdfLabel)).raw({epk, 32}).raw({rpk, 32});
  auto nd = hash(n.data());
  std::memcpy(nonce, nd.bytes.data(), crypto_aead_xchacha20poly1305_ietf_NPUBBYTES);
}

std::string read_hex_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw KeyError("cannot open key file " + path.string());
  std::string line;
  std::getline(in, line);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  return line;
}

}  // namespace

void SystemEntropy::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  randombytes_buf(out.data(), out.size());
}

SeededEntropy::SeededEntropy(std::uint64_t seed) {
  Encoder e;
  e.u64(seed);
  seed_ = hash(e.data()).bytes;
}

SeededEntropy::SeededEntropy(std::span<const std::uint8_t> seed) { seed_ = hash(seed).bytes; }

void SeededEntropy::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  Encoder e;
  e.raw(seed_).u64(counter_++);
  auto key = hash(e.data());
  randombytes_buf_deterministic(out.data(), out.size(), key.bytes.data());
}

std::shared_ptr<EntropySource> system_entropy() {
  static auto src = std::make_shared<SystemEntropy>();
  return src;
}

KeyPair keypair_from_seed(ByteView seed) {
  ensure_sodium();
  if (seed.size() != kSeedBytes) throw KeyError("key seed must be 32 bytes");
  KeyPair kp;
  crypto_sign_seed_keypair(kp.public_key.bytes.data(), kp.secret_key.bytes.data(), seed.data());
  return kp;
}

KeyPair generate_keypair(EntropySource& entropy) {
  std::array<std::uint8_t, kSeedBytes> seed{};
  try {
    entropy.fill(seed);
  } catch (const std::exception& ex) {
    throw KeyGenerationError(std::string("entropy source failed: ") + ex.what());
  }
  auto kp = keypair_from_seed(seed);
  sodium_memzero(seed.data(), seed.size());
  return kp;
}

PublicKey public_key_of(const SecretKey& sk) {
  auto kp = keypair_from_seed({sk.bytes.data(), kSeedBytes});
  if (!std::equal(kp.public_key.bytes.begin(), kp.public_key.bytes.end(), sk.bytes.begin() + 32)) {
    throw KeyError("secret key halves are inconsistent");
  }
  return kp.public_key;
}

Signature sign(const SecretKey& sk, ByteView message) {
  ensure_sodium();
  public_key_of(sk);
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                       sk.bytes.data());
  return sig;
}

bool verify(const PublicKey& pk, ByteView message, const Signature& sig) noexcept {
  if (sodium_init() < 0) return false;
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     pk.bytes.data()) == 0;
}

bool verify_raw(ByteView pk, ByteView message, ByteView sig) noexcept {
  if (pk.size() != PublicKey::size() || sig.size() != Signature::size()) return false;
  PublicKey p;
  Signature s;
  std::copy(pk.begin(), pk.end(), p.bytes.begin());
  std::copy(sig.begin(), sig.end(), s.bytes.begin());
  return verify(p, message, s);
}

Bytes encrypt(const PublicKey& pk, ByteView plaintext, EntropySource& entropy) {
  ensure_sodium();
  auto recipient = to_curve(pk);

  std::array<std::uint8_t, crypto_box_SEEDBYTES> eseed{};
  entropy.fill(eseed);
  std::array<std::uint8_t, 32> epk{}, esk{};
  crypto_box_seed_keypair(epk.data(), esk.data(), eseed.data());

  std::array<std::uint8_t, 32> shared{};
  if (crypto_scalarmult(shared.data(), esk.data(), recipient.bytes.data()) != 0) {
    throw KeyError("key agreement failed");
  }
  std::array<std::uint8_t, 32> key{};
  std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_NPUBBYTES> nonce{};
  derive(shared.data(), epk.data(), recipient.bytes.data(), key.data(), nonce.data());

  Bytes out(1 + epk.size() + plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  out[0] = kCiphertextVersion;
  std::copy(epk.begin(), epk.end(), out.begin() + 1);
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + 33, &clen, plaintext.data(),
                                             plaintext.size(), epk.data(), epk.size(), nullptr,
                                             nonce.data(), key.data());
  out.resize(33 + clen);

  sodium_memzero(esk.data(), esk.size());
  sodium_memzero(shared.data(), shared.size());
  sodium_memzero(key.data(), key.size());
  sodium_memzero(eseed.data(), eseed.size());
  return out;
}

Bytes decrypt(const SecretKey& sk, ByteView ciphertext) {
  ensure_sodium();
  if (ciphertext.size() < kCiphertextOverhead || ciphertext[0] != kCiphertextVersion) {
    throw DecryptError("malformed ciphertext");
  }
  PublicKey own_pk;
  std::copy(sk.bytes.begin() + 32, sk.bytes.end(), own_pk.bytes.begin());
  Curve25519Public own{};
  if (crypto_sign_ed25519_pk_to_curve25519(own.bytes.data(), own_pk.bytes.data()) != 0) {
    throw DecryptError("secret key is malformed");
  }
  std::array<std::uint8_t, 32> xsk{};
  crypto_sign_ed25519_sk_to_curve25519(xsk.data(), sk.bytes.data());

  const std::uint8_t* epk = ciphertext.data() + 1;
  std::array<std::uint8_t, 32> shared{};
  if (crypto_scalarmult(shared.data(), xsk.data(), epk) != 0) {
    sodium_memzero(xsk.data(), xsk.size());
    throw DecryptError("key agreement failed");
  }
  std::array<std::uint8_t, 32> key{};
  std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_NPUBBYTES> nonce{};
  derive(shared.data(), epk, own.bytes.data(), key.data(), nonce.data());

  Bytes out(ciphertext.size() - kCiphertextOverhead);
  unsigned long long mlen = 0;
  int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(out.data(), &mlen, nullptr,
                                                      ciphertext.data() + 33,
                                                      ciphertext.size() - 33, epk, 32,
                                                      nonce.data(), key.data());
  sodium_memzero(xsk.data(), xsk.size());
  sodium_memzero(shared.data(), shared.size());
  sodium_memzero(key.data(), key.size());
  if (rc != 0) throw DecryptError("authenticated decryption failed");
  out.resize(mlen);
  return out;
}

Digest hash(ByteView data) {
  ensure_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

void write_key_file(const std::filesystem::path& path, ByteView key) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw KeyError("cannot write key file " + path.string());
  out << to_hex(key) << '\n';
}

PublicKey read_public_key_file(const std::filesystem::path& path) {
  try {
    return PublicKey::from_hex(read_hex_file(path));
  } catch (const FormatError& e) {
    throw KeyError(path.string() + ": " + e.what());
  }
}

SecretKey read_secret_key_file(const std::filesystem::path& path) {
  try {
    return SecretKey::from_hex(read_hex_file(path));
  } catch (const FormatError& e) {
    throw KeyError(path.string() + ": " + e.what());
  }
}

KeyPair read_keypair_file(const std::filesystem::path& secret_key_path) {
  KeyPair kp;
  kp.secret_key = read_secret_key_file(secret_key_path);
  kp.public_key = public_key_of(kp.secret_key);
  return kp;
}

}  // namespace dlacb::crypto
