#pragma once

// Primitive suite:
//   hash        SHA-256
//   Gens/Sig/Ver Ed25519 (signature covers the message; Ed25519 hashes internally)
//   Gen/E/Dec   hybrid: ephemeral X25519 agreement with the recipient's
//               Ed25519 key mapped to Curve25519, SHA-256 key derivation,
//               XChaCha20-Poly1305 authenticated encryption.
// One key pair per entity serves both signing and encryption.

#include <cstdint>
#include <filesystem>
#include <string>

#include "dlacb/crypto/entropy.hpp"
#include "dlacb/util/bytes.hpp"

namespace dlacb::crypto {

struct PublicKeyTag {};
struct SecretKeyTag {};
struct SignatureTag {};
struct DigestTag {};

using PublicKey = FixedBytes<32, PublicKeyTag>;
using SecretKey = FixedBytes<64, SecretKeyTag>;  // Ed25519 seed || public key
using Signature = FixedBytes<64, SignatureTag>;
using Digest = FixedBytes<32, DigestTag>;

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
};

inline constexpr std::size_t kSeedBytes = 32;
// version byte + ephemeral public key + Poly1305 tag
inline constexpr std::size_t kCiphertextOverhead = 1 + 32 + 16;

KeyPair generate_keypair(EntropySource& entropy);
KeyPair keypair_from_seed(ByteView seed);  // seed must be 32 bytes
// Recomputes the public half; throws KeyError if the secret key is inconsistent.
PublicKey public_key_of(const SecretKey& sk);

Signature sign(const SecretKey& sk, ByteView message);
bool verify(const PublicKey& pk, ByteView message, const Signature& sig) noexcept;
// Accepts arbitrary byte strings for signature and key; wrong lengths verify false.
bool verify_raw(ByteView pk, ByteView message, ByteView sig) noexcept;

Bytes encrypt(const PublicKey& pk, ByteView plaintext, EntropySource& entropy);
Bytes decrypt(const SecretKey& sk, ByteView ciphertext);

Digest hash(ByteView data);

// Key files hold a single lowercase hex key followed by a newline.
void write_key_file(const std::filesystem::path& path, ByteView key);
PublicKey read_public_key_file(const std::filesystem::path& path);
SecretKey read_secret_key_file(const std::filesystem::path& path);
KeyPair read_keypair_file(const std::filesystem::path& secret_key_path);

}  // namespace dlacb::crypto
