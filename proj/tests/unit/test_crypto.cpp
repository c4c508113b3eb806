#include "doctest.h"

#include <openssl/evp.h>

#include <filesystem>
#include <set>

#include "dlacb/crypto/crypto.hpp"
#include "dlacb/decision/rng.hpp"
#include "dlacb/util/error.hpp"

using namespace dlacb;
using namespace dlacb::crypto;

namespace {

Bytes openssl_sha256(ByteView data) {
  Bytes out(32);
  unsigned int len = 0;
  REQUIRE(EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) == 1);
  REQUIRE(len == 32);
  return out;
}

Bytes random_bytes(decision::SplitMix64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng.next());
  return b;
}

Bytes flip_bit(Bytes b, std::size_t bit) {
  b[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  return b;
}

}  // namespace

TEST_CASE("sha256 reference vectors") {
  CHECK(hash(as_bytes("")).hex() ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(hash(as_bytes("abc")).hex() ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("sha256 agrees with openssl on random inputs") {
  decision::SplitMix64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    auto data = random_bytes(rng, rng.below(300));
    auto ours = hash(data);
    REQUIRE(Bytes(ours.bytes.begin(), ours.bytes.end()) == openssl_sha256(data));
  }
}

TEST_CASE("seeded key generation is reproducible") {
  SeededEntropy a(7), b(7), c(8);
  auto ka = generate_keypair(a);
  auto kb = generate_keypair(b);
  auto kc = generate_keypair(c);
  CHECK(ka.public_key == kb.public_key);
  CHECK(ka.secret_key == kb.secret_key);
  CHECK(ka.public_key != kc.public_key);
  CHECK(public_key_of(ka.secret_key) == ka.public_key);
}

TEST_CASE("ten thousand key generations give distinct public keys") {
  std::set<PublicKey> seen;
  SeededEntropy entropy(1);
  for (int i = 0; i < 10000; ++i) seen.insert(generate_keypair(entropy).public_key);
  CHECK(seen.size() == 10000);
}

TEST_CASE("sign and verify") {
  SeededEntropy entropy(3);
  auto k = generate_keypair(entropy);
  auto other = generate_keypair(entropy);
  auto sig = sign(k.secret_key, as_bytes("abc"));
  CHECK(verify(k.public_key, as_bytes("abc"), sig));
  CHECK_FALSE(verify(k.public_key, as_bytes("abd"), sig));
  CHECK_FALSE(verify(other.public_key, as_bytes("abc"), sig));

  auto empty_sig = sign(k.secret_key, {});
  CHECK(verify(k.public_key, {}, empty_sig));

  CHECK_FALSE(verify_raw(k.public_key.view(), as_bytes("abc"), sig.view().first(63)));
  CHECK_FALSE(verify_raw(k.public_key.view().first(31), as_bytes("abc"), sig.view()));
  CHECK_FALSE(verify_raw({}, {}, {}));
}

TEST_CASE("sign rejects an inconsistent secret key") {
  SeededEntropy entropy(4);
  auto k = generate_keypair(entropy);
  auto bad = k.secret_key;
  bad.bytes[40] ^= 1;
  CHECK_THROWS_AS(sign(bad, as_bytes("x")), KeyError);
}

TEST_CASE("any single bit flip breaks verification") {
  SeededEntropy entropy(5);
  decision::SplitMix64 rng(5);
  auto k = generate_keypair(entropy);
  for (int trial = 0; trial < 200; ++trial) {
    auto msg = random_bytes(rng, 1 + rng.below(64));
    auto sig = sign(k.secret_key, msg);
    Bytes pk(k.public_key.bytes.begin(), k.public_key.bytes.end());
    Bytes sg(sig.bytes.begin(), sig.bytes.end());
    REQUIRE(verify_raw(pk, msg, sg));
    CHECK_FALSE(verify_raw(pk, flip_bit(msg, rng.below(msg.size() * 8)), sg));
    CHECK_FALSE(verify_raw(pk, msg, flip_bit(sg, rng.below(512))));
    CHECK_FALSE(verify_raw(flip_bit(pk, rng.below(256)), msg, sg));
  }
}

TEST_CASE("hybrid encryption") {
  SeededEntropy entropy(9);
  auto k = generate_keypair(entropy);
  auto other = generate_keypair(entropy);
  auto m = as_bytes("link|nonce|time");
  auto c1 = encrypt(k.public_key, m, entropy);
  auto c2 = encrypt(k.public_key, m, entropy);
  CHECK(c1.size() == m.size() + kCiphertextOverhead);
  CHECK(c1 != c2);
  CHECK(decrypt(k.secret_key, c1) == Bytes(m.begin(), m.end()));
  CHECK_THROWS_AS(decrypt(other.secret_key, c1), DecryptError);

  for (std::size_t bit = 0; bit < c1.size() * 8; bit += 37) {
    CHECK_THROWS_AS(decrypt(k.secret_key, flip_bit(c1, bit)), DecryptError);
  }
  CHECK_THROWS_AS(decrypt(k.secret_key, ByteView(c1).first(10)), DecryptError);

  auto ce = encrypt(k.public_key, {}, entropy);
  CHECK(decrypt(k.secret_key, ce).empty());
}

TEST_CASE("one mebibyte payload round trips") {
  SeededEntropy entropy(10);
  decision::SplitMix64 rng(10);
  auto k = generate_keypair(entropy);
  auto m = random_bytes(rng, 1 << 20);
  CHECK(decrypt(k.secret_key, encrypt(k.public_key, m, entropy)) == m);
}

TEST_CASE("encrypting to a malformed key fails") {
  SeededEntropy entropy(11);
  PublicKey bogus;  // all zero: not a valid curve point
  CHECK_THROWS_AS(encrypt(bogus, as_bytes("x"), entropy), KeyError);
}

TEST_CASE("key files hold lowercase hex") {
  SeededEntropy entropy(12);
  auto k = generate_keypair(entropy);
  auto dir = std::filesystem::temp_directory_path() / "dlacb_test_keys";
  std::filesystem::create_directories(dir);
  write_key_file(dir / "a.pub", k.public_key.view());
  write_key_file(dir / "a.key", k.secret_key.view());
  CHECK(read_public_key_file(dir / "a.pub") == k.public_key);
  auto pair = read_keypair_file(dir / "a.key");
  CHECK(pair.public_key == k.public_key);
  CHECK_THROWS_AS(read_public_key_file(dir / "a.key"), KeyError);
  std::filesystem::remove_all(dir);
}
