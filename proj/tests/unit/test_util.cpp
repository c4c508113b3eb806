#include "doctest.h"

#include "dlacb/util/bytes.hpp"
#include "dlacb/util/codec.hpp"
#include "dlacb/util/error.hpp"
#include "dlacb/util/expected.hpp"

using namespace dlacb;

TEST_CASE("hex round trip") {
  Bytes b{0x00, 0x01, 0xab, 0xff};
  CHECK(to_hex(b) == "0001abff");
  CHECK(from_hex("0001ABff") == b);
  CHECK_THROWS_AS(from_hex("abc"), FormatError);
  CHECK_THROWS_AS(from_hex("zz"), FormatError);
}

TEST_CASE("encoder is big-endian with u32 length prefixes") {
  Encoder e;
  e.u16(0x0102).u32(0x03040506).u64(7).boolean(true).str("hi");
  Bytes expect{1, 2, 3, 4, 5, 6, 0, 0, 0, 0, 0, 0, 0, 7, 1, 0, 0, 0, 2, 'h', 'i'};
  CHECK(e.data() == expect);

  Decoder d(expect);
  CHECK(d.u16() == 0x0102);
  CHECK(d.u32() == 0x03040506);
  CHECK(d.u64() == 7);
  CHECK(d.boolean());
  CHECK(d.str() == "hi");
  d.finish();
}

TEST_CASE("decoder is strict") {
  Bytes two{0, 2};
  Decoder trailing(two);
  trailing.u8();
  CHECK_THROWS_AS(trailing.finish(), FormatError);

  Bytes bad_bool{2};
  Decoder b(bad_bool);
  CHECK_THROWS_AS(b.boolean(), FormatError);

  Bytes short_str{0, 0, 0, 5, 'a'};
  Decoder s(short_str);
  CHECK_THROWS_AS(s.str(), FormatError);
}

TEST_CASE("expected carries value or error") {
  Expected<int, std::string> ok = 3;
  Expected<int, std::string> bad = unexpected(std::string("no"));
  CHECK(ok);
  CHECK(*ok == 3);
  CHECK_FALSE(bad);
  CHECK(bad.error() == "no");
  Expected<void, int> v;
  CHECK(v);
}
