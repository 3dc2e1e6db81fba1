#include <catch2/catch_amalgamated.hpp>

#include "cardproto/encoding.hpp"

using namespace cardproto;

TEST_CASE("bit commitments use club-heart for 0 and heart-club for 1") {
  CHECK(render_peek(encode_bit(0)) == "ch");
  CHECK(render_peek(encode_bit(1)) == "hc");
  CHECK(decode_bit(encode_bit(0)) == 0);
  CHECK(decode_bit(encode_bit(1)) == 1);
  CHECK_THROWS_AS(encode_bit(2), std::domain_error);
  CHECK_THROWS_AS(decode_bit(CardSequence::face_down("CC")), std::domain_error);
}

TEST_CASE("integer encodings place the marker at value plus one") {
  CHECK(render_peek(encode_int(1, 3, Scheme::club)) == "hch");   // E_3^club(1)
  CHECK(render_peek(encode_int(2, 4, Scheme::heart)) == "cchc"); // E_4^heart(2)
  // value 0 in the heart scheme: heart first, then clubs
  for (int k = 2; k <= 6; ++k) {
    auto zero = encode_int(0, k, Scheme::heart);
    CHECK(zero.at(1).suit == Suit::heart);
    for (int p = 2; p <= k; ++p) CHECK(zero.at(p).suit == Suit::club);
  }
}

TEST_CASE("integer encoding round-trips for all values up to k = 16") {
  for (int k = 2; k <= 16; ++k)
    for (long a = 0; a < k; ++a) {
      CHECK(decode_int(encode_int(a, k, Scheme::club), Scheme::club) == a);
      CHECK(decode_int(encode_int(a, k, Scheme::heart), Scheme::heart) == a);
    }
}

TEST_CASE("integer encoding rejects out-of-range values") {
  CHECK_THROWS_AS(encode_int(3, 3, Scheme::club), std::domain_error);
  CHECK_THROWS_AS(encode_int(-1, 3, Scheme::club), std::domain_error);
  CHECK_THROWS_AS(encode_int(0, 1, Scheme::club), std::domain_error);
}

TEST_CASE("decoding detects malformed rows") {
  CHECK_FALSE(decode_int_at(CardSequence::face_down("CCH"), 1, 3, Scheme::club).has_value());
  CHECK_FALSE(decode_int_at(CardSequence::face_down("HHH"), 1, 3, Scheme::club).has_value());
  CHECK(decode_int_at(CardSequence::face_down("HCH"), 1, 3, Scheme::club) == 1);
}

TEST_CASE("turning over an integer encoding shows its pattern") {
  auto row = encode_int(1, 3, Scheme::club);
  auto [up, obs] = row.turn_over({1, 2, 3});
  CHECK(obs.suits == "HCH");
  CHECK(int_encoding_pattern(1, 3, Scheme::club) == "HCH");
  CHECK(int_encoding_pattern(2, 4, Scheme::heart) == "CCHC");
}
