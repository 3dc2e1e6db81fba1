#pragma once

// Bit commitments and integer encodings. A commitment is two face-down cards:
// club-heart encodes 0, heart-club encodes 1. An integer a in Z/kZ is a row of
// k face-down cards with a single off-suit card at position a+1.

#include <optional>
#include <stdexcept>
#include <string>

#include "cardproto/cards.hpp"

namespace cardproto {

enum class Scheme : std::uint8_t { club, heart };  // the scheme names its marker suit

inline const char* scheme_name(Scheme s) { return s == Scheme::club ? "club" : "heart"; }

inline CardSequence encode_bit(int b) {
  if (b != 0 && b != 1) throw std::domain_error("bit must be 0 or 1");
  return CardSequence::face_down(b == 0 ? "CH" : "HC");
}

// Reads the pair at (pos, pos+1) regardless of orientation; verification peek.
inline std::optional<int> decode_bit_at(const CardSequence& seq, int first, int second) {
  Suit a = seq.at(first).suit, b = seq.at(second).suit;
  if (a == b) return std::nullopt;
  return a == Suit::heart ? 1 : 0;
}

inline int decode_bit(const CardSequence& seq) {
  if (seq.size() != 2) throw std::domain_error("commitment must have exactly two cards");
  auto v = decode_bit_at(seq, 1, 2);
  if (!v) throw std::domain_error("not a commitment: both cards share a suit");
  return *v;
}

inline CardSequence encode_int(long a, int k, Scheme scheme) {
  if (k < 2) throw std::domain_error("integer encoding needs modulus >= 2");
  if (a < 0 || a >= k)
    throw std::domain_error("value " + std::to_string(a) + " outside Z/" + std::to_string(k) + "Z");
  Suit marker = scheme == Scheme::club ? Suit::club : Suit::heart;
  Suit filler = scheme == Scheme::club ? Suit::heart : Suit::club;
  std::vector<Card> cards(static_cast<std::size_t>(k), Card{filler, false});
  cards[static_cast<std::size_t>(a)] = Card{marker, false};
  return CardSequence(std::move(cards));
}

// Decodes k cards starting at `first`; fails if the marker count is not one.
inline std::optional<long> decode_int_at(const CardSequence& seq, int first, int k, Scheme scheme) {
  Suit marker = scheme == Scheme::club ? Suit::club : Suit::heart;
  std::optional<long> value;
  for (int i = 0; i < k; ++i) {
    if (seq.at(first + i).suit == marker) {
      if (value) return std::nullopt;
      value = i;
    }
  }
  return value;
}

inline long decode_int(const CardSequence& seq, Scheme scheme) {
  auto v = decode_int_at(seq, 1, seq.size(), scheme);
  if (!v) throw std::domain_error("row is not a valid integer encoding");
  return *v;
}

// Suit pattern of E_k^scheme(a), e.g. "HCH" for E_3^club(1).
inline std::string int_encoding_pattern(long a, int k, Scheme scheme) {
  char marker = scheme == Scheme::club ? 'C' : 'H';
  char filler = scheme == Scheme::club ? 'H' : 'C';
  std::string pattern(static_cast<std::size_t>(k), filler);
  pattern[static_cast<std::size_t>(a)] = marker;
  return pattern;
}

}  // namespace cardproto
