#pragma once

// Two-suit cards and card sequences: the universal protocol state. All
// operations are pure; a sequence is a cheap value.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cardproto {

enum class Suit : std::uint8_t { club, heart };

inline char suit_char(Suit s) { return s == Suit::club ? 'C' : 'H'; }

inline Suit suit_from_char(char c) {
  if (c == 'C' || c == 'c') return Suit::club;
  if (c == 'H' || c == 'h') return Suit::heart;
  throw std::domain_error(std::string("unknown suit character '") + c + "'");
}

struct Card {
  Suit suit = Suit::club;
  bool face_up = false;

  bool operator==(const Card&) const = default;
};

// Turning cards over records what became visible: positions in the order they
// were listed, plus the suit seen at each.
struct Observation {
  std::vector<int> positions;  // 1-based
  std::string suits;           // 'C'/'H' per revealed position

  bool operator==(const Observation&) const = default;
};

class CardSequence {
 public:
  CardSequence() = default;
  explicit CardSequence(std::vector<Card> cards) : cards_(std::move(cards)) {}

  // Builds a face-down row from a suit string, e.g. "CHC".
  static CardSequence face_down(std::string_view suits) {
    std::vector<Card> cards;
    cards.reserve(suits.size());
    for (char c : suits) cards.push_back({suit_from_char(c), false});
    return CardSequence(std::move(cards));
  }

  int size() const { return static_cast<int>(cards_.size()); }
  bool empty() const { return cards_.empty(); }

  const Card& at(int pos) const {  // 1-based
    check(pos);
    return cards_[static_cast<std::size_t>(pos - 1)];
  }

  const std::vector<Card>& cards() const { return cards_; }

  bool operator==(const CardSequence&) const = default;

  // --- pure operations -----------------------------------------------------

  // Flips every listed position. Cards going face-up are recorded in the
  // observation, in the order the positions were listed.
  std::pair<CardSequence, Observation> turn_over(const std::vector<int>& positions) const {
    CardSequence out = *this;
    Observation obs;
    for (int pos : positions) {
      check(pos);
      Card& card = out.cards_[static_cast<std::size_t>(pos - 1)];
      card.face_up = !card.face_up;
      if (card.face_up) {
        obs.positions.push_back(pos);
        obs.suits.push_back(suit_char(card.suit));
      }
    }
    return {std::move(out), std::move(obs)};
  }

  CardSequence with_card(int pos, Card card) const {
    check(pos);
    CardSequence out = *this;
    out.cards_[static_cast<std::size_t>(pos - 1)] = card;
    return out;
  }

 private:
  void check(int pos) const {
    if (pos < 1 || pos > size())
      throw std::domain_error("card position " + std::to_string(pos) +
                              " out of range 1.." + std::to_string(size()));
  }

  std::vector<Card> cards_;
};

// 'C'/'H' for face-up cards, '?' for face-down.
inline std::string render(const CardSequence& seq) {
  std::string out;
  out.reserve(static_cast<std::size_t>(seq.size()));
  for (const Card& c : seq.cards()) out.push_back(c.face_up ? suit_char(c.suit) : '?');
  return out;
}

// Verification-only rendering: face-down suits shown lowercase.
inline std::string render_peek(const CardSequence& seq) {
  std::string out;
  out.reserve(static_cast<std::size_t>(seq.size()));
  for (const Card& c : seq.cards()) {
    char ch = suit_char(c.suit);
    out.push_back(c.face_up ? ch : static_cast<char>(ch - 'A' + 'a'));
  }
  return out;
}

// {clubs, hearts}; conserved by every action.
inline std::array<int, 2> suit_counts(const CardSequence& seq) {
  std::array<int, 2> counts{0, 0};
  for (const Card& c : seq.cards()) ++counts[c.suit == Suit::club ? 0 : 1];
  return counts;
}

inline std::string render_observation(const Observation& obs) {
  std::string out;
  for (std::size_t i = 0; i < obs.positions.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(obs.positions[i]);
  }
  out.push_back(':');
  out += obs.suits;
  return out;
}

}  // namespace cardproto
