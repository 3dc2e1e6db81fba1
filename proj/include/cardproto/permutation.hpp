#pragma once

// Position permutations in disjoint cycle notation. A cycle (i j k) moves the
// card at position i to position j, j to k, k to i; applying a permutation to
// a sequence places the card from position p at position sigma(p).

#include <algorithm>
#include <compare>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cardproto/cards.hpp"

namespace cardproto {

class Permutation {
 public:
  // map0[i] = 0-based destination of the card at 0-based position i.
  explicit Permutation(std::vector<int> map0) : map_(std::move(map0)) {
    std::vector<bool> seen(map_.size(), false);
    for (int dest : map_) {
      if (dest < 0 || dest >= static_cast<int>(map_.size()) || seen[static_cast<std::size_t>(dest)])
        throw std::domain_error("permutation mapping is not a bijection");
      seen[static_cast<std::size_t>(dest)] = true;
    }
  }

  static Permutation identity(int k) {
    std::vector<int> map(static_cast<std::size_t>(k));
    std::iota(map.begin(), map.end(), 0);
    return Permutation(std::move(map));
  }

  // Cycles use 1-based positions.
  static Permutation from_cycle_list(const std::vector<std::vector<int>>& cycles, int k) {
    std::vector<int> map(static_cast<std::size_t>(k));
    std::iota(map.begin(), map.end(), 0);
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    for (const auto& cycle : cycles) {
      for (std::size_t i = 0; i < cycle.size(); ++i) {
        int from = cycle[i];
        int to = cycle[(i + 1) % cycle.size()];
        if (from < 1 || from > k || to < 1 || to > k)
          throw std::domain_error("cycle position out of range 1.." + std::to_string(k));
        if (used[static_cast<std::size_t>(from - 1)])
          throw std::domain_error("cycles are not disjoint at position " + std::to_string(from));
        used[static_cast<std::size_t>(from - 1)] = true;
        map[static_cast<std::size_t>(from - 1)] = to - 1;
      }
    }
    return Permutation(std::move(map));
  }

  // Parses "(1 6 4)(2 5)" or "id". Elements may be separated by spaces or commas.
  static Permutation from_cycles(std::string_view text, int k);

  // left_shift by r: apply (1 k k-1 ... 2)^r, i.e. position i receives the
  // card from position i+r (cyclically).
  static Permutation left_shift_of(int k, long r) {
    if (k < 1) throw std::domain_error("shift needs at least one position");
    long rr = ((r % k) + k) % k;
    std::vector<int> map(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) map[static_cast<std::size_t>(i)] = static_cast<int>(((i - rr) % k + k) % k);
    return Permutation(std::move(map));
  }

  static Permutation right_shift_of(int k, long r) { return left_shift_of(k, -r); }

  int size() const { return static_cast<int>(map_.size()); }

  // 1-based in and out.
  int apply(int pos) const {
    if (pos < 1 || pos > size()) throw std::domain_error("position out of range");
    return map_[static_cast<std::size_t>(pos - 1)] + 1;
  }

  // (a.then(b))(x) == b(a(x)): apply this first, then other.
  Permutation then(const Permutation& other) const {
    if (other.size() != size()) throw std::domain_error("composing permutations of different sizes");
    std::vector<int> map(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i)
      map[i] = other.map_[static_cast<std::size_t>(map_[i])];
    return Permutation(std::move(map));
  }

  Permutation inverse() const {
    std::vector<int> map(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i)
      map[static_cast<std::size_t>(map_[i])] = static_cast<int>(i);
    return Permutation(std::move(map));
  }

  Permutation power(long e) const {
    Permutation acc = identity(size());
    for (long i = 0; i < e; ++i) acc = acc.then(*this);
    return acc;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < map_.size(); ++i)
      if (map_[i] != static_cast<int>(i)) return false;
    return true;
  }

  // Canonical form: cycles ordered by smallest element, each starting at its
  // smallest element; fixed points omitted; identity prints as "id".
  std::string to_cycles() const {
    std::string out;
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t start = 0; start < map_.size(); ++start) {
      if (seen[start] || map_[start] == static_cast<int>(start)) continue;
      out.push_back('(');
      std::size_t cur = start;
      bool first = true;
      while (!seen[cur]) {
        seen[cur] = true;
        if (!first) out.push_back(' ');
        out += std::to_string(cur + 1);
        first = false;
        cur = static_cast<std::size_t>(map_[cur]);
      }
      out.push_back(')');
    }
    return out.empty() ? "id" : out;
  }

  const std::vector<int>& raw() const { return map_; }

  auto operator<=>(const Permutation&) const = default;

 private:
  std::vector<int> map_;
};

// Splits "(1 6 4)(2 5)" into cycles of 1-based positions. Throws on syntax
// errors; used by both the library and the script parser (which converts the
// exception into a positioned diagnostic).
inline std::vector<std::vector<int>> parse_cycle_list(std::string_view text) {
  std::vector<std::vector<int>> cycles;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',')) ++i;
  };
  skip_ws();
  if (text.substr(i, 2) == "id") {
    i += 2;
    skip_ws();
    if (i != text.size()) throw std::domain_error("trailing text after 'id'");
    return cycles;
  }
  while (i < text.size()) {
    skip_ws();
    if (i == text.size()) break;
    if (text[i] != '(') throw std::domain_error("expected '(' in cycle notation");
    ++i;
    std::vector<int> cycle;
    while (true) {
      skip_ws();
      if (i == text.size()) throw std::domain_error("unterminated cycle");
      if (text[i] == ')') {
        ++i;
        break;
      }
      if (text[i] < '0' || text[i] > '9') throw std::domain_error("expected position number in cycle");
      int value = 0;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') value = value * 10 + (text[i++] - '0');
      cycle.push_back(value);
    }
    if (cycle.size() < 2) throw std::domain_error("cycle needs at least two positions");
    cycles.push_back(std::move(cycle));
  }
  if (cycles.empty()) throw std::domain_error("empty cycle notation");
  return cycles;
}

inline Permutation Permutation::from_cycles(std::string_view text, int k) {
  return from_cycle_list(parse_cycle_list(text), k);
}

// Card at position p lands at position sigma(p).
inline CardSequence apply_perm(const CardSequence& seq, const Permutation& sigma) {
  if (sigma.size() != seq.size())
    throw std::domain_error("permutation size " + std::to_string(sigma.size()) +
                            " does not match sequence size " + std::to_string(seq.size()));
  std::vector<Card> out(static_cast<std::size_t>(seq.size()));
  for (int pos = 1; pos <= seq.size(); ++pos)
    out[static_cast<std::size_t>(sigma.apply(pos) - 1)] = seq.at(pos);
  return CardSequence(std::move(out));
}

inline CardSequence left_shift(const CardSequence& seq, long r) {
  return apply_perm(seq, Permutation::left_shift_of(seq.size(), r));
}

inline CardSequence right_shift(const CardSequence& seq, long r) {
  return apply_perm(seq, Permutation::right_shift_of(seq.size(), r));
}

}  // namespace cardproto
