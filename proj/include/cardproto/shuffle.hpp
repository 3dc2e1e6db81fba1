#pragma once

// Ideal shuffle oracles: a shuffle is a finite set of permutations sampled
// uniformly, unknown to all parties. Random cuts, k-section cuts and partial
// random cuts are all specific permutation sets.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "cardproto/cards.hpp"
#include "cardproto/permutation.hpp"
#include "cardproto/rational.hpp"

namespace cardproto {

enum class ShuffleKind : std::uint8_t { random_cut, k_section_cut, partial_cut, explicit_set };

inline const char* shuffle_kind_name(ShuffleKind k) {
  switch (k) {
    case ShuffleKind::random_cut: return "random_cut";
    case ShuffleKind::k_section_cut: return "k_section_cut";
    case ShuffleKind::partial_cut: return "partial_cut";
    case ShuffleKind::explicit_set: return "shuffle";
  }
  return "?";
}

struct ShuffleAction {
  ShuffleKind kind = ShuffleKind::explicit_set;
  std::vector<Permutation> perms;  // nonempty, deduplicated, uniform length

  int choices() const { return static_cast<int>(perms.size()); }
  Rational choice_probability() const { return Rational(1, static_cast<std::int64_t>(perms.size())); }

  static ShuffleAction make(ShuffleKind kind, std::vector<Permutation> perms) {
    if (perms.empty()) throw std::domain_error("shuffle needs a nonempty permutation set");
    int len = perms.front().size();
    for (const auto& p : perms)
      if (p.size() != len) throw std::domain_error("shuffle permutations act on different lengths");
    std::sort(perms.begin(), perms.end());
    perms.erase(std::unique(perms.begin(), perms.end()), perms.end());
    return ShuffleAction{kind, std::move(perms)};
  }
};

// Uniform cyclic shift of a k-card sequence.
inline ShuffleAction random_cut(int k) {
  if (k < 1) throw std::domain_error("random cut needs at least one card");
  std::vector<Permutation> perms;
  perms.reserve(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) perms.push_back(Permutation::left_shift_of(k, r));
  return ShuffleAction::make(ShuffleKind::random_cut, std::move(perms));
}

// Uniform shift by whole sections: acts on sections*section_size cards.
inline ShuffleAction k_section_cut(int sections, int section_size) {
  if (sections < 1 || section_size < 1)
    throw std::domain_error("k-section cut needs positive section count and size");
  int len = sections * section_size;
  std::vector<Permutation> perms;
  perms.reserve(static_cast<std::size_t>(sections));
  for (int r = 0; r < sections; ++r)
    perms.push_back(Permutation::left_shift_of(len, static_cast<long>(r) * section_size));
  return ShuffleAction::make(ShuffleKind::k_section_cut, std::move(perms));
}

namespace detail {

// Embeds a permutation of the listed positions into the identity on row_len.
inline Permutation embed_rotation(int row_len, const std::vector<int>& positions, int steps) {
  std::vector<int> map(static_cast<std::size_t>(row_len));
  for (int i = 0; i < row_len; ++i) map[static_cast<std::size_t>(i)] = i;
  int m = static_cast<int>(positions.size());
  for (int i = 0; i < m; ++i) {
    int from = positions[static_cast<std::size_t>(i)];
    int to = positions[static_cast<std::size_t>((i + steps) % m)];
    map[static_cast<std::size_t>(from - 1)] = to - 1;
  }
  return Permutation(std::move(map));
}

}  // namespace detail

// Takes the cards at the listed positions, applies a random cut to them (as a
// pile, in listed order), and returns them to the same positions. All other
// cards are fixed.
inline ShuffleAction partial_random_cut(int row_len, const std::vector<int>& positions) {
  if (positions.size() < 2) throw std::domain_error("partial random cut needs at least two positions");
  std::vector<bool> seen(static_cast<std::size_t>(row_len), false);
  for (int p : positions) {
    if (p < 1 || p > row_len) throw std::domain_error("partial cut position out of range");
    if (seen[static_cast<std::size_t>(p - 1)]) throw std::domain_error("partial cut positions must be distinct");
    seen[static_cast<std::size_t>(p - 1)] = true;
  }
  std::vector<Permutation> perms;
  int m = static_cast<int>(positions.size());
  perms.reserve(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) perms.push_back(detail::embed_rotation(row_len, positions, r));
  return ShuffleAction::make(ShuffleKind::partial_cut, std::move(perms));
}

inline ShuffleAction partial_random_cut(const CardSequence& seq, const std::vector<int>& positions) {
  return partial_random_cut(seq.size(), positions);
}

// Random cut of the contiguous pile [first, last] inside a longer row.
inline ShuffleAction random_cut_range(int row_len, int first, int last) {
  if (first < 1 || last > row_len || first > last) throw std::domain_error("bad cut range");
  int m = last - first + 1;
  std::vector<int> positions(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) positions[static_cast<std::size_t>(i)] = first + i;
  std::vector<Permutation> perms;
  perms.reserve(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) perms.push_back(detail::embed_rotation(row_len, positions, r));
  return ShuffleAction::make(ShuffleKind::random_cut, std::move(perms));
}

// k-section cut of the contiguous range [first, last] inside a longer row.
inline ShuffleAction k_section_cut_range(int row_len, int first, int last, int sections) {
  if (first < 1 || last > row_len || first > last) throw std::domain_error("bad cut range");
  int len = last - first + 1;
  if (sections < 1 || len % sections != 0)
    throw std::domain_error("range length " + std::to_string(len) + " not divisible into " +
                            std::to_string(sections) + " sections");
  int section_size = len / sections;
  std::vector<int> positions(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) positions[static_cast<std::size_t>(i)] = first + i;
  std::vector<Permutation> perms;
  perms.reserve(static_cast<std::size_t>(sections));
  for (int r = 0; r < sections; ++r)
    perms.push_back(detail::embed_rotation(row_len, positions, r * section_size));
  return ShuffleAction::make(ShuffleKind::k_section_cut, std::move(perms));
}

// {id, (1 2)(3 4)...(2k-1 2k)}: the shuffle the random bit XOR protocol is
// distributionally equivalent to.
inline std::vector<Permutation> bit_xor_shuffle_set(int pairs) {
  if (pairs < 1) throw std::domain_error("bit XOR needs at least one commitment");
  int len = 2 * pairs;
  std::vector<std::vector<int>> cycles;
  for (int i = 1; i <= pairs; ++i) cycles.push_back({2 * i - 1, 2 * i});
  return {Permutation::identity(len), Permutation::from_cycle_list(cycles, len)};
}

}  // namespace cardproto
