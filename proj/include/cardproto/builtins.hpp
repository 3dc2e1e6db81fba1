#pragma once

// The paper's protocols, built as programs over the engine's statements.
// Construction tracks card positions through every rearrangement; shuffled
// blocks are only ever referenced through their public structure (which the
// reveal/branch steps pin down), never through hidden card identities.

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cardproto/encoding.hpp"
#include "cardproto/engine.hpp"
#include "cardproto/protocol.hpp"
#include "cardproto/shuffle.hpp"

namespace cardproto {

inline int ceil_lg(int k) {
  if (k < 2) throw std::domain_error("ceil_lg needs k >= 2");
  int bits = 0;
  int v = 1;
  while (v < k) {
    v *= 2;
    ++bits;
  }
  return bits;
}

// All distinct suit strings with the given multiset, lexicographic order.
inline std::vector<std::string> multiset_patterns(int clubs, int hearts) {
  std::string pattern(static_cast<std::size_t>(clubs), 'C');
  pattern += std::string(static_cast<std::size_t>(hearts), 'H');
  std::vector<std::string> out;
  do {
    out.push_back(pattern);
  } while (std::next_permutation(pattern.begin(), pattern.end()));
  return out;
}

inline bool is_rotation_of(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  return (a + a).find(b) != std::string::npos;
}

namespace builddetail {

struct BuildCtx {
  Program* prog = nullptr;
  std::vector<bool> up;      // orientation per position, 0-based
  std::vector<int> tracked;  // tracked positions, 1-based

  int row() const { return static_cast<int>(up.size()); }
  int pos(int ti) const { return tracked[static_cast<std::size_t>(ti)]; }
  int track(int position) {
    tracked.push_back(position);
    return static_cast<int>(tracked.size()) - 1;
  }
};

struct PairIdx {
  int a = -1, b = -1;  // tracked indices of a commitment's two cards
};

template <typename Node>
void push(BuildCtx& c, Node node) {
  c.prog->push_back(Statement{std::move(node), SourceLoc{}});
}

inline void apply_tracking(BuildCtx& c, const Permutation& perm) {
  std::vector<bool> up(c.up.size());
  for (int p = 1; p <= c.row(); ++p)
    up[static_cast<std::size_t>(perm.apply(p) - 1)] = c.up[static_cast<std::size_t>(p - 1)];
  c.up = std::move(up);
  for (int& t : c.tracked) t = perm.apply(t);
}

inline void emit_perm(BuildCtx& c, const Permutation& perm) {
  if (perm.is_identity()) return;
  apply_tracking(c, perm);
  push(c, PermStmt{perm});
}

inline void emit_perm_cycles(BuildCtx& c, const std::vector<std::vector<int>>& cycles) {
  emit_perm(c, Permutation::from_cycle_list(cycles, c.row()));
}

// Moves the listed positions to the front (in order); everything else keeps
// its relative order behind them.
inline void emit_front(BuildCtx& c, const std::vector<int>& front) {
  std::vector<int> take = front;
  std::vector<bool> used(static_cast<std::size_t>(c.row() + 1), false);
  for (int p : front) {
    if (p < 1 || p > c.row() || used[static_cast<std::size_t>(p)])
      throw std::logic_error("builder arrange list is not a partial permutation");
    used[static_cast<std::size_t>(p)] = true;
  }
  for (int p = 1; p <= c.row(); ++p)
    if (!used[static_cast<std::size_t>(p)]) take.push_back(p);
  std::vector<int> map0(static_cast<std::size_t>(c.row()));
  for (int newpos = 1; newpos <= c.row(); ++newpos)
    map0[static_cast<std::size_t>(take[static_cast<std::size_t>(newpos - 1)] - 1)] = newpos - 1;
  emit_perm(c, Permutation(std::move(map0)));
}

// Rotates the cards at the listed positions by `steps` along the list.
inline void emit_rotation(BuildCtx& c, const std::vector<int>& positions, int steps) {
  int m = static_cast<int>(positions.size());
  if (steps % m == 0) return;
  emit_perm(c, detail::embed_rotation(c.row(), positions, steps % m));
}

inline void emit_shuffle(BuildCtx& c, ShuffleAction action) {
  push(c, ShuffleStmt{std::move(action)});
}

inline void emit_reveal(BuildCtx& c, std::vector<int> positions) {
  for (int p : positions) c.up[static_cast<std::size_t>(p - 1)] = true;
  push(c, RevealStmt{std::move(positions)});
}

inline void emit_hide(BuildCtx& c, std::vector<int> positions) {
  std::sort(positions.begin(), positions.end());
  for (int p : positions) c.up[static_cast<std::size_t>(p - 1)] = false;
  push(c, HideStmt{std::move(positions)});
}

inline void output_public(BuildCtx& c, long value) {
  OutputStmt out;
  out.kind = OutputStmt::Kind::public_value;
  out.value = value;
  push(c, out);
}

inline void output_committed(BuildCtx& c, int first, int second) {
  OutputStmt out;
  out.kind = OutputStmt::Kind::committed_bit;
  out.first = first;
  out.second = second;
  push(c, out);
}

inline void output_row(BuildCtx& c, int first, int last, Scheme scheme) {
  OutputStmt out;
  out.kind = OutputStmt::Kind::committed_row;
  out.row_first = first;
  out.row_last = last;
  out.row_scheme = scheme;
  push(c, out);
}

using ArmBuilder = std::function<void(BuildCtx&)>;

inline void emit_branch(BuildCtx& c, const std::vector<std::pair<std::string, ArmBuilder>>& arms) {
  BranchStmt branch;
  for (const auto& [pattern, build] : arms) {
    BranchArm arm;
    arm.pattern = pattern;
    BuildCtx sub;
    sub.prog = &arm.body;
    sub.up = c.up;
    sub.tracked = c.tracked;
    build(sub);
    branch.arms.push_back(std::move(arm));
  }
  push(c, std::move(branch));
}

// Random bit XOR over the commitments at positions (1,2)..(2k-1,2k):
// gather the first cards then the second cards, apply a random 2-section cut,
// regroup. One shuffle; equivalent to {id, (1 2)(3 4)...}.
inline void emit_xorall(BuildCtx& c, int pairs) {
  std::vector<int> gather;
  for (int i = 1; i <= pairs; ++i) gather.push_back(2 * i - 1);
  for (int i = 1; i <= pairs; ++i) gather.push_back(2 * i);
  emit_front(c, gather);
  emit_shuffle(c, k_section_cut_range(c.row(), 1, 2 * pairs, 2));
  std::vector<int> regroup;
  for (int i = 1; i <= pairs; ++i) {
    regroup.push_back(i);
    regroup.push_back(pairs + i);
  }
  emit_front(c, regroup);
}

// One addition round: the heart-scheme row sits at 1..k, the club-scheme row
// at k+1..2k. Interleave, random k-section cut, de-interleave, reveal the
// club-scheme row as s, correct the heart-scheme row. The continuation runs
// per revealed s with the sum row at 1..k and the revealed cards face-up at
// k+1..2k (one club at k+1+s, hearts elsewhere).
inline void emit_add_round(BuildCtx& c, int k,
                           const std::function<void(BuildCtx&, int)>& cont) {
  std::vector<int> interleave;
  for (int i = 0; i < k; ++i) {
    interleave.push_back(i + 1);
    interleave.push_back(2 * k - i);
  }
  emit_front(c, interleave);
  emit_shuffle(c, k_section_cut_range(c.row(), 1, 2 * k, k));
  std::vector<int> split;
  for (int i = 1; i <= k; ++i) split.push_back(2 * i - 1);
  for (int j = 0; j < k; ++j) split.push_back(2 * k - 2 * j);
  emit_front(c, split);
  std::vector<int> reveal;
  for (int p = k + 1; p <= 2 * k; ++p) reveal.push_back(p);
  emit_reveal(c, reveal);

  std::vector<int> sum_row;
  for (int p = 1; p <= k; ++p) sum_row.push_back(p);
  std::vector<std::pair<std::string, ArmBuilder>> arms;
  for (int s = 0; s < k; ++s) {
    arms.emplace_back(int_encoding_pattern(s, k, Scheme::club), [&, s](BuildCtx& sub) {
      emit_rotation(sub, sum_row, s);  // value grows by the revealed s
      cont(sub, s);
    });
  }
  emit_branch(c, arms);
}

// Sums the listed commitments into a heart-scheme row at 1..m+1 using one
// free club and one free heart. Pass the pairs with their cards swapped to
// sum the complemented bits. m-1 additions for m >= 2; m == 1 just re-forms
// the single commitment as a two-card row.
inline void emit_sum(BuildCtx& c, const std::vector<PairIdx>& pairs, int club_ti, int heart_ti,
                     const std::function<void(BuildCtx&, int)>& cont) {
  int m = static_cast<int>(pairs.size());
  if (m == 0) throw std::logic_error("sum needs at least one commitment");
  if (m == 1) {
    // E_2^heart(bit) is the swapped commitment
    emit_front(c, {c.pos(pairs[0].b), c.pos(pairs[0].a)});
    cont(c, 2);
    return;
  }

  // C_1 = (y1, x1, club) at 1..3, C_2 = (x2, y2, heart) at 4..6, rest after.
  {
    std::vector<int> face_up;
    if (c.up[static_cast<std::size_t>(c.pos(club_ti) - 1)]) face_up.push_back(c.pos(club_ti));
    if (c.up[static_cast<std::size_t>(c.pos(heart_ti) - 1)]) face_up.push_back(c.pos(heart_ti));
    if (!face_up.empty()) emit_hide(c, face_up);
  }
  std::vector<int> front = {c.pos(pairs[0].b), c.pos(pairs[0].a), c.pos(club_ti),
                            c.pos(pairs[1].a), c.pos(pairs[1].b), c.pos(heart_ti)};
  for (int i = 2; i < m; ++i) {
    front.push_back(c.pos(pairs[static_cast<std::size_t>(i)].a));
    front.push_back(c.pos(pairs[static_cast<std::size_t>(i)].b));
  }
  emit_front(c, front);

  // Round r adds bit r+1 under modulus k = r+2. Invariant entering a round:
  // the sum row sits at 1..k, the next operand row at k+1..2k, pending pairs
  // from 2k+1 on.
  std::function<void(BuildCtx&, int)> round = [&, m](BuildCtx& cc, int r) {
    int k = r + 2;
    emit_add_round(cc, k, [&, r, k, m](BuildCtx& sub, int s) {
      if (r == m - 1) {
        cont(sub, k);
        return;
      }
      // Recycle the revealed row: club extends the sum row, hearts pad the
      // next commitment into a club-scheme row.
      std::vector<int> revealed;
      for (int p = k + 1; p <= 2 * k; ++p) revealed.push_back(p);
      emit_hide(sub, revealed);
      std::vector<int> next;
      for (int p = 1; p <= k; ++p) next.push_back(p);
      next.push_back(k + 1 + s);
      next.push_back(2 * k + 1);  // next pair, first card
      next.push_back(2 * k + 2);
      for (int p = k + 1; p <= 2 * k; ++p)
        if (p != k + 1 + s) next.push_back(p);
      emit_front(sub, next);
      round(sub, r + 1);
    });
  };
  round(c, 1);
}

// Left-to-right AND fold. acc and the queued pairs are tracked commitments;
// club/heart point at the two helper cards (face-up helpers get hidden).
// Each step arranges (acc, operand, club, heart) to 1..6 and runs the
// perm/cut/perm sandwich; the revealed first pair becomes the next helper.
// The continuation receives the output commitment and the current helpers.
inline void emit_and_fold(BuildCtx& c, PairIdx acc, std::vector<PairIdx> queue, int club_ti,
                          int heart_ti,
                          const std::function<void(BuildCtx&, PairIdx, int, int)>& cont) {
  if (queue.empty()) {
    if (c.pos(acc.a) > c.pos(acc.b)) emit_perm_cycles(c, {{c.pos(acc.b), c.pos(acc.a)}});
    cont(c, acc, club_ti, heart_ti);
    return;
  }
  {
    std::vector<int> face_up;
    if (c.up[static_cast<std::size_t>(c.pos(club_ti) - 1)]) face_up.push_back(c.pos(club_ti));
    if (c.up[static_cast<std::size_t>(c.pos(heart_ti) - 1)]) face_up.push_back(c.pos(heart_ti));
    if (!face_up.empty()) emit_hide(c, face_up);
  }
  PairIdx operand = queue.front();
  queue.erase(queue.begin());
  emit_front(c, {c.pos(acc.a), c.pos(acc.b), c.pos(operand.a), c.pos(operand.b), c.pos(club_ti),
                 c.pos(heart_ti)});
  emit_perm_cycles(c, {{2, 4, 3}});
  emit_shuffle(c, k_section_cut_range(c.row(), 1, 6, 2));
  emit_perm_cycles(c, {{2, 3, 4}});
  emit_reveal(c, {1, 2});

  auto continue_arm = [&, queue](BuildCtx& sub, int out_first, int out_second, int club_pos,
                                 int heart_pos) {
    PairIdx out{sub.track(out_first), sub.track(out_second)};
    int next_club = sub.track(club_pos);
    int next_heart = sub.track(heart_pos);
    emit_and_fold(sub, out, queue, next_club, next_heart, cont);
  };
  emit_branch(c, {{"CH", [&](BuildCtx& sub) { continue_arm(sub, 5, 6, 1, 2); }},
                  {"HC", [&](BuildCtx& sub) { continue_arm(sub, 3, 4, 2, 1); }}});
}

inline Protocol finish(std::string name, std::vector<std::pair<std::string, long>> params,
                       InputDomain domain, std::function<CardSequence(const std::vector<long>&)> layout,
                       Program body) {
  validate_structure(body);
  Protocol p;
  p.name = std::move(name);
  p.params = std::move(params);
  p.domain = std::move(domain);
  p.layout = std::move(layout);
  p.body = std::move(body);
  CardSequence sample = p.layout(std::vector<long>(p.domain.moduli.size(), 0));
  p.cards = sample.size();
  auto counts = suit_counts(sample);
  p.clubs = counts[0];
  p.hearts = counts[1];
  return p;
}

inline std::string commitment_suits(long bit) { return bit ? "HC" : "CH"; }

}  // namespace builddetail

// --- five-card trick: two bits -> public AND --------------------------------

inline Protocol five_card_trick() {
  using namespace builddetail;
  auto layout = [](const std::vector<long>& in) {
    return CardSequence::face_down(commitment_suits(in[0]) + "C" + commitment_suits(in[1]));
  };
  Program body;
  BuildCtx c{&body, std::vector<bool>(5, false), {}};
  emit_perm_cycles(c, {{4, 5}});  // swap the second player's commitment
  emit_shuffle(c, random_cut_range(5, 1, 5));
  emit_reveal(c, {1, 2, 3, 4, 5});
  std::vector<std::pair<std::string, ArmBuilder>> arms;
  for (const std::string& pattern : multiset_patterns(3, 2))
    arms.emplace_back(pattern, [&, pattern](BuildCtx& sub) {
      output_public(sub, is_rotation_of(pattern, "HHCCC") ? 1 : 0);
    });
  emit_branch(c, arms);
  return finish("five_card_trick", {}, InputDomain{{2, 2}}, layout, std::move(body));
}

// --- six-card trick: three bits -> public equality ---------------------------

inline Protocol six_card_trick() {
  using namespace builddetail;
  auto layout = [](const std::vector<long>& in) {
    return CardSequence::face_down(commitment_suits(in[0]) + commitment_suits(in[1]) +
                                   commitment_suits(in[2]));
  };
  Program body;
  BuildCtx c{&body, std::vector<bool>(6, false), {}};
  emit_perm_cycles(c, {{2, 4, 6}});
  emit_shuffle(c, random_cut_range(6, 1, 6));
  emit_reveal(c, {1, 2, 3, 4, 5, 6});
  std::vector<std::pair<std::string, ArmBuilder>> arms;
  for (const std::string& pattern : multiset_patterns(3, 3))
    arms.emplace_back(pattern, [&, pattern](BuildCtx& sub) {
      output_public(sub, is_rotation_of(pattern, "CHCHCH") ? 1 : 0);
    });
  emit_branch(c, arms);
  return finish("six_card_trick", {}, InputDomain{{2, 2, 2}}, layout, std::move(body));
}

// --- addition of two integers mod k ------------------------------------------

inline Protocol add_mod(int k) {
  using namespace builddetail;
  if (k < 2) throw std::domain_error("addition needs modulus k >= 2");
  auto layout = [k](const std::vector<long>& in) {
    return CardSequence::face_down(int_encoding_pattern(in[0], k, Scheme::heart) +
                                   int_encoding_pattern(in[1], k, Scheme::club));
  };
  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * k), false), {}};
  emit_add_round(c, k, [k](BuildCtx& sub, int) { output_row(sub, 1, k, Scheme::heart); });
  return finish("add", {{"k", k}}, InputDomain{{k, k}}, layout, std::move(body));
}

// --- running sum of all n bits (needs the two extra cards) -------------------

inline Protocol sum_rows(int n) {
  using namespace builddetail;
  if (n < 2) throw std::domain_error("sum needs n >= 2");
  auto layout = [n](const std::vector<long>& in) {
    std::string suits;
    for (int i = 0; i < n; ++i) suits += commitment_suits(in[static_cast<std::size_t>(i)]);
    return CardSequence::face_down(suits + "CH");
  };
  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * n + 2), false), {}};
  std::vector<PairIdx> pairs;
  for (int i = 1; i <= n; ++i) pairs.push_back({c.track(2 * i - 1), c.track(2 * i)});
  int club = c.track(2 * n + 1);
  int heart = c.track(2 * n + 2);
  emit_sum(c, pairs, club, heart,
           [](BuildCtx& sub, int len) { output_row(sub, 1, len, Scheme::heart); });
  return finish("sum", {{"n", n}}, InputDomain{std::vector<int>(static_cast<std::size_t>(n), 2)},
                layout, std::move(body));
}

// --- Mizuki-Sone AND gate (fragment, exposed for tests) ----------------------

inline Protocol and_gate() {
  using namespace builddetail;
  auto layout = [](const std::vector<long>& in) {
    return CardSequence::face_down(commitment_suits(in[0]) + commitment_suits(in[1]) + "CH");
  };
  Program body;
  BuildCtx c{&body, std::vector<bool>(6, false), {}};
  PairIdx acc{c.track(1), c.track(2)};
  std::vector<PairIdx> queue{{c.track(3), c.track(4)}};
  int club = c.track(5);
  int heart = c.track(6);
  emit_and_fold(c, acc, queue, club, heart, [](BuildCtx& sub, PairIdx out, int, int) {
    output_committed(sub, sub.pos(out.a), sub.pos(out.b));
  });
  return finish("and", {}, InputDomain{{2, 2}}, layout, std::move(body));
}

namespace builddetail {

inline std::function<CardSequence(const std::vector<long>&)> commitments_layout(int n) {
  return [n](const std::vector<long>& in) {
    std::string suits;
    for (int i = 0; i < n; ++i) suits += commitment_suits(in[static_cast<std::size_t>(i)]);
    return CardSequence::face_down(suits);
  };
}

// Shared tail of the first protocol and its generalization: XOR-randomize,
// reveal the last bit, optionally complement, then sum the remaining n-1 bits.
inline void build_first_protocol_body(BuildCtx& c, int n,
                                      const std::function<void(BuildCtx&, int)>& with_sum_row) {
  emit_xorall(c, n);
  emit_reveal(c, {2 * n - 1, 2 * n});
  auto arm = [&, n](BuildCtx& sub, bool negate, int club_pos, int heart_pos) {
    std::vector<PairIdx> pairs;
    for (int i = 1; i <= n - 1; ++i) {
      int a = sub.track(2 * i - 1);
      int b = sub.track(2 * i);
      pairs.push_back(negate ? PairIdx{b, a} : PairIdx{a, b});
    }
    int club = sub.track(club_pos);
    int heart = sub.track(heart_pos);
    emit_sum(sub, pairs, club, heart, with_sum_row);
  };
  // revealed bit 0: sum the bits as they are; revealed bit 1: complement all
  emit_branch(c, {{"CH", [&](BuildCtx& sub) { arm(sub, false, 2 * n - 1, 2 * n); }},
                  {"HC", [&](BuildCtx& sub) { arm(sub, true, 2 * n, 2 * n - 1); }}});
}

inline void reveal_sum_row(BuildCtx& c, int len,
                           const std::function<long(int)>& value_of) {
  std::vector<int> row;
  for (int p = 1; p <= len; ++p) row.push_back(p);
  emit_reveal(c, row);
  std::vector<std::pair<std::string, ArmBuilder>> arms;
  for (int t = 0; t < len; ++t)
    arms.emplace_back(int_encoding_pattern(t, len, Scheme::heart),
                      [&, t](BuildCtx& sub) { output_public(sub, value_of(t)); });
  emit_branch(c, arms);
}

}  // namespace builddetail

// --- first equality protocol: n bits, 2n cards, public result ----------------

inline Protocol equality_first(int n) {
  using namespace builddetail;
  if (n < 2) throw std::domain_error("equality needs n >= 2");
  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * n), false), {}};
  build_first_protocol_body(c, n, [n](BuildCtx& sub, int len) {
    // hide everything about the sum except whether it is zero
    emit_shuffle(sub, random_cut_range(2 * n, 2, len));
    reveal_sum_row(sub, len, [](int t) { return t == 0 ? 1L : 0L; });
  });
  return finish("equality_first", {{"n", n}},
                InputDomain{std::vector<int>(static_cast<std::size_t>(n), 2)},
                commitments_layout(n), std::move(body));
}

// Sabotage fixture: the final random cut is skipped, so the sum row leaks.
inline Protocol equality_first_no_final_cut(int n) {
  using namespace builddetail;
  if (n < 2) throw std::domain_error("equality needs n >= 2");
  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * n), false), {}};
  build_first_protocol_body(c, n, [](BuildCtx& sub, int len) {
    reveal_sum_row(sub, len, [](int t) { return t == 0 ? 1L : 0L; });
  });
  return finish("equality_first_nocut", {{"n", n}},
                InputDomain{std::vector<int>(static_cast<std::size_t>(n), 2)},
                commitments_layout(n), std::move(body));
}

// Sabotage fixture: peeks at the first commitment before any shuffle.
inline Protocol five_card_trick_peek() {
  using namespace builddetail;
  Protocol p = five_card_trick();
  Program body;
  BuildCtx c{&body, std::vector<bool>(5, false), {}};
  emit_reveal(c, {1, 2});
  emit_hide(c, {1, 2});
  for (Statement& stmt : p.body) body.push_back(std::move(stmt));
  p.body = std::move(body);
  p.name = "five_card_trick_peek";
  validate_structure(p.body);
  return p;
}

// --- doubly symmetric functions: 2n cards ------------------------------------

inline Protocol doubly_symmetric(int n, const std::vector<long>& g) {
  using namespace builddetail;
  if (n < 2) throw std::domain_error("doubly symmetric protocol needs n >= 2");
  if (static_cast<int>(g.size()) != n + 1)
    throw std::domain_error("g-table must have n+1 entries");
  FunctionSpec spec = FunctionSpec::from_g_table(g);
  if (!spec.is_doubly_symmetric())
    throw std::domain_error("function is not doubly symmetric: g(a) != g(n-a)");

  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * n), false), {}};
  build_first_protocol_body(c, n, [n, g, spec](BuildCtx& sub, int len) {
    // one partial random cut per output class with more than one preimage
    for (const auto& [b, preimage] : spec.preimages(n - 1)) {
      (void)b;
      if (preimage.size() < 2) continue;
      std::vector<int> positions;
      for (int a : preimage) positions.push_back(a + 1);
      emit_shuffle(sub, partial_random_cut(2 * n, positions));
    }
    reveal_sum_row(sub, len, [g](int t) { return g[static_cast<std::size_t>(t)]; });
  });
  std::vector<std::pair<std::string, long>> params{{"n", n}};
  return finish("doubly_symmetric", params,
                InputDomain{std::vector<int>(static_cast<std::size_t>(n), 2)},
                commitments_layout(n), std::move(body));
}

// --- symmetric functions with two extra cards: 2n+2 cards --------------------

inline Protocol symmetric_plus_two(int n, const std::vector<long>& g) {
  using namespace builddetail;
  if (n < 2) throw std::domain_error("symmetric protocol needs n >= 2");
  if (static_cast<int>(g.size()) != n + 1)
    throw std::domain_error("g-table must have n+1 entries");
  FunctionSpec spec = FunctionSpec::from_g_table(g);

  auto layout = [n](const std::vector<long>& in) {
    std::string suits;
    for (int i = 0; i < n; ++i) suits += commitment_suits(in[static_cast<std::size_t>(i)]);
    return CardSequence::face_down(suits + "CH");
  };
  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * n + 2), false), {}};
  std::vector<PairIdx> pairs;
  for (int i = 1; i <= n; ++i) pairs.push_back({c.track(2 * i - 1), c.track(2 * i)});
  int club = c.track(2 * n + 1);
  int heart = c.track(2 * n + 2);
  emit_sum(c, pairs, club, heart, [n, g, spec](BuildCtx& sub, int len) {
    for (const auto& [b, preimage] : spec.preimages(n)) {
      (void)b;
      if (preimage.size() < 2) continue;
      std::vector<int> positions;
      for (int a : preimage) positions.push_back(a + 1);
      emit_shuffle(sub, partial_random_cut(2 * n + 2, positions));
    }
    reveal_sum_row(sub, len, [g](int t) { return g[static_cast<std::size_t>(t)]; });
  });
  return finish("symmetric", {{"n", n}},
                InputDomain{std::vector<int>(static_cast<std::size_t>(n), 2)}, layout,
                std::move(body));
}

// --- second equality protocol: committed format, 2n cards --------------------

namespace builddetail {

// XOR-randomize the n commitments at (1,2)..(2n-1,2n), reveal the last one,
// complement on 0, then AND-fold the other n-1 bits. Calls done with the
// output commitment and the positions of the last revealed pair.
inline void build_second_protocol_block(
    BuildCtx& c, int n,
    const std::function<void(BuildCtx&, PairIdx, int club_pos, int heart_pos)>& done) {
  emit_xorall(c, n);
  emit_reveal(c, {2 * n - 1, 2 * n});
  auto arm = [&, n](BuildCtx& sub, bool negate, int club_pos, int heart_pos) {
    std::vector<PairIdx> queue;
    for (int i = 1; i <= n - 1; ++i) {
      int a = sub.track(2 * i - 1);
      int b = sub.track(2 * i);
      queue.push_back(negate ? PairIdx{b, a} : PairIdx{a, b});
    }
    PairIdx acc = queue.front();
    queue.erase(queue.begin());
    int club = sub.track(club_pos);
    int heart = sub.track(heart_pos);
    emit_and_fold(sub, acc, queue, club, heart,
                  [&](BuildCtx& s2, PairIdx out, int club_ti, int heart_ti) {
                    done(s2, out, s2.pos(club_ti), s2.pos(heart_ti));
                  });
  };
  // revealed bit 0: all-equal means every bit is 0, so AND the complements
  emit_branch(c, {{"CH", [&](BuildCtx& sub) { arm(sub, true, 2 * n - 1, 2 * n); }},
                  {"HC", [&](BuildCtx& sub) { arm(sub, false, 2 * n, 2 * n - 1); }}});
}

}  // namespace builddetail

inline Protocol equality_second(int n) {
  using namespace builddetail;
  if (n < 2) throw std::domain_error("equality needs n >= 2");
  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * n), false), {}};
  build_second_protocol_block(c, n, [](BuildCtx& sub, PairIdx out, int, int) {
    output_committed(sub, sub.pos(out.a), sub.pos(out.b));
  });
  return finish("equality_second", {{"n", n}},
                InputDomain{std::vector<int>(static_cast<std::size_t>(n), 2)},
                commitments_layout(n), std::move(body));
}

// --- k-candidate equality: 2*ceil(lg k)*n cards, committed format ------------

inline Protocol k_candidate_equality(int n, int k) {
  using namespace builddetail;
  if (n < 2) throw std::domain_error("equality needs n >= 2");
  if (k < 2) throw std::domain_error("k-candidate equality needs k >= 2");
  int bits = ceil_lg(k);

  auto layout = [n, k, bits](const std::vector<long>& in) {
    std::string suits;
    for (int i = 0; i < n; ++i) {
      long v = in[static_cast<std::size_t>(i)];
      if (v < 0 || v >= k) throw std::domain_error("input outside Z/kZ");
      for (int j = 0; j < bits; ++j) suits += commitment_suits((v >> j) & 1);
    }
    return CardSequence::face_down(suits);
  };

  Program body;
  BuildCtx c{&body, std::vector<bool>(static_cast<std::size_t>(2 * bits * n), false), {}};

  // plane_pairs[j][i] = commitment of bit j of input i+1
  std::vector<std::vector<PairIdx>> plane_pairs(static_cast<std::size_t>(bits));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < bits; ++j) {
      int base = 2 * (bits * i + j);
      plane_pairs[static_cast<std::size_t>(j)].push_back({c.track(base + 1), c.track(base + 2)});
    }

  std::function<void(BuildCtx&, int, std::vector<PairIdx>)> plane =
      [&](BuildCtx& cc, int j, std::vector<PairIdx> outs) {
        // bring this bit plane to the front and run the second protocol on it
        std::vector<int> front;
        for (const PairIdx& p : plane_pairs[static_cast<std::size_t>(j)]) {
          front.push_back(cc.pos(p.a));
          front.push_back(cc.pos(p.b));
        }
        emit_front(cc, front);
        build_second_protocol_block(
            cc, n, [&, j, outs](BuildCtx& sub, PairIdx out, int club_pos, int heart_pos) {
              std::vector<PairIdx> outs2 = outs;
              outs2.push_back(out);
              if (j + 1 < bits) {
                plane(sub, j + 1, outs2);
                return;
              }
              // AND the per-plane equality bits together
              PairIdx acc = outs2.front();
              std::vector<PairIdx> queue(outs2.begin() + 1, outs2.end());
              int club = sub.track(club_pos);
              int heart = sub.track(heart_pos);
              emit_and_fold(sub, acc, queue, club, heart,
                            [](BuildCtx& s2, PairIdx fin, int, int) {
                              output_committed(s2, s2.pos(fin.a), s2.pos(fin.b));
                            });
            });
      };
  plane(c, 0, {});

  return finish("kcand_equality", {{"n", n}, {"k", k}},
                InputDomain{std::vector<int>(static_cast<std::size_t>(n), k)}, layout,
                std::move(body));
}

}  // namespace cardproto
