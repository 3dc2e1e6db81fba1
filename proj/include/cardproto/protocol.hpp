#pragma once

// Protocol descriptions: a decision tree of deterministic actions, ideal
// shuffles, reveals, and branches keyed on revealed suit patterns, ending in
// an output. Protocols are immutable values; executing them is the engine's
// job.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cardproto/cards.hpp"
#include "cardproto/encoding.hpp"
#include "cardproto/permutation.hpp"
#include "cardproto/shuffle.hpp"

namespace cardproto {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

struct PermStmt {
  Permutation perm;
};

struct ShuffleStmt {
  ShuffleAction action;
};

struct RevealStmt {
  std::vector<int> positions;  // must be face-down
};

struct HideStmt {
  std::vector<int> positions;  // must be face-up
};

struct OutputStmt {
  enum class Kind : std::uint8_t { public_value, committed_bit, committed_row };
  Kind kind = Kind::public_value;
  long value = 0;                  // public_value
  int first = 0, second = 0;       // committed_bit: the two commitment positions
  int row_first = 0, row_last = 0; // committed_row
  Scheme row_scheme = Scheme::heart;
};

struct Statement;
using Program = std::vector<Statement>;

struct BranchArm {
  std::string pattern;  // suits of the preceding reveal, e.g. "CH"
  Program body;
};

// Splits on the observation of the immediately preceding reveal. Arms carry
// the rest of the protocol; nothing may follow a branch group.
struct BranchStmt {
  std::vector<BranchArm> arms;
};

struct Statement {
  std::variant<PermStmt, ShuffleStmt, RevealStmt, HideStmt, BranchStmt, OutputStmt> node;
  SourceLoc loc{};
};

struct InputDomain {
  std::vector<int> moduli;  // per-input modulus; bits are modulus 2

  int arity() const { return static_cast<int>(moduli.size()); }

  long input_count() const {
    long n = 1;
    for (int m : moduli) n *= m;
    return n;
  }

  bool contains(std::span<const long> input) const {
    if (static_cast<int>(input.size()) != arity()) return false;
    for (std::size_t i = 0; i < input.size(); ++i)
      if (input[i] < 0 || input[i] >= moduli[i]) return false;
    return true;
  }

  // Lexicographically ordered list of all assignments.
  std::vector<std::vector<long>> all_inputs() const {
    std::vector<std::vector<long>> out;
    std::vector<long> cur(moduli.size(), 0);
    while (true) {
      out.push_back(cur);
      int i = arity() - 1;
      while (i >= 0 && ++cur[static_cast<std::size_t>(i)] == moduli[static_cast<std::size_t>(i)]) {
        cur[static_cast<std::size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
    }
    return out;
  }
};

inline std::string render_input(std::span<const long> input) {
  std::string out;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(input[i]);
  }
  return out;
}

struct Protocol {
  std::string name;
  std::vector<std::pair<std::string, long>> params;  // ordered, for reports
  InputDomain domain;
  int cards = 0;
  int clubs = 0, hearts = 0;  // declared suit split, input-independent
  std::function<CardSequence(const std::vector<long>&)> layout;
  Program body;
};

// The target function a protocol is verified against. Symmetric functions
// carry their reduction g with f(a) = g(sum a_i).
struct FunctionSpec {
  std::string name;
  InputDomain domain;
  std::function<long(const std::vector<long>&)> eval;
  std::optional<std::vector<long>> g;  // size n+1 when present (bit inputs only)

  static FunctionSpec equality(int n) {
    FunctionSpec spec;
    spec.name = "equality";
    spec.domain.moduli.assign(static_cast<std::size_t>(n), 2);
    spec.eval = [](const std::vector<long>& a) {
      for (long v : a)
        if (v != a.front()) return 0L;
      return 1L;
    };
    return spec;
  }

  static FunctionSpec equality_mod(int n, int k) {
    FunctionSpec spec = equality(n);
    spec.domain.moduli.assign(static_cast<std::size_t>(n), k);
    return spec;
  }

  static FunctionSpec logical_and(int n) {
    FunctionSpec spec;
    spec.name = "and";
    spec.domain.moduli.assign(static_cast<std::size_t>(n), 2);
    spec.eval = [](const std::vector<long>& a) {
      for (long v : a)
        if (v == 0) return 0L;
      return 1L;
    };
    return spec;
  }

  static FunctionSpec add_mod(int k) {
    FunctionSpec spec;
    spec.name = "add";
    spec.domain.moduli = {k, k};
    spec.eval = [k](const std::vector<long>& a) { return (a[0] + a[1]) % k; };
    return spec;
  }

  // Symmetric function from its reduction table g(0..n).
  static FunctionSpec from_g_table(std::vector<long> table) {
    if (table.size() < 2) throw std::domain_error("g-table needs at least two entries");
    FunctionSpec spec;
    spec.name = "g-table";
    int n = static_cast<int>(table.size()) - 1;
    spec.domain.moduli.assign(static_cast<std::size_t>(n), 2);
    spec.g = table;
    spec.eval = [table](const std::vector<long>& a) {
      long sum = 0;
      for (long v : a) sum += v;
      return table[static_cast<std::size_t>(sum)];
    };
    return spec;
  }

  bool is_symmetric() const {
    if (g) return true;
    // exhaustive check, intended for small arities
    auto inputs = domain.all_inputs();
    for (auto input : inputs) {
      std::vector<long> sorted = input;
      std::sort(sorted.begin(), sorted.end());
      if (eval(input) != eval(sorted)) return false;
    }
    return true;
  }

  bool is_doubly_symmetric() const {
    if (!g) return false;
    int n = static_cast<int>(g->size()) - 1;
    for (int a = 0; a <= n; ++a)
      if ((*g)[static_cast<std::size_t>(a)] != (*g)[static_cast<std::size_t>(n - a)]) return false;
    return true;
  }

  // Preimage sets P_b = {a in [0, domain_max] : g(a) = b}, keyed by b.
  std::map<long, std::vector<int>> preimages(int domain_max) const {
    if (!g) throw std::domain_error("preimages need a symmetric reduction table");
    std::map<long, std::vector<int>> out;
    for (int a = 0; a <= domain_max; ++a) out[(*g)[static_cast<std::size_t>(a)]].push_back(a);
    return out;
  }
};

}  // namespace cardproto
