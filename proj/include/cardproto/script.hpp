#pragma once

// The .cardp protocol description format: a line-oriented surface syntax for
// custom protocols. Parsing yields either a document or positioned
// diagnostics, never both; elaboration lowers a document onto the engine IR
// and verifies it by an exhaustive sweep over the declared input domain.

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cardproto/builtins.hpp"
#include "cardproto/engine.hpp"
#include "cardproto/protocol.hpp"

namespace cardproto::script {

enum class DiagCode : std::uint8_t {
  missing_header,
  duplicate_header,
  unknown_statement,
  bad_argument,
  malformed_cycles,
  out_of_range,
  bad_pattern,
  overlapping_patterns,
  unbalanced_brace,
  branch_without_reveal,
  trailing_statements,
  header_after_body,
  budget_violation,
  size_mismatch,
  reveal_face_up,
  hide_face_down,
  nonexhaustive_branch,
  missing_output,
  bad_output,
  node_budget_exceeded,
};

inline const char* diag_code_name(DiagCode code) {
  switch (code) {
    case DiagCode::missing_header: return "missing-header";
    case DiagCode::duplicate_header: return "duplicate-header";
    case DiagCode::unknown_statement: return "unknown-statement";
    case DiagCode::bad_argument: return "bad-argument";
    case DiagCode::malformed_cycles: return "malformed-cycles";
    case DiagCode::out_of_range: return "out-of-range";
    case DiagCode::bad_pattern: return "bad-pattern";
    case DiagCode::overlapping_patterns: return "overlapping-patterns";
    case DiagCode::unbalanced_brace: return "unbalanced-brace";
    case DiagCode::branch_without_reveal: return "branch-without-reveal";
    case DiagCode::trailing_statements: return "trailing-statements";
    case DiagCode::header_after_body: return "header-after-body";
    case DiagCode::budget_violation: return "budget-violation";
    case DiagCode::size_mismatch: return "size-mismatch";
    case DiagCode::reveal_face_up: return "reveal-face-up";
    case DiagCode::hide_face_down: return "hide-face-down";
    case DiagCode::nonexhaustive_branch: return "nonexhaustive-branch";
    case DiagCode::missing_output: return "missing-output";
    case DiagCode::bad_output: return "bad-output";
    case DiagCode::node_budget_exceeded: return "node-budget-exceeded";
  }
  return "?";
}

struct Diagnostic {
  int line = 0;
  int col = 0;
  DiagCode code = DiagCode::bad_argument;
  std::string message;
};

inline std::string render_diagnostic(const Diagnostic& d) {
  return std::to_string(d.line) + ":" + std::to_string(d.col) + ": " + d.message + " [" +
         diag_code_name(d.code) + "]";
}

struct LayoutItem {
  enum class Kind : std::uint8_t { commit, card, enc, bit };
  Kind kind = Kind::commit;
  SourceLoc loc{};
  int input = 0;                  // 1-based input index
  Suit suit = Suit::club;         // card
  int modulus = 0;                // enc
  Scheme scheme = Scheme::heart;  // enc
  int bit = 0;                    // bit index

  int width() const {
    switch (kind) {
      case Kind::commit: return 2;
      case Kind::card: return 1;
      case Kind::enc: return modulus;
      case Kind::bit: return 2;
    }
    return 0;
  }

  bool operator==(const LayoutItem& other) const {
    return kind == other.kind && input == other.input && suit == other.suit &&
           modulus == other.modulus && scheme == other.scheme && bit == other.bit;
  }
};

struct ScriptStmt {
  enum class Kind : std::uint8_t {
    perm,
    shuffle,
    lshift,
    rshift,
    rcut,
    ksec,
    xorall,
    pcut,
    reveal,
    hide,
    branch,
    output_public,
    output_committed,
    output_row,
  };
  Kind kind = Kind::perm;
  SourceLoc loc{};
  std::optional<Permutation> perm;     // perm
  std::vector<Permutation> shuffle_set;  // shuffle
  long amount = 0;                     // lshift/rshift/ksec/output_public
  int first = 0, last = 0;             // rcut, output_row, output_committed
  std::vector<int> positions;          // pcut/reveal/hide
  std::string pattern;                 // branch
  std::vector<ScriptStmt> body;        // branch
  Scheme scheme = Scheme::heart;       // output_row

  bool operator==(const ScriptStmt& other) const {
    return kind == other.kind && perm == other.perm && shuffle_set == other.shuffle_set &&
           amount == other.amount && first == other.first && last == other.last &&
           positions == other.positions && pattern == other.pattern && body == other.body &&
           scheme == other.scheme;
  }
};

struct ScriptDocument {
  std::string name;
  std::vector<std::pair<std::string, long>> params;
  int arity = 0;
  int modulus = 2;
  int cards = 0;
  std::vector<LayoutItem> layout;
  std::vector<ScriptStmt> body;

  bool operator==(const ScriptDocument& other) const {
    return name == other.name && params == other.params && arity == other.arity &&
           modulus == other.modulus && cards == other.cards && layout == other.layout &&
           body == other.body;
  }
};

struct ParseResult {
  std::optional<ScriptDocument> doc;
  std::vector<Diagnostic> diagnostics;
};

namespace scriptdetail {

struct Line {
  int number = 0;
  int indent_col = 1;  // column of the first non-space character
  std::vector<std::string> words;
  std::string rest;  // text after the keyword, comment stripped
};

inline std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                          : eol - pos);
    ++number;
    std::string_view meaning = raw.substr(0, raw.find('#'));
    Line line;
    line.number = number;
    std::size_t i = 0;
    while (i < meaning.size() && std::isspace(static_cast<unsigned char>(meaning[i]))) ++i;
    line.indent_col = static_cast<int>(i) + 1;
    bool first = true;
    while (i < meaning.size()) {
      while (i < meaning.size() && std::isspace(static_cast<unsigned char>(meaning[i]))) ++i;
      if (i >= meaning.size()) break;
      std::size_t start = i;
      while (i < meaning.size() && !std::isspace(static_cast<unsigned char>(meaning[i]))) ++i;
      line.words.emplace_back(meaning.substr(start, i - start));
      if (first) {
        std::size_t rest_start = i;
        while (rest_start < meaning.size() &&
               std::isspace(static_cast<unsigned char>(meaning[rest_start])))
          ++rest_start;
        std::string rest(meaning.substr(rest_start));
        while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back())))
          rest.pop_back();
        line.rest = rest;
        first = false;
      }
    }
    if (!line.words.empty()) lines.push_back(std::move(line));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return lines;
}

inline bool parse_long(const std::string& word, long& out) {
  const char* begin = word.data();
  const char* end = begin + word.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

inline bool parse_positions(const std::string& word, std::vector<int>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < word.size()) {
    std::size_t comma = word.find(',', i);
    std::string part = word.substr(i, comma == std::string::npos ? std::string::npos : comma - i);
    long v = 0;
    if (!parse_long(part, v) || v < 1) return false;
    out.push_back(static_cast<int>(v));
    if (comma == std::string::npos) break;
    i = comma + 1;
  }
  return !out.empty();
}

inline bool parse_range(const std::string& word, int& first, int& last) {
  auto dots = word.find("..");
  if (dots == std::string::npos) return false;
  long a = 0, b = 0;
  if (!parse_long(word.substr(0, dots), a) || !parse_long(word.substr(dots + 2), b)) return false;
  if (a < 1 || b < a) return false;
  first = static_cast<int>(a);
  last = static_cast<int>(b);
  return true;
}

}  // namespace scriptdetail

inline ParseResult parse(std::string_view text) {
  using namespace scriptdetail;
  ParseResult result;
  auto& diags = result.diagnostics;
  auto fail = [&](const Line& line, DiagCode code, const std::string& message, int col = 0) {
    diags.push_back({line.number, col ? col : line.indent_col, code, message});
  };

  std::vector<Line> lines = split_lines(text);
  if (lines.empty()) {
    diags.push_back({1, 1, DiagCode::missing_header, "missing header: expected 'protocol <name>'"});
    return result;
  }

  ScriptDocument doc;
  bool saw_protocol = false, saw_inputs = false, saw_cards = false, body_started = false;

  // stack of open statement lists; back() is the current block
  std::vector<std::vector<ScriptStmt>*> blocks{&doc.body};
  // whether the current group position allows a branch (reveal or branch just before)
  std::vector<bool> last_was_reveal_or_branch{false};

  auto header_ok = [&](const Line& line) {
    if (body_started) {
      fail(line, DiagCode::header_after_body, "header lines must precede the body");
      return false;
    }
    return true;
  };

  for (const Line& line : lines) {
    const std::string& kw = line.words.front();
    const auto argc = line.words.size() - 1;
    auto arg = [&](std::size_t i) -> const std::string& { return line.words[i + 1]; };

    if (kw == "protocol") {
      if (!header_ok(line)) continue;
      if (saw_protocol) {
        fail(line, DiagCode::duplicate_header, "duplicate 'protocol' line");
        continue;
      }
      if (argc != 1) {
        fail(line, DiagCode::bad_argument, "expected 'protocol <name>'");
        continue;
      }
      doc.name = arg(0);
      saw_protocol = true;
    } else if (kw == "param") {
      if (!header_ok(line)) continue;
      long v = 0;
      if (argc != 2 || !parse_long(arg(1), v)) {
        fail(line, DiagCode::bad_argument, "expected 'param <name> <integer>'");
        continue;
      }
      doc.params.emplace_back(arg(0), v);
    } else if (kw == "inputs") {
      if (!header_ok(line)) continue;
      if (saw_inputs) {
        fail(line, DiagCode::duplicate_header, "duplicate 'inputs' line");
        continue;
      }
      long arity = 0, modulus = 2;
      bool ok = (argc == 1 || argc == 3) && parse_long(arg(0), arity) && arity >= 1;
      if (ok && argc == 3) ok = arg(1) == "mod" && parse_long(arg(2), modulus) && modulus >= 2;
      if (!ok) {
        fail(line, DiagCode::bad_argument, "expected 'inputs <arity> [mod <k>]'");
        continue;
      }
      doc.arity = static_cast<int>(arity);
      doc.modulus = static_cast<int>(modulus);
      saw_inputs = true;
    } else if (kw == "cards") {
      if (!header_ok(line)) continue;
      if (saw_cards) {
        fail(line, DiagCode::duplicate_header, "duplicate 'cards' line");
        continue;
      }
      long cards = 0;
      if (argc != 1 || !parse_long(arg(0), cards) || cards < 1) {
        fail(line, DiagCode::bad_argument, "expected 'cards <count>'");
        continue;
      }
      doc.cards = static_cast<int>(cards);
      saw_cards = true;
    } else if (kw == "layout") {
      if (!header_ok(line)) continue;
      LayoutItem item;
      item.loc = {line.number, line.indent_col};
      bool ok = argc >= 1;
      if (ok && arg(0) == "commit") {
        long input = 0;
        ok = argc == 2 && parse_long(arg(1), input) && input >= 1;
        item.kind = LayoutItem::Kind::commit;
        item.input = static_cast<int>(input);
      } else if (ok && arg(0) == "card") {
        ok = argc == 2 && (arg(1) == "C" || arg(1) == "H");
        item.kind = LayoutItem::Kind::card;
        if (ok) item.suit = arg(1) == "C" ? Suit::club : Suit::heart;
      } else if (ok && arg(0) == "enc") {
        long input = 0, modulus = 0;
        ok = argc == 4 && parse_long(arg(1), input) && input >= 1 &&
             parse_long(arg(2), modulus) && modulus >= 2 &&
             (arg(3) == "club" || arg(3) == "heart");
        item.kind = LayoutItem::Kind::enc;
        item.input = static_cast<int>(input);
        item.modulus = static_cast<int>(modulus);
        if (ok) item.scheme = arg(3) == "club" ? Scheme::club : Scheme::heart;
      } else if (ok && arg(0) == "bit") {
        long input = 0, bit = 0;
        ok = argc == 3 && parse_long(arg(1), input) && input >= 1 && parse_long(arg(2), bit) &&
             bit >= 0 && bit < 31;
        item.kind = LayoutItem::Kind::bit;
        item.input = static_cast<int>(input);
        item.bit = static_cast<int>(bit);
      } else {
        ok = false;
      }
      if (!ok) {
        fail(line, DiagCode::bad_argument,
             "expected 'layout commit <i>', 'layout card <C|H>', 'layout enc <i> <k> "
             "<club|heart>' or 'layout bit <i> <j>'");
        continue;
      }
      doc.layout.push_back(item);
    } else if (kw == "}") {
      if (argc != 0) {
        fail(line, DiagCode::bad_argument, "'}' must stand alone");
        continue;
      }
      if (blocks.size() == 1) {
        fail(line, DiagCode::unbalanced_brace, "'}' without an open branch block");
        continue;
      }
      blocks.pop_back();
      last_was_reveal_or_branch.pop_back();
      // after closing an arm, further branch arms may follow in the parent
    } else {
      // body statement
      if (!body_started) {
        if (!saw_protocol) {
          fail(line, DiagCode::missing_header, "missing header: expected 'protocol <name>'");
          return result;
        }
        if (!saw_inputs)
          diags.push_back({line.number, line.indent_col, DiagCode::missing_header,
                           "missing 'inputs' line before the body"});
        if (!saw_cards)
          diags.push_back({line.number, line.indent_col, DiagCode::missing_header,
                           "missing 'cards' line before the body"});
        if (!saw_inputs || !saw_cards) return result;
        body_started = true;
      }

      std::vector<ScriptStmt>& block = *blocks.back();
      if (!block.empty() && (block.back().kind == ScriptStmt::Kind::output_public ||
                             block.back().kind == ScriptStmt::Kind::output_committed ||
                             block.back().kind == ScriptStmt::Kind::output_row)) {
        fail(line, DiagCode::trailing_statements, "statement after an output");
        continue;
      }
      if (!block.empty() && block.back().kind == ScriptStmt::Kind::branch && kw != "branch") {
        fail(line, DiagCode::trailing_statements, "statement after a branch group");
        continue;
      }

      ScriptStmt stmt;
      stmt.loc = {line.number, line.indent_col};
      if (kw == "perm") {
        stmt.kind = ScriptStmt::Kind::perm;
        try {
          stmt.perm = Permutation::from_cycles(line.rest, doc.cards);
        } catch (const std::domain_error& e) {
          auto code = std::string(e.what()).find("out of range") != std::string::npos
                          ? DiagCode::out_of_range
                          : DiagCode::malformed_cycles;
          fail(line, code, std::string("perm: ") + e.what());
          continue;
        }
      } else if (kw == "shuffle") {
        stmt.kind = ScriptStmt::Kind::shuffle;
        std::string rest = line.rest;
        if (rest.size() < 2 || rest.front() != '{' || rest.back() != '}') {
          fail(line, DiagCode::bad_argument, "expected 'shuffle {id, (cycles), ...}'");
          continue;
        }
        std::string inner = rest.substr(1, rest.size() - 2);
        bool ok = true;
        std::size_t i = 0;
        while (i <= inner.size() && ok) {
          // split on commas that are outside parentheses
          int depth = 0;
          std::size_t start = i;
          while (i < inner.size() && (depth > 0 || inner[i] != ',')) {
            if (inner[i] == '(') ++depth;
            if (inner[i] == ')') --depth;
            ++i;
          }
          std::string part = inner.substr(start, i - start);
          std::size_t a = part.find_first_not_of(" \t");
          std::size_t b = part.find_last_not_of(" \t");
          if (a == std::string::npos) {
            ok = false;
            break;
          }
          part = part.substr(a, b - a + 1);
          try {
            stmt.shuffle_set.push_back(Permutation::from_cycles(part, doc.cards));
          } catch (const std::domain_error& e) {
            fail(line, DiagCode::malformed_cycles, std::string("shuffle: ") + e.what());
            ok = false;
          }
          if (i >= inner.size()) break;
          ++i;
        }
        if (!ok) continue;
        if (stmt.shuffle_set.empty()) {
          fail(line, DiagCode::bad_argument, "shuffle set is empty");
          continue;
        }
      } else if (kw == "lshift" || kw == "rshift") {
        stmt.kind = kw == "lshift" ? ScriptStmt::Kind::lshift : ScriptStmt::Kind::rshift;
        long r = 0;
        if (argc != 1 || !parse_long(arg(0), r) || r < 0) {
          fail(line, DiagCode::bad_argument, "expected '" + kw + " <r>'");
          continue;
        }
        stmt.amount = r;
      } else if (kw == "rcut") {
        stmt.kind = ScriptStmt::Kind::rcut;
        if (argc != 1 || !parse_range(arg(0), stmt.first, stmt.last)) {
          fail(line, DiagCode::bad_argument, "expected 'rcut <a>..<b>'");
          continue;
        }
        if (stmt.last > doc.cards) {
          fail(line, DiagCode::out_of_range, "rcut range exceeds the card count");
          continue;
        }
      } else if (kw == "ksec") {
        stmt.kind = ScriptStmt::Kind::ksec;
        long k = 0;
        if (argc != 1 || !parse_long(arg(0), k) || k < 1) {
          fail(line, DiagCode::bad_argument, "expected 'ksec <sections>'");
          continue;
        }
        stmt.amount = k;
      } else if (kw == "xorall") {
        stmt.kind = ScriptStmt::Kind::xorall;
        if (argc != 0) {
          fail(line, DiagCode::bad_argument, "'xorall' takes no arguments");
          continue;
        }
      } else if (kw == "pcut" || kw == "reveal" || kw == "hide") {
        stmt.kind = kw == "pcut" ? ScriptStmt::Kind::pcut
                                 : (kw == "reveal" ? ScriptStmt::Kind::reveal
                                                   : ScriptStmt::Kind::hide);
        if (argc != 1 || !parse_positions(arg(0), stmt.positions)) {
          fail(line, DiagCode::bad_argument, "expected '" + kw + " p1,p2,...'");
          continue;
        }
        bool in_range = true;
        for (int p : stmt.positions)
          if (p > doc.cards) in_range = false;
        if (!in_range) {
          fail(line, DiagCode::out_of_range, kw + " position exceeds the card count");
          continue;
        }
        auto sorted = stmt.positions;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
          fail(line, DiagCode::bad_argument, kw + " positions must be distinct");
          continue;
        }
        if (kw == "pcut" && stmt.positions.size() < 2) {
          fail(line, DiagCode::bad_argument, "pcut needs at least two positions");
          continue;
        }
      } else if (kw == "branch") {
        stmt.kind = ScriptStmt::Kind::branch;
        if (argc != 2 || arg(1) != "{") {
          fail(line, DiagCode::unbalanced_brace, "expected 'branch <pattern> {'");
          continue;
        }
        stmt.pattern = arg(0);
        bool pattern_ok = !stmt.pattern.empty();
        for (char ch : stmt.pattern)
          if (ch != 'C' && ch != 'H') pattern_ok = false;
        if (!pattern_ok) {
          fail(line, DiagCode::bad_pattern, "branch pattern must be a string of C and H");
          continue;
        }
        if (!last_was_reveal_or_branch.back()) {
          fail(line, DiagCode::branch_without_reveal,
               "branch must immediately follow a reveal");
          continue;
        }
        bool overlap = false;
        for (auto it = block.rbegin(); it != block.rend(); ++it) {
          if (it->kind != ScriptStmt::Kind::branch) break;
          if (it->pattern == stmt.pattern) overlap = true;
        }
        if (overlap) {
          fail(line, DiagCode::overlapping_patterns,
               "branch pattern '" + stmt.pattern + "' repeats in this group");
          continue;
        }
        block.push_back(std::move(stmt));
        blocks.push_back(&block.back().body);
        last_was_reveal_or_branch.push_back(false);
        continue;
      } else if (kw == "output") {
        if (argc >= 1 && arg(0) == "public") {
          stmt.kind = ScriptStmt::Kind::output_public;
          long v = 0;
          if (argc != 2 || !parse_long(arg(1), v)) {
            fail(line, DiagCode::bad_argument, "expected 'output public <integer>'");
            continue;
          }
          stmt.amount = v;
        } else if (argc >= 1 && arg(0) == "committed") {
          stmt.kind = ScriptStmt::Kind::output_committed;
          long p1 = 0, p2 = 0;
          if (argc != 3 || !parse_long(arg(1), p1) || !parse_long(arg(2), p2) || p1 < 1 ||
              p2 < 1) {
            fail(line, DiagCode::bad_argument, "expected 'output committed <p1> <p2>'");
            continue;
          }
          if (p1 > doc.cards || p2 > doc.cards) {
            fail(line, DiagCode::out_of_range, "output position exceeds the card count");
            continue;
          }
          stmt.first = static_cast<int>(p1);
          stmt.last = static_cast<int>(p2);
        } else if (argc >= 1 && arg(0) == "row") {
          stmt.kind = ScriptStmt::Kind::output_row;
          if (argc != 3 || !parse_range(arg(1), stmt.first, stmt.last) ||
              (arg(2) != "club" && arg(2) != "heart")) {
            fail(line, DiagCode::bad_argument, "expected 'output row <a>..<b> <club|heart>'");
            continue;
          }
          if (stmt.last > doc.cards) {
            fail(line, DiagCode::out_of_range, "output row exceeds the card count");
            continue;
          }
          stmt.scheme = arg(2) == "club" ? Scheme::club : Scheme::heart;
        } else {
          fail(line, DiagCode::bad_argument,
               "expected 'output public|committed|row ...'");
          continue;
        }
      } else {
        fail(line, DiagCode::unknown_statement, "unknown statement '" + kw + "'");
        continue;
      }
      last_was_reveal_or_branch.back() = stmt.kind == ScriptStmt::Kind::reveal;
      block.push_back(std::move(stmt));
    }
  }

  if (!saw_protocol) {
    diags.push_back({lines.back().number, 1, DiagCode::missing_header,
                     "missing header: expected 'protocol <name>'"});
    return result;
  }
  if (blocks.size() != 1)
    diags.push_back({lines.back().number, 1, DiagCode::unbalanced_brace,
                     "unclosed branch block at end of input"});
  if (!saw_inputs || !saw_cards)
    diags.push_back({lines.back().number, 1, DiagCode::missing_header,
                     "missing 'inputs' or 'cards' line"});

  if (diags.empty()) result.doc = std::move(doc);
  return result;
}

// --- serialization -------------------------------------------------------------

namespace scriptdetail {

inline void serialize_stmt(std::ostringstream& out, const ScriptStmt& stmt, int depth) {
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out << indent;
  switch (stmt.kind) {
    case ScriptStmt::Kind::perm:
      out << "perm " << stmt.perm->to_cycles();
      break;
    case ScriptStmt::Kind::shuffle: {
      out << "shuffle {";
      for (std::size_t i = 0; i < stmt.shuffle_set.size(); ++i) {
        if (i) out << ", ";
        out << stmt.shuffle_set[i].to_cycles();
      }
      out << "}";
      break;
    }
    case ScriptStmt::Kind::lshift:
      out << "lshift " << stmt.amount;
      break;
    case ScriptStmt::Kind::rshift:
      out << "rshift " << stmt.amount;
      break;
    case ScriptStmt::Kind::rcut:
      out << "rcut " << stmt.first << ".." << stmt.last;
      break;
    case ScriptStmt::Kind::ksec:
      out << "ksec " << stmt.amount;
      break;
    case ScriptStmt::Kind::xorall:
      out << "xorall";
      break;
    case ScriptStmt::Kind::pcut:
    case ScriptStmt::Kind::reveal:
    case ScriptStmt::Kind::hide: {
      out << (stmt.kind == ScriptStmt::Kind::pcut
                  ? "pcut "
                  : (stmt.kind == ScriptStmt::Kind::reveal ? "reveal " : "hide "));
      for (std::size_t i = 0; i < stmt.positions.size(); ++i) {
        if (i) out << ",";
        out << stmt.positions[i];
      }
      break;
    }
    case ScriptStmt::Kind::branch:
      out << "branch " << stmt.pattern << " {\n";
      for (const ScriptStmt& inner : stmt.body) serialize_stmt(out, inner, depth + 1);
      out << indent << "}";
      break;
    case ScriptStmt::Kind::output_public:
      out << "output public " << stmt.amount;
      break;
    case ScriptStmt::Kind::output_committed:
      out << "output committed " << stmt.first << " " << stmt.last;
      break;
    case ScriptStmt::Kind::output_row:
      out << "output row " << stmt.first << ".." << stmt.last << " " << scheme_name(stmt.scheme);
      break;
  }
  out << "\n";
}

}  // namespace scriptdetail

inline std::string serialize(const ScriptDocument& doc) {
  std::ostringstream out;
  out << "protocol " << doc.name << "\n";
  for (const auto& [key, value] : doc.params) out << "param " << key << " " << value << "\n";
  out << "inputs " << doc.arity;
  if (doc.modulus != 2) out << " mod " << doc.modulus;
  out << "\n";
  out << "cards " << doc.cards << "\n";
  for (const LayoutItem& item : doc.layout) {
    out << "layout ";
    switch (item.kind) {
      case LayoutItem::Kind::commit: out << "commit " << item.input; break;
      case LayoutItem::Kind::card: out << "card " << suit_char(item.suit); break;
      case LayoutItem::Kind::enc:
        out << "enc " << item.input << " " << item.modulus << " " << scheme_name(item.scheme);
        break;
      case LayoutItem::Kind::bit: out << "bit " << item.input << " " << item.bit; break;
    }
    out << "\n";
  }
  out << "\n";
  for (const ScriptStmt& stmt : doc.body) scriptdetail::serialize_stmt(out, stmt, 0);
  return out.str();
}

// --- elaboration ----------------------------------------------------------------

struct ElaborateResult {
  std::optional<Protocol> protocol;
  std::vector<Diagnostic> diagnostics;
};

namespace scriptdetail {

inline bool lower_block(const std::vector<ScriptStmt>& stmts, int cards, Program& out,
                        std::vector<Diagnostic>& diags) {
  int last_reveal_width = -1;
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const ScriptStmt& stmt = stmts[i];
    SourceLoc loc = stmt.loc;
    switch (stmt.kind) {
      case ScriptStmt::Kind::perm:
        out.push_back({PermStmt{*stmt.perm}, loc});
        break;
      case ScriptStmt::Kind::shuffle:
        out.push_back({ShuffleStmt{ShuffleAction::make(ShuffleKind::explicit_set,
                                                       stmt.shuffle_set)},
                       loc});
        break;
      case ScriptStmt::Kind::lshift:
        out.push_back({PermStmt{Permutation::left_shift_of(cards, stmt.amount)}, loc});
        break;
      case ScriptStmt::Kind::rshift:
        out.push_back({PermStmt{Permutation::right_shift_of(cards, stmt.amount)}, loc});
        break;
      case ScriptStmt::Kind::rcut:
        out.push_back({ShuffleStmt{random_cut_range(cards, stmt.first, stmt.last)}, loc});
        break;
      case ScriptStmt::Kind::ksec: {
        if (stmt.amount < 1 || cards % stmt.amount != 0) {
          diags.push_back({loc.line, loc.col, DiagCode::size_mismatch,
                           "ksec " + std::to_string(stmt.amount) + " does not divide " +
                               std::to_string(cards) + " cards"});
          return false;
        }
        out.push_back(
            {ShuffleStmt{k_section_cut_range(cards, 1, cards, static_cast<int>(stmt.amount))},
             loc});
        break;
      }
      case ScriptStmt::Kind::xorall: {
        if (cards % 2 != 0) {
          diags.push_back({loc.line, loc.col, DiagCode::size_mismatch,
                           "xorall needs an even number of cards"});
          return false;
        }
        int pairs = cards / 2;
        Program gadget;
        builddetail::BuildCtx ctx{&gadget, std::vector<bool>(static_cast<std::size_t>(cards), false), {}};
        builddetail::emit_xorall(ctx, pairs);
        for (Statement& s : gadget) out.push_back({std::move(s.node), loc});
        break;
      }
      case ScriptStmt::Kind::pcut:
        try {
          out.push_back({ShuffleStmt{partial_random_cut(cards, stmt.positions)}, loc});
        } catch (const std::domain_error& e) {
          diags.push_back({loc.line, loc.col, DiagCode::bad_argument,
                           std::string("pcut: ") + e.what()});
          return false;
        }
        break;
      case ScriptStmt::Kind::reveal:
        last_reveal_width = static_cast<int>(stmt.positions.size());
        out.push_back({RevealStmt{stmt.positions}, loc});
        break;
      case ScriptStmt::Kind::hide:
        out.push_back({HideStmt{stmt.positions}, loc});
        break;
      case ScriptStmt::Kind::branch: {
        // gather the whole consecutive group
        BranchStmt branch;
        std::size_t j = i;
        for (; j < stmts.size() && stmts[j].kind == ScriptStmt::Kind::branch; ++j) {
          const ScriptStmt& arm_stmt = stmts[j];
          if (last_reveal_width >= 0 &&
              static_cast<int>(arm_stmt.pattern.size()) != last_reveal_width) {
            diags.push_back({arm_stmt.loc.line, arm_stmt.loc.col, DiagCode::bad_pattern,
                             "pattern '" + arm_stmt.pattern + "' does not match the " +
                                 std::to_string(last_reveal_width) + " revealed cards"});
            return false;
          }
          BranchArm arm;
          arm.pattern = arm_stmt.pattern;
          if (!lower_block(arm_stmt.body, cards, arm.body, diags)) return false;
          branch.arms.push_back(std::move(arm));
        }
        out.push_back({std::move(branch), stmts[i].loc});
        i = j - 1;
        break;
      }
      case ScriptStmt::Kind::output_public: {
        OutputStmt o;
        o.kind = OutputStmt::Kind::public_value;
        o.value = stmt.amount;
        out.push_back({o, loc});
        break;
      }
      case ScriptStmt::Kind::output_committed: {
        OutputStmt o;
        o.kind = OutputStmt::Kind::committed_bit;
        o.first = stmt.first;
        o.second = stmt.last;
        out.push_back({o, loc});
        break;
      }
      case ScriptStmt::Kind::output_row: {
        OutputStmt o;
        o.kind = OutputStmt::Kind::committed_row;
        o.row_first = stmt.first;
        o.row_last = stmt.last;
        o.row_scheme = stmt.scheme;
        out.push_back({o, loc});
        break;
      }
    }
  }
  return true;
}

inline DiagCode diag_for_exec_error(ExecError code) {
  switch (code) {
    case ExecError::reveal_face_up: return DiagCode::reveal_face_up;
    case ExecError::hide_face_down: return DiagCode::hide_face_down;
    case ExecError::unmatched_observation: return DiagCode::nonexhaustive_branch;
    case ExecError::missing_output: return DiagCode::missing_output;
    case ExecError::bad_output_positions:
    case ExecError::output_face_up: return DiagCode::bad_output;
    case ExecError::branch_without_reveal: return DiagCode::branch_without_reveal;
    case ExecError::statement_after_branch:
    case ExecError::statement_after_output: return DiagCode::trailing_statements;
    default: return DiagCode::size_mismatch;
  }
}

}  // namespace scriptdetail

inline ElaborateResult elaborate(const ScriptDocument& doc, const EngineOptions& options = {}) {
  using namespace scriptdetail;
  ElaborateResult result;
  auto& diags = result.diagnostics;

  // layout width must meet the declared card budget exactly
  int width = 0;
  for (const LayoutItem& item : doc.layout) {
    width += item.width();
    if ((item.kind == LayoutItem::Kind::commit || item.kind == LayoutItem::Kind::enc ||
         item.kind == LayoutItem::Kind::bit) &&
        item.input > doc.arity)
      diags.push_back({item.loc.line, item.loc.col, DiagCode::out_of_range,
                       "layout references input " + std::to_string(item.input) + " of " +
                           std::to_string(doc.arity)});
    if (item.kind == LayoutItem::Kind::enc && item.modulus != doc.modulus)
      diags.push_back({item.loc.line, item.loc.col, DiagCode::bad_argument,
                       "enc modulus must match the input domain"});
  }
  if (width != doc.cards)
    diags.push_back({1, 1, DiagCode::budget_violation,
                     "layout places " + std::to_string(width) + " cards but the budget is " +
                         std::to_string(doc.cards)});
  if (!diags.empty()) return result;

  Protocol protocol;
  protocol.name = doc.name;
  protocol.params = doc.params;
  protocol.domain.moduli.assign(static_cast<std::size_t>(doc.arity), doc.modulus);
  std::vector<LayoutItem> layout = doc.layout;
  protocol.layout = [layout](const std::vector<long>& in) {
    std::string suits;
    for (const LayoutItem& item : layout) {
      switch (item.kind) {
        case LayoutItem::Kind::commit:
          suits += in[static_cast<std::size_t>(item.input - 1)] ? "HC" : "CH";
          break;
        case LayoutItem::Kind::card:
          suits += suit_char(item.suit);
          break;
        case LayoutItem::Kind::enc:
          suits += int_encoding_pattern(in[static_cast<std::size_t>(item.input - 1)],
                                        item.modulus, item.scheme);
          break;
        case LayoutItem::Kind::bit:
          suits += ((in[static_cast<std::size_t>(item.input - 1)] >> item.bit) & 1) ? "HC" : "CH";
          break;
      }
    }
    return suits.empty() ? CardSequence() : CardSequence::face_down(suits);
  };

  if (!lower_block(doc.body, doc.cards, protocol.body, diags)) return result;

  try {
    validate_structure(protocol.body);
  } catch (const protocol_error& e) {
    diags.push_back({e.loc().line, e.loc().col, diag_for_exec_error(e.code()), e.what()});
    return result;
  }

  CardSequence sample = protocol.layout(std::vector<long>(static_cast<std::size_t>(doc.arity), 0));
  protocol.cards = sample.size();
  auto counts = suit_counts(sample);
  protocol.clubs = counts[0];
  protocol.hearts = counts[1];

  // reachability sweep: every input, every shuffle choice
  for (const auto& input : protocol.domain.all_inputs()) {
    try {
      enumerate_paths(protocol, input, options, [](PathOutcome&&) {});
    } catch (const protocol_error& e) {
      diags.push_back({e.loc().line, e.loc().col, diag_for_exec_error(e.code()),
                       std::string(e.what()) + " (input " + render_input(input) + ")"});
      return result;
    } catch (const budget_error& e) {
      diags.push_back({1, 1, DiagCode::node_budget_exceeded, e.what()});
      return result;
    }
  }

  result.protocol = std::move(protocol);
  return result;
}

}  // namespace cardproto::script
