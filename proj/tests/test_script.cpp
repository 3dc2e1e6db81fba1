#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "cardproto/analyzer.hpp"
#include "cardproto/builtins.hpp"
#include "cardproto/script.hpp"

using namespace cardproto;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string scripts_dir() { return CARDPROTO_SCRIPTS_DIR; }

script::ScriptDocument parse_ok(const std::string& text) {
  auto result = script::parse(text);
  for (const auto& d : result.diagnostics) UNSCOPED_INFO(script::render_diagnostic(d));
  REQUIRE(result.diagnostics.empty());
  REQUIRE(result.doc.has_value());
  return *result.doc;
}

Protocol elaborate_ok(const script::ScriptDocument& doc) {
  auto result = script::elaborate(doc);
  for (const auto& d : result.diagnostics) UNSCOPED_INFO(script::render_diagnostic(d));
  REQUIRE(result.diagnostics.empty());
  REQUIRE(result.protocol.has_value());
  return *result.protocol;
}

const std::string kTinyHeader =
    "protocol tiny\n"
    "inputs 1\n"
    "cards 2\n"
    "layout commit 1\n";

// Exact per-input trace distributions of a protocol.
std::map<std::string, std::map<std::string, Rational>> trace_distributions(const Protocol& p) {
  std::map<std::string, std::map<std::string, Rational>> out;
  for (const auto& input : p.domain.all_inputs()) {
    auto& dist = out[render_input(input)];
    for (const auto& run : enumerate_runs(p, input)) dist[trace_key(run.trace)] += run.probability;
  }
  return out;
}

}  // namespace

TEST_CASE("parsing a perm statement reproduces the worked rearrangement") {
  auto doc = parse_ok(
      "protocol demo\n"
      "inputs 1\n"
      "cards 6\n"
      "layout commit 1\nlayout card C\nlayout card C\nlayout card H\nlayout card H\n"
      "\n"
      "perm (1 6 4)(2 5)\n"
      "output committed 1 2\n");
  REQUIRE(doc.body.size() == 2);
  const auto& perm = *doc.body.front().perm;
  auto seq = CardSequence::face_down("CHCHHC");
  CHECK(render_peek(apply_perm(seq, perm)) == "hhcchc");  // (x4,x5,x3,x6,x2,x1)
}

TEST_CASE("parsing a shuffle statement builds the full permutation set") {
  auto doc = parse_ok(
      "protocol demo\n"
      "inputs 1\n"
      "cards 6\n"
      "layout commit 1\nlayout card C\nlayout card C\nlayout card H\nlayout card H\n"
      "\n"
      "shuffle {id, (1 2)(3 5)(4 6)}\n"
      "output committed 1 2\n");
  const auto& set = doc.body.front().shuffle_set;
  REQUIRE(set.size() == 2);
  CHECK(set[0].is_identity());
  CHECK(set[1] == Permutation::from_cycles("(1 2)(3 5)(4 6)", 6));
}

TEST_CASE("empty input yields the missing-header diagnostic") {
  auto result = script::parse("");
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics.front().code == script::DiagCode::missing_header);
  CHECK(result.diagnostics.front().line == 1);
  CHECK_FALSE(result.doc.has_value());

  auto comment_only = script::parse("# nothing here\n\n");
  REQUIRE(comment_only.diagnostics.size() == 1);
  CHECK(comment_only.diagnostics.front().code == script::DiagCode::missing_header);
}

TEST_CASE("diagnostics carry exact positions") {
  auto result = script::parse(
      "protocol demo\n"
      "inputs 2\n"
      "cards 4\n"
      "layout commit 1\n"
      "layout commit 2\n"
      "\n"
      "  frobnicate 1,2\n");
  REQUIRE(result.diagnostics.size() == 1);
  CHECK(result.diagnostics.front().code == script::DiagCode::unknown_statement);
  CHECK(result.diagnostics.front().line == 7);
  CHECK(result.diagnostics.front().col == 3);
}

TEST_CASE("parser rejects malformed pieces with specific codes") {
  auto header =
      "protocol demo\ninputs 2\ncards 4\nlayout commit 1\nlayout commit 2\n\n";
  auto check_code = [&](const std::string& body, script::DiagCode code) {
    auto result = script::parse(header + body);
    REQUIRE_FALSE(result.diagnostics.empty());
    CHECK(result.diagnostics.front().code == code);
    CHECK_FALSE(result.doc.has_value());
  };
  check_code("perm (1 2\noutput public 0\n", script::DiagCode::malformed_cycles);
  check_code("perm (1 9)\noutput public 0\n", script::DiagCode::out_of_range);
  check_code("reveal 1,9\noutput public 0\n", script::DiagCode::out_of_range);
  check_code("reveal 1,1\noutput public 0\n", script::DiagCode::bad_argument);
  check_code("pcut 3\noutput public 0\n", script::DiagCode::bad_argument);
  check_code("branch CH {\noutput public 0\n}\n", script::DiagCode::branch_without_reveal);
  check_code("reveal 1,2\nbranch CX {\noutput public 0\n}\n", script::DiagCode::bad_pattern);
  check_code("output public 0\noutput public 1\n", script::DiagCode::trailing_statements);
  check_code("reveal 1,2\n}\n", script::DiagCode::unbalanced_brace);
  check_code("reveal 1,2\nbranch CH {\noutput public 0\n", script::DiagCode::unbalanced_brace);
}

TEST_CASE("overlapping branch patterns are rejected") {
  auto result = script::parse(
      "protocol demo\n"
      "inputs 1\n"
      "cards 2\n"
      "layout commit 1\n"
      "\n"
      "reveal 1,2\n"
      "branch CH {\n"
      "  output public 0\n"
      "}\n"
      "branch CH {\n"
      "  output public 1\n"
      "}\n");
  REQUIRE_FALSE(result.diagnostics.empty());
  CHECK(result.diagnostics.front().code == script::DiagCode::overlapping_patterns);
  CHECK(result.diagnostics.front().line == 10);
}

TEST_CASE("parse then serialize then parse is the identity") {
  for (const std::string name : {"five_card_trick.cardp", "equality_second_3.cardp"}) {
    auto doc = parse_ok(read_file(scripts_dir() + "/" + name));
    auto again = parse_ok(script::serialize(doc));
    CHECK(doc == again);
    CHECK(script::serialize(doc) == script::serialize(again));
  }
}

TEST_CASE("elaboration enforces the card budget") {
  auto doc = parse_ok(
      "protocol demo\n"
      "inputs 2\n"
      "cards 5\n"
      "layout commit 1\n"
      "layout commit 2\n"
      "\n"
      "output committed 1 2\n");
  auto result = script::elaborate(doc);
  REQUIRE_FALSE(result.diagnostics.empty());
  CHECK(result.diagnostics.front().code == script::DiagCode::budget_violation);
}

TEST_CASE("elaboration rejects revealing a face-up card") {
  auto doc = parse_ok(kTinyHeader +
                      "\nreveal 1,2\nreveal 1,2\noutput public 0\n");
  auto result = script::elaborate(doc);
  REQUIRE_FALSE(result.diagnostics.empty());
  CHECK(result.diagnostics.front().code == script::DiagCode::reveal_face_up);
  CHECK(result.diagnostics.front().line == 7);  // the second reveal statement
}

TEST_CASE("elaboration rejects hiding a face-down card") {
  auto doc = parse_ok(kTinyHeader + "\nhide 1\noutput public 0\n");
  auto result = script::elaborate(doc);
  REQUIRE_FALSE(result.diagnostics.empty());
  CHECK(result.diagnostics.front().code == script::DiagCode::hide_face_down);
}

TEST_CASE("elaboration detects non-exhaustive branches") {
  auto doc = parse_ok(kTinyHeader +
                      "\nreveal 1,2\nbranch CH {\n  output public 0\n}\n");
  auto result = script::elaborate(doc);
  REQUIRE_FALSE(result.diagnostics.empty());
  CHECK(result.diagnostics.front().code == script::DiagCode::nonexhaustive_branch);
  // the sweep names the input that escapes the branch
  CHECK(result.diagnostics.front().message.find("input 1") != std::string::npos);
}

TEST_CASE("elaboration detects paths without output") {
  auto doc = parse_ok(kTinyHeader + "\nreveal 1,2\n");
  auto result = script::elaborate(doc);
  REQUIRE_FALSE(result.diagnostics.empty());
  CHECK(result.diagnostics.front().code == script::DiagCode::missing_output);
}

TEST_CASE("elaboration checks shuffle divisibility") {
  auto doc = parse_ok(kTinyHeader + "\nksec 3\noutput committed 1 2\n");
  auto result = script::elaborate(doc);
  REQUIRE_FALSE(result.diagnostics.empty());
  CHECK(result.diagnostics.front().code == script::DiagCode::size_mismatch);
}

TEST_CASE("a leaky script elaborates fine and fails the security check") {
  auto doc = parse_ok(
      "protocol leaky_five\n"
      "inputs 2\n"
      "cards 5\n"
      "layout commit 1\n"
      "layout card C\n"
      "layout commit 2\n"
      "\n"
      "reveal 1,2\n"
      "hide 1,2\n"
      "perm (4 5)\n"
      "rcut 1..5\n"
      "reveal 1,2,3,4,5\n"
      "branch CCCHH {\n  output public 1\n}\n"
      "branch CCHCH {\n  output public 0\n}\n"
      "branch CCHHC {\n  output public 1\n}\n"
      "branch CHCCH {\n  output public 0\n}\n"
      "branch CHCHC {\n  output public 0\n}\n"
      "branch CHHCC {\n  output public 1\n}\n"
      "branch HCCCH {\n  output public 1\n}\n"
      "branch HCCHC {\n  output public 0\n}\n"
      "branch HCHCC {\n  output public 0\n}\n"
      "branch HHCCC {\n  output public 1\n}\n");
  Protocol p = elaborate_ok(doc);
  CHECK(verify_correctness(p, FunctionSpec::logical_and(2)).pass);
  auto security = verify_security(p, FunctionSpec::logical_and(2));
  CHECK_FALSE(security.pass);
  CHECK_FALSE(security.violations.empty());
}

TEST_CASE("reference scripts match the built-ins trace for trace") {
  {
    Protocol scripted = elaborate_ok(parse_ok(read_file(scripts_dir() + "/five_card_trick.cardp")));
    Protocol builtin = five_card_trick();
    CHECK(scripted.name == builtin.name);
    CHECK(scripted.cards == builtin.cards);
    CHECK(trace_distributions(scripted) == trace_distributions(builtin));
  }
  {
    Protocol scripted =
        elaborate_ok(parse_ok(read_file(scripts_dir() + "/equality_second_3.cardp")));
    Protocol builtin = equality_second(3);
    CHECK(scripted.name == builtin.name);
    CHECK(scripted.params == builtin.params);
    CHECK(trace_distributions(scripted) == trace_distributions(builtin));
    // the committed outputs decode identically as well
    CHECK(verify_correctness(scripted, FunctionSpec::equality(3)).pass);
    CHECK(verify_security(scripted, FunctionSpec::equality(3)).pass);
  }
}

TEST_CASE("layout encodings cover integers and bit planes") {
  auto doc = parse_ok(
      "protocol enc_demo\n"
      "inputs 2 mod 3\n"
      "cards 6\n"
      "layout enc 1 3 heart\n"
      "layout enc 2 3 club\n"
      "\n"
      "reveal 4,5,6\n"
      "branch CHH {\n  output row 1..3 heart\n}\n"
      "branch HCH {\n  output row 1..3 heart\n}\n"
      "branch HHC {\n  output row 1..3 heart\n}\n");
  Protocol p = elaborate_ok(doc);
  auto runs = enumerate_runs(p, {2, 1});
  REQUIRE(runs.size() == 1);
  CHECK(runs.front().trace.front().suits == "HCH");  // E_3^club(1)
  CHECK(decode_int_at(runs.front().final_seq, 1, 3, Scheme::heart) == 2);

  auto bits = parse_ok(
      "protocol bits_demo\n"
      "inputs 1 mod 4\n"
      "cards 4\n"
      "layout bit 1 0\n"
      "layout bit 1 1\n"
      "\n"
      "reveal 1,2,3,4\n"
      "branch CHCH {\n  output public 0\n}\n"
      "branch HCCH {\n  output public 1\n}\n"
      "branch CHHC {\n  output public 2\n}\n"
      "branch HCHC {\n  output public 3\n}\n");
  Protocol bp = elaborate_ok(bits);
  for (long v = 0; v < 4; ++v) {
    auto runs2 = enumerate_runs(bp, {v});
    REQUIRE(runs2.size() == 1);
    CHECK(runs2.front().output.value == v);
  }
}
