#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cardproto/analyzer.hpp"
#include "cardproto/builtins.hpp"

using namespace cardproto;

namespace {

// A protocol with no shuffles: reveal the lone commitment and report it.
Protocol reveal_bit_protocol() {
  using namespace builddetail;
  Program body;
  BuildCtx c{&body, std::vector<bool>(2, false), {}};
  emit_reveal(c, {1, 2});
  emit_branch(c, {{"CH", [](BuildCtx& sub) { output_public(sub, 0); }},
                  {"HC", [](BuildCtx& sub) { output_public(sub, 1); }}});
  return finish("reveal_bit", {}, InputDomain{{2}},
                [](const std::vector<long>& in) {
                  return CardSequence::face_down(in[0] ? "HC" : "CH");
                },
                std::move(body));
}

FunctionSpec identity_bit_spec() {
  FunctionSpec spec;
  spec.name = "identity";
  spec.domain.moduli = {2};
  spec.eval = [](const std::vector<long>& in) { return in[0]; };
  return spec;
}

}  // namespace

TEST_CASE("enumerate_runs yields one outcome per choice vector") {
  auto runs = enumerate_runs(five_card_trick(), {1, 1});
  REQUIRE(runs.size() == 5);
  Rational total(0, 1);
  std::set<std::vector<int>> choice_vectors;
  for (const auto& run : runs) {
    CHECK(run.probability == Rational(1, 5));
    total += run.probability;
    choice_vectors.insert(run.choices);
  }
  CHECK(total == Rational(1, 1));
  CHECK(choice_vectors.size() == 5);

  // two binary shuffles for the second protocol at n = 3
  for (const auto& input : equality_second(3).domain.all_inputs())
    CHECK(enumerate_runs(equality_second(3), input).size() == 4);
}

TEST_CASE("a protocol without shuffles has a single certain outcome") {
  Protocol p = reveal_bit_protocol();
  auto runs = enumerate_runs(p, {1});
  REQUIRE(runs.size() == 1);
  CHECK(runs.front().probability == Rational(1, 1));
  CHECK(runs.front().shuffle_count == 0);
}

TEST_CASE("enumeration respects the node budget") {
  EngineOptions tiny;
  tiny.node_budget = 3;
  CHECK_THROWS_AS(enumerate_runs(equality_first(4), {0, 0, 0, 0}, tiny), budget_error);
}

TEST_CASE("verify_correctness passes the built-in protocols") {
  CHECK(verify_correctness(equality_first(4), FunctionSpec::equality(4)).pass);
  CHECK(verify_correctness(six_card_trick(), FunctionSpec::equality(3)).pass);
}

TEST_CASE("verify_correctness rejects a protocol against the wrong function") {
  auto report = verify_correctness(five_card_trick(), FunctionSpec::equality(2));
  CHECK_FALSE(report.pass);
  REQUIRE_FALSE(report.counterexamples.empty());
  // (0,0) is equal but not both-ones: AND says 0, equality says 1
  CHECK(report.counterexamples.front().expected == 1);
  CHECK(report.counterexamples.front().actual == "public 0");
}

TEST_CASE("the cut-free variant is still correct but leaks") {
  Protocol sabotaged = equality_first_no_final_cut(3);
  CHECK(verify_correctness(sabotaged, FunctionSpec::equality(3)).pass);
  auto security = verify_security(sabotaged, FunctionSpec::equality(3));
  CHECK_FALSE(security.pass);
  REQUIRE_FALSE(security.violations.empty());
  const auto& v = security.violations.front();
  CHECK(v.prob_a != v.prob_b);
  CHECK_FALSE(v.trace.empty());
}

TEST_CASE("revealing a commitment before any shuffle is insecure") {
  Protocol peek = five_card_trick_peek();
  auto security = verify_security(peek, FunctionSpec::logical_and(2));
  CHECK_FALSE(security.pass);
  REQUIRE_FALSE(security.violations.empty());
  // the first observation itself distinguishes (0,1) from (1,0)
  CHECK(security.violations.front().trace.find("1,2:") == 0);
}

TEST_CASE("verify_security passes the genuine protocols") {
  CHECK(verify_security(five_card_trick(), FunctionSpec::logical_and(2)).pass);
  for (int n = 2; n <= 5; ++n)
    CHECK(verify_security(equality_first(n), FunctionSpec::equality(n)).pass);
  CHECK(verify_security(equality_second(4), FunctionSpec::equality(4)).pass);
  CHECK(verify_security(six_card_trick(), FunctionSpec::equality(3)).pass);
}

TEST_CASE("security classes group inputs by output value") {
  auto report = verify_security(five_card_trick(), FunctionSpec::logical_and(2));
  REQUIRE(report.classes.size() == 2);
  CHECK(report.classes.at(0).size() == 3);
  CHECK(report.classes.at(1) == std::vector<std::vector<long>>{{1, 1}});
}

TEST_CASE("posteriors equal the prior at the addition reveal") {
  for (int k = 2; k <= 5; ++k) {
    Protocol add = add_mod(k);
    std::vector<Prior> priors{uniform_prior(add.domain)};
    priors.push_back(point_prior(add.domain, {0, k - 1}));
    priors.push_back(point_prior(add.domain, {1, 0}));
    // a skewed but valid rational prior
    Prior skew;
    auto inputs = add.domain.all_inputs();
    Rational rest(1, 1);
    for (std::size_t i = 0; i + 1 < inputs.size(); ++i) {
      Rational p(1, static_cast<std::int64_t>(2 * inputs.size()));
      skew[inputs[i]] = p;
      rest -= p;
    }
    skew[inputs.back()] = rest;
    priors.push_back(skew);

    for (const Prior& prior : priors) {
      auto report = kwh_posteriors(add, prior);
      REQUIRE(report.steps.size() == 1);
      for (const auto& [prefix, entry] : report.steps.front()) {
        for (const auto& [input, p] : prior) {
          Rational posterior(0, 1);
          auto it = entry.posterior.find(input);
          if (it != entry.posterior.end()) posterior = it->second;
          CHECK(posterior == p);
        }
      }
    }
  }
}

TEST_CASE("posterior over the last bit stays the prior marginal") {
  Protocol p = equality_first(3);
  Prior prior = uniform_prior(p.domain);
  auto report = kwh_posteriors(p, prior);
  REQUIRE(report.steps.size() >= 1);
  for (const auto& [prefix, entry] : report.steps.front()) {
    Rational marginal(0, 1);
    for (const auto& [input, post] : entry.posterior)
      if (input.back() == 1) marginal += post;
    CHECK(marginal == Rational(1, 2));
  }
}

TEST_CASE("point-mass priors produce point-mass posteriors") {
  Protocol p = equality_first(3);
  Prior prior = point_prior(p.domain, {0, 1, 0});
  auto report = kwh_posteriors(p, prior);
  for (const auto& table : report.steps)
    for (const auto& [prefix, entry] : table) {
      REQUIRE(entry.posterior.size() == 1);
      CHECK(entry.posterior.begin()->first == std::vector<long>{0, 1, 0});
      CHECK(entry.posterior.begin()->second == Rational(1, 1));
    }
}

TEST_CASE("full-trace posteriors equal the prior conditioned on the output class") {
  Protocol p = equality_first(4);
  FunctionSpec spec = FunctionSpec::equality(4);
  Prior prior = uniform_prior(p.domain);
  auto report = kwh_posteriors(p, prior);
  for (const auto& [trace, entry] : report.final_traces) {
    // the class of this trace is the function value of any supporting input
    long cls = spec.eval(entry.posterior.begin()->first);
    Rational class_mass(0, 1);
    for (const auto& [input, pr] : prior)
      if (spec.eval(input) == cls) class_mass += pr;
    for (const auto& [input, post] : entry.posterior) {
      CHECK(spec.eval(input) == cls);
      CHECK(post == prior.at(input) / class_mass);
    }
  }
}

TEST_CASE("security holds exactly when posteriors collapse to class conditionals") {
  // metamorphic check over the secure protocol and the sabotaged one
  struct Case {
    Protocol protocol;
    FunctionSpec spec;
    bool secure;
  };
  std::vector<Case> cases;
  cases.push_back({equality_first(3), FunctionSpec::equality(3), true});
  cases.push_back({equality_first_no_final_cut(3), FunctionSpec::equality(3), false});
  for (auto& c : cases) {
    CHECK(verify_security(c.protocol, c.spec).pass == c.secure);
    Prior prior = uniform_prior(c.protocol.domain);
    auto report = kwh_posteriors(c.protocol, prior);
    bool collapsed = true;
    for (const auto& [trace, entry] : report.final_traces) {
      long cls = c.spec.eval(entry.posterior.begin()->first);
      Rational class_mass(0, 1);
      for (const auto& [input, pr] : prior)
        if (c.spec.eval(input) == cls) class_mass += pr;
      for (const auto& [input, post] : entry.posterior)
        if (c.spec.eval(input) != cls || post != prior.at(input) / class_mass) collapsed = false;
    }
    CHECK(collapsed == c.secure);
  }
}

TEST_CASE("posterior queries reject unknown traces and bad priors") {
  Protocol add = add_mod(3);
  auto report = kwh_posteriors(add, uniform_prior(add.domain));
  CHECK_THROWS_AS(report.at_step(1, "nonsense"), std::domain_error);
  CHECK_THROWS_AS(report.at_step(7, "4,5,6:CHH"), std::domain_error);
  CHECK_THROWS_AS(report.at_final("nonsense"), std::domain_error);

  Prior bad;
  bad[{0, 0}] = Rational(1, 2);  // does not sum to 1
  CHECK_THROWS_AS(kwh_posteriors(add, bad), std::domain_error);
  Prior outside = uniform_prior(add.domain);
  outside[{9, 9}] = Rational(0, 1);
  CHECK_THROWS_AS(kwh_posteriors(add, outside), std::domain_error);
}

TEST_CASE("resource counts match the published table") {
  FunctionSpec eq4 = FunctionSpec::equality(4);
  auto r1 = count_resources(equality_first(4), eq4);
  CHECK(r1.cards == 8);
  CHECK(r1.uniform);
  CHECK(r1.shuffles() == 4);

  auto r2 = count_resources(equality_second(4), eq4);
  CHECK(r2.cards == 8);
  CHECK(r2.shuffles() == 3);

  auto r3 = count_resources(k_candidate_equality(3, 4), FunctionSpec::equality_mod(3, 4));
  CHECK(r3.cards == 12);
  CHECK(r3.shuffles() == 5);

  auto r4 = count_resources(symmetric_plus_two(3, {0, 0, 1, 1}),
                            FunctionSpec::from_g_table({0, 0, 1, 1}));
  CHECK(r4.cards == 8);
  CHECK(r4.uniform);
  CHECK(r4.shuffles() <= 3 - 1 + 2);  // n-1+|Im f|
}

TEST_CASE("shuffle kind breakdown is reported") {
  auto r = count_resources(equality_first(4), FunctionSpec::equality(4));
  CHECK(r.breakdown.at("k_section_cut") == 3);  // XOR plus two additions
  CHECK(r.breakdown.at("random_cut") == 1);     // the final cut
}

TEST_CASE("dead branch arms are flagged, not dropped") {
  // six-card trick: 20 suit patterns of the reveal, 8 reachable
  auto coverage = branch_coverage(six_card_trick(), FunctionSpec::equality(3));
  CHECK(coverage.total_arms == 20);
  CHECK(coverage.dead_arms == 12);
  // five-card trick reaches all ten patterns
  auto five = branch_coverage(five_card_trick(), FunctionSpec::logical_and(2));
  CHECK(five.total_arms == 10);
  CHECK(five.dead_arms == 0);
}

TEST_CASE("analysis is independent of the worker count") {
  Protocol p = equality_first(4);
  FunctionSpec spec = FunctionSpec::equality(4);
  AnalysisOptions one;
  one.threads = 1;
  AnalysisOptions four;
  four.threads = 4;
  auto a = analyze_protocol(p, spec, one);
  auto b = analyze_protocol(p, spec, four);
  CHECK(a.correctness.pass == b.correctness.pass);
  CHECK(a.correctness.paths_checked == b.correctness.paths_checked);
  CHECK(a.security.pass == b.security.pass);
  CHECK(a.security.classes == b.security.classes);
  CHECK(a.resources.shuffles() == b.resources.shuffles());
  CHECK(a.coverage.dead_arms == b.coverage.dead_arms);
}

TEST_CASE("sampled runs check correctness but cannot prove security") {
  auto report = sample_paths(equality_second(3), FunctionSpec::equality(3), 4, 99);
  CHECK(report.all_correct);
  CHECK(report.paths_checked == 8 * 4);
  auto bad = sample_paths(five_card_trick(), FunctionSpec::equality(2), 6, 7);
  CHECK_FALSE(bad.all_correct);
}

TEST_CASE("mismatched function domains are rejected") {
  CHECK_THROWS_AS(verify_correctness(five_card_trick(), FunctionSpec::equality(3)),
                  std::domain_error);
}

TEST_CASE("zero-shuffle protocols are trivially analyzable") {
  Protocol p = reveal_bit_protocol();
  auto report = analyze_protocol(p, identity_bit_spec());
  CHECK(report.correctness.pass);
  // classes are singletons, so the (leaky) reveal is vacuously secure
  CHECK(report.security.pass);
  CHECK(report.resources.shuffles() == 0);
}
