#pragma once

// Exhaustive analysis: every input, every shuffle choice, exact rational
// probabilities. Correctness demands the decoded result equal the target
// function on every path; security demands equal visible-trace distributions
// for inputs in the same output class; posteriors mechanize the Bayes
// arguments per reveal step.

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cardproto/builtins.hpp"
#include "cardproto/engine.hpp"
#include "cardproto/protocol.hpp"
#include "cardproto/rational.hpp"

namespace cardproto {

struct RunOutcome {
  std::vector<long> input;
  std::vector<int> choices;
  std::vector<Observation> trace;
  Rational probability{1, 1};
  OutputStmt output;
  CardSequence final_seq;
  int shuffle_count = 0;
};

inline std::vector<RunOutcome> enumerate_runs(const Protocol& protocol,
                                              const std::vector<long>& input,
                                              const EngineOptions& options = {}) {
  std::vector<RunOutcome> outcomes;
  enumerate_paths(protocol, input, options, [&](PathOutcome&& path) {
    RunOutcome run;
    run.input = input;
    run.choices = std::move(path.choices);
    run.trace = std::move(path.trace);
    run.probability = path.probability;
    run.output = path.output;
    run.final_seq = std::move(path.final_seq);
    run.shuffle_count = path.shuffle_count;
    outcomes.push_back(std::move(run));
  });
  return outcomes;
}

// Decodes a path's result; nullopt when a committed output is malformed.
inline std::optional<long> decode_result(const PathOutcome& path) {
  switch (path.output.kind) {
    case OutputStmt::Kind::public_value:
      return path.output.value;
    case OutputStmt::Kind::committed_bit: {
      auto v = decode_bit_at(path.final_seq, path.output.first, path.output.second);
      return v ? std::optional<long>(*v) : std::nullopt;
    }
    case OutputStmt::Kind::committed_row:
      return decode_int_at(path.final_seq, path.output.row_first,
                           path.output.row_last - path.output.row_first + 1,
                           path.output.row_scheme);
  }
  return std::nullopt;
}

inline std::string render_result(const PathOutcome& path) {
  auto value = decode_result(path);
  switch (path.output.kind) {
    case OutputStmt::Kind::public_value:
      return "public " + std::to_string(path.output.value);
    case OutputStmt::Kind::committed_bit:
      return "committed(" + std::to_string(path.output.first) + "," +
             std::to_string(path.output.second) + ")=" +
             (value ? std::to_string(*value) : std::string("invalid"));
    case OutputStmt::Kind::committed_row:
      return "row(" + std::to_string(path.output.row_first) + ".." +
             std::to_string(path.output.row_last) + "," + scheme_name(path.output.row_scheme) +
             ")=" + (value ? std::to_string(*value) : std::string("invalid"));
  }
  return "?";
}

// --- correctness -------------------------------------------------------------

struct Counterexample {
  std::vector<long> input;
  std::vector<int> choices;
  std::string trace;
  long expected = 0;
  std::string actual;
};

struct CorrectnessReport {
  bool pass = true;
  long paths_checked = 0;
  std::vector<Counterexample> counterexamples;  // capped
};

// --- security ----------------------------------------------------------------

struct TraceDistribution {
  std::map<std::string, Rational> probability_by_trace;
};

struct SecurityViolation {
  std::vector<long> input_a, input_b;
  std::string trace;
  Rational prob_a{0, 1}, prob_b{0, 1};
};

struct SecurityReport {
  bool pass = true;
  std::vector<SecurityViolation> violations;  // capped
  std::map<long, std::vector<std::vector<long>>> classes;  // output value -> inputs
};

// --- resources ---------------------------------------------------------------

struct ResourceCount {
  int cards = 0;
  int clubs = 0, hearts = 0;
  int shuffles_min = 0, shuffles_max = 0;
  bool uniform = true;  // same shuffle count and kind mix on every path
  std::map<std::string, int> breakdown;  // shuffle kind -> per-path count

  int shuffles() const { return shuffles_max; }
};

// --- branch coverage ----------------------------------------------------------

struct BranchCoverage {
  int total_arms = 0;
  int dead_arms = 0;  // represented but never matched over the whole domain
};

// --- posterior tables ----------------------------------------------------------

using Prior = std::map<std::vector<long>, Rational>;

inline Prior uniform_prior(const InputDomain& domain) {
  Prior prior;
  auto inputs = domain.all_inputs();
  Rational p(1, static_cast<std::int64_t>(inputs.size()));
  for (auto& input : inputs) prior[input] = p;
  return prior;
}

inline Prior point_prior(const InputDomain& domain, const std::vector<long>& input) {
  if (!domain.contains(input)) throw std::domain_error("point prior outside the domain");
  Prior prior;
  for (auto& i : domain.all_inputs()) prior[i] = Rational(i == input ? 1 : 0, 1);
  return prior;
}

struct PosteriorEntry {
  Rational trace_probability{0, 1};
  std::map<std::vector<long>, Rational> posterior;
};

// steps[j]: distribution over inputs conditioned on the trace prefix after
// the (j+1)-th reveal; final_traces conditions on the complete trace.
struct PosteriorReport {
  std::vector<std::map<std::string, PosteriorEntry>> steps;
  std::map<std::string, PosteriorEntry> final_traces;

  const PosteriorEntry& at_step(int step, const std::string& prefix) const {
    if (step < 1 || step > static_cast<int>(steps.size()))
      throw std::domain_error("no reveal step " + std::to_string(step));
    const auto& table = steps[static_cast<std::size_t>(step - 1)];
    auto it = table.find(prefix);
    if (it == table.end())
      throw std::domain_error("trace prefix has probability zero under this prior: " + prefix);
    return it->second;
  }

  const PosteriorEntry& at_final(const std::string& trace) const {
    auto it = final_traces.find(trace);
    if (it == final_traces.end())
      throw std::domain_error("trace has probability zero under this prior: " + trace);
    return it->second;
  }
};

inline PosteriorReport kwh_posteriors(const Protocol& protocol, const Prior& prior,
                                      const EngineOptions& options = {}) {
  Rational total(0, 1);
  for (const auto& [input, p] : prior) {
    if (!protocol.domain.contains(input))
      throw std::domain_error("prior input " + render_input(input) + " outside the domain");
    if (p < Rational(0, 1)) throw std::domain_error("prior probabilities must be nonnegative");
    total += p;
  }
  if (total != Rational(1, 1)) throw std::domain_error("prior must sum to exactly 1");

  // mass[step][prefix][input], plus the full-trace table
  std::vector<std::map<std::string, std::map<std::vector<long>, Rational>>> step_mass;
  std::map<std::string, std::map<std::vector<long>, Rational>> final_mass;
  for (const auto& [input, p] : prior) {
    if (p == Rational(0, 1)) continue;
    EngineHooks hooks;
    hooks.on_reveal = [&](const std::vector<Observation>& trace, const Rational& path_prob) {
      std::size_t step = trace.size();
      if (step_mass.size() < step) step_mass.resize(step);
      step_mass[step - 1][trace_key(trace)][input] += p * path_prob;
    };
    enumerate_paths(protocol, input, options, [&](PathOutcome&& path) {
      final_mass[trace_key(path.trace)][input] += p * path.probability;
    }, &hooks);
  }

  auto normalize = [](const std::map<std::string, std::map<std::vector<long>, Rational>>& mass) {
    std::map<std::string, PosteriorEntry> out;
    for (const auto& [key, by_input] : mass) {
      PosteriorEntry entry;
      for (const auto& [input, m] : by_input) entry.trace_probability += m;
      for (const auto& [input, m] : by_input) entry.posterior[input] = m / entry.trace_probability;
      out[key] = std::move(entry);
    }
    return out;
  };

  PosteriorReport report;
  for (const auto& table : step_mass) report.steps.push_back(normalize(table));
  report.final_traces = normalize(final_mass);
  return report;
}

// --- whole-protocol analysis ---------------------------------------------------

struct AnalysisOptions {
  EngineOptions engine{};
  int threads = 1;
  int max_counterexamples = 16;
  int max_violations = 16;
};

struct AnalysisReport {
  CorrectnessReport correctness;
  SecurityReport security;
  ResourceCount resources;
  BranchCoverage coverage;
};

namespace detail {

struct PerInputAnalysis {
  std::vector<long> input;
  long expected = 0;
  TraceDistribution dist;
  long failure_count = 0;
  std::vector<Counterexample> failures;  // capped per input
  long paths = 0;
  Rational prob_sum{0, 1};
  int shuffles_min = 0, shuffles_max = 0;
  std::map<std::string, int> breakdown;
  bool breakdown_uniform = true;
  std::vector<char> arms_seen;
};

inline PerInputAnalysis analyze_one_input(const Protocol& protocol, const FunctionSpec& spec,
                                          const std::vector<long>& input,
                                          const EngineOptions& engine, int max_failures,
                                          const std::map<const BranchArm*, int>& arm_ids) {
  PerInputAnalysis out;
  out.input = input;
  out.expected = spec.eval(input);
  out.arms_seen.assign(arm_ids.size(), 0);
  bool first_path = true;

  EngineHooks hooks;
  hooks.on_arm = [&](int arm_id) { out.arms_seen[static_cast<std::size_t>(arm_id)] = 1; };
  enumerate_paths(protocol, input, engine, [&](PathOutcome&& path) {
    ++out.paths;
    out.prob_sum += path.probability;
    out.dist.probability_by_trace[trace_key(path.trace)] += path.probability;

    auto actual = decode_result(path);
    if (!actual || *actual != out.expected) {
      ++out.failure_count;
      if (static_cast<int>(out.failures.size()) < max_failures) {
        Counterexample ce;
        ce.input = input;
        ce.choices = path.choices;
        ce.trace = trace_key(path.trace);
        ce.expected = out.expected;
        ce.actual = render_result(path);
        out.failures.push_back(std::move(ce));
      }
    }

    std::map<std::string, int> mix;
    for (std::size_t k = 0; k < path.shuffle_breakdown.size(); ++k)
      if (path.shuffle_breakdown[k] > 0)
        mix[shuffle_kind_name(static_cast<ShuffleKind>(k))] = path.shuffle_breakdown[k];
    if (first_path) {
      out.shuffles_min = out.shuffles_max = path.shuffle_count;
      out.breakdown = std::move(mix);
      first_path = false;
    } else {
      out.shuffles_min = std::min(out.shuffles_min, path.shuffle_count);
      out.shuffles_max = std::max(out.shuffles_max, path.shuffle_count);
      if (mix != out.breakdown) out.breakdown_uniform = false;
    }
  }, &hooks, &arm_ids);
  return out;
}

}  // namespace detail

inline AnalysisReport analyze_protocol(const Protocol& protocol, const FunctionSpec& spec,
                                       const AnalysisOptions& options = {}) {
  if (spec.domain.moduli != protocol.domain.moduli)
    throw std::domain_error("function domain does not match the protocol domain");

  std::map<const BranchArm*, int> arm_ids;
  std::vector<SourceLoc> arm_locs;
  int arm_count = 0;
  detail::index_arms(protocol.body, arm_ids, arm_locs, arm_count);

  AnalysisReport report;
  report.resources.cards = protocol.cards;
  report.resources.clubs = protocol.clubs;
  report.resources.hearts = protocol.hearts;
  report.coverage.total_arms = arm_count;
  std::vector<char> arms_seen(static_cast<std::size_t>(arm_count), 0);

  // Representative distribution per output class; equality within a class is
  // transitive, so each input is compared against its class representative.
  std::map<long, std::pair<std::vector<long>, TraceDistribution>> representatives;

  auto inputs = protocol.domain.all_inputs();
  int threads = std::max(1, options.threads);
  bool first_overall = true;

  for (std::size_t batch = 0; batch < inputs.size(); batch += static_cast<std::size_t>(threads)) {
    std::size_t count = std::min(static_cast<std::size_t>(threads), inputs.size() - batch);
    std::vector<detail::PerInputAnalysis> slot(count);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto job = [&](std::size_t offset) {
      try {
        slot[offset] = detail::analyze_one_input(protocol, spec, inputs[batch + offset],
                                                 options.engine, options.max_counterexamples,
                                                 arm_ids);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    if (count == 1) {
      job(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 1; t < count; ++t) pool.emplace_back(job, t);
      job(0);
      for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t offset = 0; offset < count; ++offset) {
      detail::PerInputAnalysis& one = slot[offset];
      report.correctness.paths_checked += one.paths;
      if (one.prob_sum != Rational(1, 1))
        throw std::logic_error("outcome probabilities for input " + render_input(one.input) +
                               " sum to " + to_string(one.prob_sum));
      if (one.failure_count > 0) report.correctness.pass = false;
      for (auto& ce : one.failures)
        if (static_cast<int>(report.correctness.counterexamples.size()) <
            options.max_counterexamples)
          report.correctness.counterexamples.push_back(std::move(ce));
      for (std::size_t a = 0; a < arms_seen.size(); ++a) arms_seen[a] |= one.arms_seen[a];

      if (first_overall) {
        report.resources.shuffles_min = one.shuffles_min;
        report.resources.shuffles_max = one.shuffles_max;
        report.resources.breakdown = one.breakdown;
        first_overall = false;
      } else {
        report.resources.shuffles_min = std::min(report.resources.shuffles_min, one.shuffles_min);
        report.resources.shuffles_max = std::max(report.resources.shuffles_max, one.shuffles_max);
        if (one.breakdown != report.resources.breakdown) report.resources.uniform = false;
      }
      if (one.shuffles_min != one.shuffles_max || !one.breakdown_uniform)
        report.resources.uniform = false;

      long cls = one.expected;
      report.security.classes[cls].push_back(one.input);
      auto rep = representatives.find(cls);
      if (rep == representatives.end()) {
        representatives.emplace(cls, std::make_pair(one.input, std::move(one.dist)));
      } else {
        // exact-rational comparison of the two distributions
        const auto& base = rep->second.second.probability_by_trace;
        const auto& mine = one.dist.probability_by_trace;
        auto bi = base.begin();
        auto mi = mine.begin();
        while (bi != base.end() || mi != mine.end()) {
          std::string trace;
          Rational pa(0, 1), pb(0, 1);
          if (mi == mine.end() || (bi != base.end() && bi->first < mi->first)) {
            trace = bi->first;
            pa = bi->second;
            ++bi;
          } else if (bi == base.end() || mi->first < bi->first) {
            trace = mi->first;
            pb = mi->second;
            ++mi;
          } else {
            trace = bi->first;
            pa = bi->second;
            pb = mi->second;
            ++bi;
            ++mi;
          }
          if (pa != pb) {
            report.security.pass = false;
            if (static_cast<int>(report.security.violations.size()) < options.max_violations) {
              SecurityViolation v;
              v.input_a = rep->second.first;
              v.input_b = one.input;
              v.trace = trace;
              v.prob_a = pa;
              v.prob_b = pb;
              report.security.violations.push_back(std::move(v));
            }
          }
        }
      }
    }
  }
  if (report.resources.shuffles_min != report.resources.shuffles_max)
    report.resources.uniform = false;

  for (char seen : arms_seen)
    if (!seen) ++report.coverage.dead_arms;
  return report;
}

inline CorrectnessReport verify_correctness(const Protocol& protocol, const FunctionSpec& spec,
                                            const AnalysisOptions& options = {}) {
  return analyze_protocol(protocol, spec, options).correctness;
}

inline SecurityReport verify_security(const Protocol& protocol, const FunctionSpec& spec,
                                      const AnalysisOptions& options = {}) {
  return analyze_protocol(protocol, spec, options).security;
}

inline ResourceCount count_resources(const Protocol& protocol, const FunctionSpec& spec,
                                     const AnalysisOptions& options = {}) {
  return analyze_protocol(protocol, spec, options).resources;
}

inline BranchCoverage branch_coverage(const Protocol& protocol, const FunctionSpec& spec,
                                      const AnalysisOptions& options = {}) {
  return analyze_protocol(protocol, spec, options).coverage;
}

// --- seeded sampling (non-proving) --------------------------------------------

struct SampleReport {
  long paths_checked = 0;
  bool all_correct = true;
  std::vector<Counterexample> counterexamples;
};

// Random paths through every input. Can refute correctness, never prove
// security; the exhaustive analyzer is the proof path.
inline SampleReport sample_paths(const Protocol& protocol, const FunctionSpec& spec,
                                 long samples_per_input, std::uint64_t seed,
                                 int max_counterexamples = 16) {
  SampleReport report;
  std::uint64_t next_seed = seed;
  for (const auto& input : protocol.domain.all_inputs()) {
    long expected = spec.eval(input);
    for (long s = 0; s < samples_per_input; ++s) {
      PathOutcome path = run_single(protocol, input, next_seed++);
      ++report.paths_checked;
      auto actual = decode_result(path);
      if (!actual || *actual != expected) {
        report.all_correct = false;
        if (static_cast<int>(report.counterexamples.size()) < max_counterexamples) {
          Counterexample ce;
          ce.input = input;
          ce.choices = path.choices;
          ce.trace = trace_key(path.trace);
          ce.expected = expected;
          ce.actual = render_result(path);
          report.counterexamples.push_back(std::move(ce));
        }
      }
    }
  }
  return report;
}

}  // namespace cardproto
