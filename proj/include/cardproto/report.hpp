#pragma once

// Canonical report rendering. The JSON form is byte-stable for a fixed
// configuration: ordered keys, sorted maps, canonical "p/q" rationals.

#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cardproto/analyzer.hpp"
#include "cardproto/protocol.hpp"

namespace cardproto {

using ReportJson = nlohmann::ordered_json;

inline ReportJson report_json(const Protocol& protocol, const AnalysisReport& analysis,
                              const PosteriorReport* posteriors = nullptr) {
  ReportJson j;
  j["protocol"] = protocol.name;
  ReportJson params = ReportJson::object();
  for (const auto& [key, value] : protocol.params) params[key] = value;
  j["params"] = params;

  ReportJson correctness;
  correctness["pass"] = analysis.correctness.pass;
  ReportJson counterexamples = ReportJson::array();
  for (const auto& ce : analysis.correctness.counterexamples) {
    ReportJson entry;
    entry["input"] = render_input(ce.input);
    std::string choices;
    for (std::size_t i = 0; i < ce.choices.size(); ++i)
      choices += (i ? "," : "") + std::to_string(ce.choices[i]);
    entry["choices"] = choices;
    entry["trace"] = ce.trace;
    entry["expected"] = ce.expected;
    entry["actual"] = ce.actual;
    counterexamples.push_back(entry);
  }
  correctness["counterexamples"] = counterexamples;
  j["correctness"] = correctness;

  ReportJson security;
  security["pass"] = analysis.security.pass;
  ReportJson violations = ReportJson::array();
  for (const auto& v : analysis.security.violations) {
    ReportJson entry;
    entry["input_a"] = render_input(v.input_a);
    entry["input_b"] = render_input(v.input_b);
    entry["trace"] = v.trace;
    entry["prob_a"] = to_string(v.prob_a);
    entry["prob_b"] = to_string(v.prob_b);
    violations.push_back(entry);
  }
  security["violations"] = violations;
  j["security"] = security;

  ReportJson resources;
  resources["cards"] = analysis.resources.cards;
  if (analysis.resources.uniform) {
    resources["shuffles"] = analysis.resources.shuffles_max;
  } else {
    ReportJson range;
    range["min"] = analysis.resources.shuffles_min;
    range["max"] = analysis.resources.shuffles_max;
    resources["shuffles"] = range;
  }
  j["resources"] = resources;

  if (posteriors) {
    ReportJson tables = ReportJson::array();
    auto emit = [&](const ReportJson& step, const std::string& trace, const PosteriorEntry& entry) {
      ReportJson row;
      row["step"] = step;
      row["trace"] = trace;
      row["probability"] = to_string(entry.trace_probability);
      ReportJson posterior = ReportJson::object();
      for (const auto& [input, p] : entry.posterior) posterior[render_input(input)] = to_string(p);
      row["posterior"] = posterior;
      tables.push_back(row);
    };
    for (std::size_t s = 0; s < posteriors->steps.size(); ++s)
      for (const auto& [trace, entry] : posteriors->steps[s])
        emit(ReportJson(static_cast<int>(s + 1)), trace, entry);
    for (const auto& [trace, entry] : posteriors->final_traces) emit(ReportJson("final"), trace, entry);
    j["posteriors"] = tables;
  }
  return j;
}

inline std::string report_json_text(const Protocol& protocol, const AnalysisReport& analysis,
                                    const PosteriorReport* posteriors = nullptr) {
  return report_json(protocol, analysis, posteriors).dump(2) + "\n";
}

inline std::string describe_protocol(const Protocol& protocol) {
  std::string out = protocol.name;
  if (!protocol.params.empty()) {
    out += " (";
    for (std::size_t i = 0; i < protocol.params.size(); ++i) {
      if (i) out += ", ";
      out += protocol.params[i].first + "=" + std::to_string(protocol.params[i].second);
    }
    out += ")";
  }
  return out;
}

inline std::string report_text(const Protocol& protocol, const AnalysisReport& analysis,
                               const PosteriorReport* posteriors = nullptr) {
  std::ostringstream out;
  out << "protocol: " << describe_protocol(protocol) << "\n";
  out << "cards: " << analysis.resources.cards << " (" << analysis.resources.clubs << " clubs, "
      << analysis.resources.hearts << " hearts)\n";
  out << "shuffles per path: ";
  if (analysis.resources.uniform) {
    out << analysis.resources.shuffles_max;
    bool first = true;
    for (const auto& [kind, count] : analysis.resources.breakdown) {
      out << (first ? " [" : ", ") << kind << ":" << count;
      first = false;
    }
    if (!first) out << "]";
  } else {
    out << analysis.resources.shuffles_min << ".." << analysis.resources.shuffles_max
        << " (not uniform)";
  }
  out << "\n";
  out << "correctness: " << (analysis.correctness.pass ? "PASS" : "FAIL") << " ("
      << analysis.correctness.paths_checked << " paths)\n";
  for (const auto& ce : analysis.correctness.counterexamples)
    out << "  counterexample: input " << render_input(ce.input) << " trace " << ce.trace
        << " expected " << ce.expected << " got " << ce.actual << "\n";
  out << "security: " << (analysis.security.pass ? "PASS" : "FAIL") << " ("
      << analysis.security.classes.size() << " output classes)\n";
  for (const auto& v : analysis.security.violations)
    out << "  violation: inputs " << render_input(v.input_a) << " vs " << render_input(v.input_b)
        << " trace " << v.trace << " probabilities " << to_string(v.prob_a) << " vs "
        << to_string(v.prob_b) << "\n";
  out << "branch arms: " << analysis.coverage.total_arms << " (" << analysis.coverage.dead_arms
      << " never taken)\n";
  if (posteriors) {
    out << "posterior tables: " << posteriors->final_traces.size() << " final traces across "
        << posteriors->steps.size() << " reveal steps\n";
  }
  return out.str();
}

}  // namespace cardproto
