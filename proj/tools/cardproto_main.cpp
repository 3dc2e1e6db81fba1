// Command-line front end: run single executions, verify protocols
// exhaustively, inspect resources, compute posterior tables, and check
// protocol scripts.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cardproto/analyzer.hpp"
#include "cardproto/builtins.hpp"
#include "cardproto/report.hpp"
#include "cardproto/script.hpp"

using namespace cardproto;

namespace {

int default_threads() {
  if (const char* env = std::getenv("CARDPROTO_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return std::min(v, 64);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return std::max(1, std::min<int>(static_cast<int>(hw), 8));
}

std::vector<long> parse_csv_longs(const std::string& text) {
  std::vector<long> out;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, ',')) {
    if (part.empty()) throw std::domain_error("empty entry in list '" + text + "'");
    out.push_back(std::stol(part));
  }
  if (out.empty()) throw std::domain_error("empty list");
  return out;
}

struct ProtocolOptions {
  std::string name;
  std::string script_path;
  std::string function_name;
  int n = 0;
  int k = 0;
  std::string g_table;
};

struct Selection {
  Protocol protocol;
  FunctionSpec spec;
};

FunctionSpec named_function(const std::string& name, const InputDomain& domain) {
  int arity = domain.arity();
  int modulus = domain.moduli.empty() ? 2 : domain.moduli.front();
  if (name == "equality") return FunctionSpec::equality_mod(arity, modulus);
  if (name == "and") {
    if (modulus != 2) throw std::domain_error("'and' needs binary inputs");
    return FunctionSpec::logical_and(arity);
  }
  if (name == "parity") {
    if (modulus != 2) throw std::domain_error("'parity' needs binary inputs");
    std::vector<long> g;
    for (int a = 0; a <= arity; ++a) g.push_back(a % 2);
    return FunctionSpec::from_g_table(g);
  }
  if (name.rfind("gtable=", 0) == 0) {
    if (modulus != 2) throw std::domain_error("g-tables need binary inputs");
    auto values = parse_csv_longs(name.substr(7));
    if (static_cast<int>(values.size()) != arity + 1)
      throw std::domain_error("g-table needs exactly arity+1 values");
    return FunctionSpec::from_g_table(values);
  }
  throw std::domain_error("unknown function '" + name +
                          "' (expected equality, and, parity, or gtable=v0,v1,...)");
}

Selection select_protocol(const ProtocolOptions& opts) {
  if (!opts.name.empty() && !opts.script_path.empty())
    throw std::domain_error("give either a built-in protocol name or --script, not both");
  if (opts.name.empty() && opts.script_path.empty())
    throw std::domain_error("no protocol selected: give a built-in name or --script");
  if (!opts.script_path.empty()) {
    std::ifstream in(opts.script_path, std::ios::binary);
    if (!in.good()) throw std::domain_error("cannot read script " + opts.script_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto parsed = script::parse(buffer.str());
    if (!parsed.doc) {
      std::string message = "script has parse errors:";
      for (const auto& d : parsed.diagnostics)
        message += "\n  " + opts.script_path + ":" + script::render_diagnostic(d);
      throw std::domain_error(message);
    }
    auto elaborated = script::elaborate(*parsed.doc);
    if (!elaborated.protocol) {
      std::string message = "script has elaboration errors:";
      for (const auto& d : elaborated.diagnostics)
        message += "\n  " + opts.script_path + ":" + script::render_diagnostic(d);
      throw std::domain_error(message);
    }
    if (opts.function_name.empty())
      throw std::domain_error("scripts need --function to name the target function");
    Protocol protocol = std::move(*elaborated.protocol);
    FunctionSpec spec = named_function(opts.function_name, protocol.domain);
    return {std::move(protocol), std::move(spec)};
  }

  const std::string& name = opts.name;
  auto need_n = [&](int min) {
    if (opts.n < min)
      throw std::domain_error("'" + name + "' needs --n >= " + std::to_string(min));
    return opts.n;
  };
  if (name == "five_card_trick") return {five_card_trick(), FunctionSpec::logical_and(2)};
  if (name == "six_card_trick") return {six_card_trick(), FunctionSpec::equality(3)};
  if (name == "equality_first") {
    int n = need_n(2);
    return {equality_first(n), FunctionSpec::equality(n)};
  }
  if (name == "equality_second") {
    int n = need_n(2);
    return {equality_second(n), FunctionSpec::equality(n)};
  }
  if (name == "kcand_equality") {
    int n = need_n(2);
    if (opts.k < 2) throw std::domain_error("'kcand_equality' needs --k >= 2");
    return {k_candidate_equality(n, opts.k), FunctionSpec::equality_mod(n, opts.k)};
  }
  if (name == "add") {
    if (opts.k < 2) throw std::domain_error("'add' needs --k >= 2");
    return {add_mod(opts.k), FunctionSpec::add_mod(opts.k)};
  }
  if (name == "doubly_symmetric" || name == "symmetric") {
    if (opts.g_table.empty()) throw std::domain_error("'" + name + "' needs --g v0,v1,...,vn");
    auto g = parse_csv_longs(opts.g_table);
    int n = static_cast<int>(g.size()) - 1;
    if (opts.n != 0 && opts.n != n)
      throw std::domain_error("--n disagrees with the g-table length");
    FunctionSpec spec = FunctionSpec::from_g_table(g);
    if (name == "doubly_symmetric") return {doubly_symmetric(n, g), std::move(spec)};
    return {symmetric_plus_two(n, g), std::move(spec)};
  }
  throw std::domain_error(
      "unknown protocol '" + name +
      "' (built-ins: five_card_trick, six_card_trick, equality_first, equality_second, "
      "doubly_symmetric, symmetric, kcand_equality, add)");
}

Prior parse_prior(const std::string& text, const InputDomain& domain) {
  if (text.empty() || text == "uniform") return uniform_prior(domain);
  if (text.rfind("point:", 0) == 0) return point_prior(domain, parse_csv_longs(text.substr(6)));
  if (text.rfind("csv:", 0) == 0) {
    auto inputs = domain.all_inputs();
    Prior prior;
    std::stringstream stream(text.substr(4));
    std::string part;
    std::size_t i = 0;
    while (std::getline(stream, part, ',')) {
      auto r = parse_rational(part);
      if (!r) throw std::domain_error("bad rational '" + part + "' in prior");
      if (i >= inputs.size()) throw std::domain_error("too many prior entries");
      prior[inputs[i++]] = *r;
    }
    if (i != inputs.size())
      throw std::domain_error("prior needs exactly " + std::to_string(inputs.size()) +
                              " entries in input order");
    return prior;
  }
  throw std::domain_error("unknown prior '" + text +
                          "' (expected uniform, point:v1,v2,..., or csv:p/q,...)");
}

std::string spaced(const std::string& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(' ');
    out.push_back(row[i]);
  }
  return out;
}

int command_run(const ProtocolOptions& popts, const std::string& input_text,
                std::optional<long> a, std::optional<long> b, std::uint64_t seed, bool peek) {
  Selection sel = select_protocol(popts);
  std::vector<long> input;
  if (!input_text.empty())
    input = parse_csv_longs(input_text);
  else if (a && b)
    input = {*a, *b};
  else
    throw std::domain_error("run needs --input v1,v2,... (or --a/--b for two-input protocols)");

  int step = 0;
  PathOutcome outcome = run_single(sel.protocol, input, seed, [&](const RunStep& s) {
    std::string row = peek ? render_peek(s.state) : render(s.state);
    std::ostringstream line;
    line.width(2);
    line << ++step;
    line << ". " << s.description;
    std::string text = line.str();
    if (text.size() < 40) text += std::string(40 - text.size(), ' ');
    std::cout << text << spaced(row);
    if (s.observation) std::cout << "   observed " << render_observation(*s.observation);
    std::cout << "\n";
  });

  switch (outcome.output.kind) {
    case OutputStmt::Kind::public_value:
      std::cout << "result: public " << outcome.output.value << "\n";
      break;
    case OutputStmt::Kind::committed_bit:
      std::cout << "result: committed output at positions (" << outcome.output.first << ","
                << outcome.output.second << ")";
      if (peek) {
        auto v = decode_bit_at(outcome.final_seq, outcome.output.first, outcome.output.second);
        std::cout << ", decodes to " << (v ? std::to_string(*v) : "invalid");
      }
      std::cout << "\n";
      break;
    case OutputStmt::Kind::committed_row:
      std::cout << "result: committed row at positions " << outcome.output.row_first << ".."
                << outcome.output.row_last << " (" << scheme_name(outcome.output.row_scheme)
                << " scheme)";
      if (peek) {
        auto v = decode_int_at(outcome.final_seq, outcome.output.row_first,
                               outcome.output.row_last - outcome.output.row_first + 1,
                               outcome.output.row_scheme);
        std::cout << ", decodes to " << (v ? std::to_string(*v) : "invalid");
      }
      std::cout << "\n";
      break;
  }
  return 0;
}

struct VerifyFlags {
  std::string format = "text";
  int threads = default_threads();
  std::uint64_t budget = EngineOptions{}.node_budget;
  long sample = 0;
  std::uint64_t seed = 0;
  std::string prior;
};

int command_verify(const ProtocolOptions& popts, const VerifyFlags& flags, bool with_posteriors,
                   bool resources_only) {
  Selection sel = select_protocol(popts);

  if (flags.sample > 0) {
    if (flags.format == "json")
      throw std::domain_error("sampled mode has no canonical JSON report; use text output");
    auto report = sample_paths(sel.protocol, sel.spec, flags.sample, flags.seed);
    std::cout << "protocol: " << describe_protocol(sel.protocol) << "\n";
    std::cout << "sampled paths: " << report.paths_checked << " (" << flags.sample
              << " per input, seed " << flags.seed << ")\n";
    std::cout << "correctness: " << (report.all_correct ? "no counterexample found" : "FAIL")
              << "\n";
    for (const auto& ce : report.counterexamples)
      std::cout << "  counterexample: input " << render_input(ce.input) << " trace " << ce.trace
                << " expected " << ce.expected << " got " << ce.actual << "\n";
    std::cout << "security: not checked (sampling cannot prove trace-distribution equality; "
                 "run without --sample for the exhaustive proof)\n";
    return report.all_correct ? 0 : 2;
  }

  AnalysisOptions options;
  options.engine.node_budget = flags.budget;
  options.threads = flags.threads;

  AnalysisReport analysis;
  std::optional<PosteriorReport> posteriors;
  try {
    analysis = analyze_protocol(sel.protocol, sel.spec, options);
    if (with_posteriors)
      posteriors = kwh_posteriors(sel.protocol, parse_prior(flags.prior, sel.protocol.domain),
                                  options.engine);
  } catch (const budget_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "partial summary: protocol " << describe_protocol(sel.protocol) << ", "
              << sel.protocol.domain.input_count() << " inputs, budget " << flags.budget
              << " statements per input enumeration\n";
    return 3;
  }

  if (resources_only) {
    if (flags.format == "json") {
      ReportJson j;
      j["protocol"] = sel.protocol.name;
      ReportJson params = ReportJson::object();
      for (const auto& [key, value] : sel.protocol.params) params[key] = value;
      j["params"] = params;
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
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "protocol: " << describe_protocol(sel.protocol) << "\n";
      std::cout << "cards: " << analysis.resources.cards << "\n";
      std::cout << "shuffles per path: ";
      if (analysis.resources.uniform)
        std::cout << analysis.resources.shuffles_max;
      else
        std::cout << analysis.resources.shuffles_min << ".." << analysis.resources.shuffles_max
                  << " (not uniform)";
      std::cout << "\n";
      for (const auto& [kind, count] : analysis.resources.breakdown)
        std::cout << "  " << kind << ": " << count << "\n";
    }
    return 0;
  }

  if (flags.format == "json")
    std::cout << report_json_text(sel.protocol, analysis, posteriors ? &*posteriors : nullptr);
  else
    std::cout << report_text(sel.protocol, analysis, posteriors ? &*posteriors : nullptr);
  return (analysis.correctness.pass && analysis.security.pass) ? 0 : 2;
}

int command_check_script(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) {
    std::cerr << "error: cannot read " << path << "\n";
    return 1;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  auto parsed = script::parse(buffer.str());
  if (!parsed.doc) {
    for (const auto& d : parsed.diagnostics)
      std::cerr << path << ":" << script::render_diagnostic(d) << "\n";
    return 2;
  }
  auto elaborated = script::elaborate(*parsed.doc);
  if (!elaborated.protocol) {
    for (const auto& d : elaborated.diagnostics)
      std::cerr << path << ":" << script::render_diagnostic(d) << "\n";
    return 2;
  }
  const Protocol& p = *elaborated.protocol;
  std::cout << "ok: protocol " << describe_protocol(p) << ", " << p.domain.arity()
            << " inputs mod " << (p.domain.moduli.empty() ? 2 : p.domain.moduli.front()) << ", "
            << p.cards << " cards (" << p.clubs << " clubs, " << p.hearts << " hearts)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"card-based protocol engine and exhaustive analyzer"};
  app.require_subcommand(1);

  ProtocolOptions popts;
  VerifyFlags flags;
  std::string input_text;
  std::optional<long> input_a, input_b;
  bool unsafe_peek = false;
  std::string script_arg;

  auto add_protocol_options = [&](CLI::App* cmd) {
    cmd->add_option("protocol", popts.name, "built-in protocol name");
    cmd->add_option("--script", popts.script_path, "path to a .cardp protocol script");
    cmd->add_option("--function", popts.function_name,
                    "target function for scripts: equality, and, parity, gtable=v0,v1,...");
    cmd->add_option("--n", popts.n, "number of inputs");
    cmd->add_option("--k", popts.k, "modulus / number of candidates");
    cmd->add_option("--g", popts.g_table, "symmetric reduction table g(0..n) as v0,v1,...");
  };

  auto* run = app.add_subcommand("run", "execute one seeded run, printing every action");
  add_protocol_options(run);
  run->add_option("--input", input_text, "input assignment v1,v2,...");
  run->add_option("--a", input_a, "first input (two-input protocols)");
  run->add_option("--b", input_b, "second input (two-input protocols)");
  run->add_option("--seed", flags.seed, "random seed for the hidden shuffle choices");
  run->add_flag("--unsafe-peek", unsafe_peek, "also print face-down suits (lowercase)");

  auto add_verify_options = [&](CLI::App* cmd) {
    add_protocol_options(cmd);
    cmd->add_option("--format", flags.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--threads", flags.threads, "worker threads (default CARDPROTO_THREADS)");
    cmd->add_option("--budget", flags.budget, "statement budget per input enumeration");
    auto* seed = cmd->add_option("--seed", flags.seed, "seed for sampled mode");
    cmd->add_option("--sample", flags.sample,
                    "check N sampled paths per input instead of proving (needs --seed)")
        ->needs(seed);
  };

  auto* verify = app.add_subcommand("verify", "exhaustive correctness + security verification");
  add_verify_options(verify);
  auto* analyze = app.add_subcommand("analyze", "verification plus posterior tables");
  add_verify_options(analyze);
  analyze->add_option("--prior", flags.prior,
                      "prior over inputs: uniform, point:v1,v2,..., or csv:p/q,...");
  auto* resources = app.add_subcommand("resources", "card and shuffle counts");
  add_verify_options(resources);
  auto* check = app.add_subcommand("check-script", "parse and elaborate a .cardp script");
  check->add_option("script", script_arg, "path to the script")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return command_run(popts, input_text, input_a, input_b, flags.seed, unsafe_peek);
    if (verify->parsed()) return command_verify(popts, flags, false, false);
    if (analyze->parsed()) return command_verify(popts, flags, true, false);
    if (resources->parsed()) return command_verify(popts, flags, false, true);
    if (check->parsed()) return command_check_script(script_arg);
  } catch (const budget_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
