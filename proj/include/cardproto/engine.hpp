#pragma once

// Executes protocol programs: either exhaustively (one path per combination
// of shuffle choices, with exact path probabilities) or as a single seeded
// run. Execution is pure; all state lives on the stack of the walk.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cardproto/protocol.hpp"
#include "cardproto/rational.hpp"

namespace cardproto {

class budget_error : public std::runtime_error {
 public:
  explicit budget_error(std::uint64_t budget)
      : std::runtime_error("enumeration exceeded the node budget of " + std::to_string(budget)) {}
};

enum class ExecError : std::uint8_t {
  perm_size_mismatch,
  shuffle_size_mismatch,
  reveal_face_up,
  hide_face_down,
  branch_without_reveal,
  pattern_length_mismatch,
  unmatched_observation,
  statement_after_branch,
  statement_after_output,
  missing_output,
  bad_output_positions,
  output_face_up,
};

class protocol_error : public std::runtime_error {
 public:
  protocol_error(ExecError code, SourceLoc loc, const std::string& message)
      : std::runtime_error(message), code_(code), loc_(loc) {}

  ExecError code() const { return code_; }
  SourceLoc loc() const { return loc_; }

 private:
  ExecError code_;
  SourceLoc loc_;
};

struct EngineOptions {
  std::uint64_t node_budget = 50'000'000;  // executed statements per enumeration
};

inline std::string trace_key(const std::vector<Observation>& trace, std::size_t upto = SIZE_MAX) {
  std::string out;
  std::size_t n = std::min(upto, trace.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out.push_back(';');
    out += render_observation(trace[i]);
  }
  return out;
}

struct PathOutcome {
  CardSequence final_seq;
  Rational probability{1, 1};
  std::vector<Observation> trace;
  std::vector<int> choices;  // one index per shuffle, in execution order
  int shuffle_count = 0;
  std::array<int, 4> shuffle_breakdown{};  // indexed by ShuffleKind
  OutputStmt output;
};

struct EngineHooks {
  std::function<void(const std::vector<Observation>&, const Rational&)> on_reveal;
  std::function<void(int arm_id)> on_arm;
  std::function<void(const CardSequence&, const ShuffleAction&)> before_shuffle;
};

namespace detail {

// Stable preorder numbering of branch arms, used for coverage reporting.
inline void index_arms(const Program& prog, std::map<const BranchArm*, int>& ids,
                       std::vector<SourceLoc>& locs, int& next) {
  for (const Statement& stmt : prog) {
    if (const auto* branch = std::get_if<BranchStmt>(&stmt.node)) {
      for (const BranchArm& arm : branch->arms) {
        ids[&arm] = next++;
        locs.push_back(stmt.loc);
        index_arms(arm.body, ids, locs, next);
      }
    }
  }
}

struct ExecState {
  CardSequence seq;
  Rational prob{1, 1};
  std::vector<Observation> trace;
  std::vector<int> choices;
  int shuffles = 0;
  std::array<int, 4> breakdown{};
};

class Walker {
 public:
  Walker(const EngineOptions& options, const std::function<void(PathOutcome&&)>& sink,
         const EngineHooks* hooks)
      : options_(options), sink_(sink), hooks_(hooks) {}

  void walk(const Program& prog, std::size_t idx, ExecState state) {
    for (std::size_t i = idx; i < prog.size(); ++i) {
      if (++executed_ > options_.node_budget) throw budget_error(options_.node_budget);
      const Statement& stmt = prog[i];
      if (const auto* perm = std::get_if<PermStmt>(&stmt.node)) {
        if (perm->perm.size() != state.seq.size())
          throw protocol_error(ExecError::perm_size_mismatch, stmt.loc,
                               "permutation does not match the row length");
        state.seq = apply_perm(state.seq, perm->perm);
      } else if (const auto* shuffle = std::get_if<ShuffleStmt>(&stmt.node)) {
        const ShuffleAction& action = shuffle->action;
        if (action.perms.front().size() != state.seq.size())
          throw protocol_error(ExecError::shuffle_size_mismatch, stmt.loc,
                               "shuffle does not match the row length");
        if (hooks_ && hooks_->before_shuffle) hooks_->before_shuffle(state.seq, action);
        Rational p = action.choice_probability();
        for (int c = 0; c < action.choices(); ++c) {
          ExecState next = state;
          next.seq = apply_perm(state.seq, action.perms[static_cast<std::size_t>(c)]);
          next.prob *= p;
          next.choices.push_back(c);
          next.shuffles += 1;
          next.breakdown[static_cast<std::size_t>(action.kind)] += 1;
          walk(prog, i + 1, std::move(next));
        }
        return;
      } else if (const auto* reveal = std::get_if<RevealStmt>(&stmt.node)) {
        for (int pos : reveal->positions)
          if (state.seq.at(pos).face_up)
            throw protocol_error(ExecError::reveal_face_up, stmt.loc,
                                 "reveal targets a face-up card at position " + std::to_string(pos));
        auto [seq, obs] = state.seq.turn_over(reveal->positions);
        state.seq = std::move(seq);
        state.trace.push_back(std::move(obs));
        if (hooks_ && hooks_->on_reveal) hooks_->on_reveal(state.trace, state.prob);
      } else if (const auto* hide = std::get_if<HideStmt>(&stmt.node)) {
        for (int pos : hide->positions)
          if (!state.seq.at(pos).face_up)
            throw protocol_error(ExecError::hide_face_down, stmt.loc,
                                 "hide targets a face-down card at position " + std::to_string(pos));
        state.seq = state.seq.turn_over(hide->positions).first;
      } else if (const auto* branch = std::get_if<BranchStmt>(&stmt.node)) {
        if (state.trace.empty())
          throw protocol_error(ExecError::branch_without_reveal, stmt.loc,
                               "branch without a preceding reveal");
        if (i + 1 != prog.size())
          throw protocol_error(ExecError::statement_after_branch, stmt.loc,
                               "statements after a branch group");
        const std::string& suits = state.trace.back().suits;
        for (const BranchArm& arm : branch->arms) {
          if (arm.pattern.size() != suits.size())
            throw protocol_error(ExecError::pattern_length_mismatch, stmt.loc,
                                 "branch pattern '" + arm.pattern +
                                     "' does not match the observation width");
          if (arm.pattern == suits) {
            if (hooks_ && hooks_->on_arm && arm_ids_) hooks_->on_arm(arm_ids_->at(&arm));
            walk(arm.body, 0, std::move(state));
            return;
          }
        }
        throw protocol_error(ExecError::unmatched_observation, stmt.loc,
                             "no branch arm matches observation " + suits);
      } else if (const auto* output = std::get_if<OutputStmt>(&stmt.node)) {
        if (i + 1 != prog.size())
          throw protocol_error(ExecError::statement_after_output, stmt.loc,
                               "statements after an output");
        check_output(*output, state.seq, stmt.loc);
        PathOutcome outcome;
        outcome.final_seq = std::move(state.seq);
        outcome.probability = state.prob;
        outcome.trace = std::move(state.trace);
        outcome.choices = std::move(state.choices);
        outcome.shuffle_count = state.shuffles;
        outcome.shuffle_breakdown = state.breakdown;
        outcome.output = *output;
        sink_(std::move(outcome));
        return;
      }
    }
    throw protocol_error(ExecError::missing_output, SourceLoc{},
                         "protocol path ended without an output");
  }

  void set_arm_ids(const std::map<const BranchArm*, int>* ids) { arm_ids_ = ids; }

 private:
  static void check_output(const OutputStmt& output, const CardSequence& seq, SourceLoc loc) {
    auto check_pos = [&](int pos) {
      if (pos < 1 || pos > seq.size())
        throw protocol_error(ExecError::bad_output_positions, loc, "output position out of range");
      if (seq.at(pos).face_up)
        throw protocol_error(ExecError::output_face_up, loc,
                             "committed output references a face-up card");
    };
    if (output.kind == OutputStmt::Kind::committed_bit) {
      check_pos(output.first);
      check_pos(output.second);
    } else if (output.kind == OutputStmt::Kind::committed_row) {
      if (output.row_first > output.row_last)
        throw protocol_error(ExecError::bad_output_positions, loc, "empty output row");
      for (int p = output.row_first; p <= output.row_last; ++p) check_pos(p);
    }
  }

  const EngineOptions& options_;
  const std::function<void(PathOutcome&&)>& sink_;
  const EngineHooks* hooks_;
  const std::map<const BranchArm*, int>* arm_ids_ = nullptr;
  std::uint64_t executed_ = 0;
};

}  // namespace detail

// Runs every combination of shuffle choices for one input. Exactly one
// outcome per choice vector; probabilities multiply to 1 over the whole set.
inline void enumerate_paths(const Protocol& protocol, const std::vector<long>& input,
                            const EngineOptions& options,
                            const std::function<void(PathOutcome&&)>& sink,
                            const EngineHooks* hooks = nullptr,
                            const std::map<const BranchArm*, int>* arm_ids = nullptr) {
  if (!protocol.domain.contains(input))
    throw std::domain_error("input " + render_input(input) + " outside the protocol domain");
  detail::ExecState state;
  state.seq = protocol.layout(input);
  detail::Walker walker(options, sink, hooks);
  walker.set_arm_ids(arm_ids);
  walker.walk(protocol.body, 0, std::move(state));
}

struct RunStep {
  std::string description;
  CardSequence state;
  std::optional<Observation> observation;
};

// One seeded execution; shuffle choices are drawn from the seed. The step
// callback sees every action with the state after it.
inline PathOutcome run_single(const Protocol& protocol, const std::vector<long>& input,
                              std::uint64_t seed,
                              const std::function<void(const RunStep&)>& on_step = {}) {
  if (!protocol.domain.contains(input))
    throw std::domain_error("input " + render_input(input) + " outside the protocol domain");
  std::mt19937_64 rng(seed);
  detail::ExecState state;
  state.seq = protocol.layout(input);
  if (on_step) on_step({"layout", state.seq, std::nullopt});

  const Program* prog = &protocol.body;
  std::size_t i = 0;
  while (true) {
    if (i >= prog->size())
      throw protocol_error(ExecError::missing_output, SourceLoc{},
                           "protocol path ended without an output");
    const Statement& stmt = (*prog)[i];
    if (const auto* perm = std::get_if<PermStmt>(&stmt.node)) {
      state.seq = apply_perm(state.seq, perm->perm);
      if (on_step) on_step({"perm " + perm->perm.to_cycles(), state.seq, std::nullopt});
    } else if (const auto* shuffle = std::get_if<ShuffleStmt>(&stmt.node)) {
      const ShuffleAction& action = shuffle->action;
      int c = static_cast<int>(rng() % static_cast<std::uint64_t>(action.choices()));
      state.seq = apply_perm(state.seq, action.perms[static_cast<std::size_t>(c)]);
      state.prob *= action.choice_probability();
      state.choices.push_back(c);
      state.shuffles += 1;
      state.breakdown[static_cast<std::size_t>(action.kind)] += 1;
      if (on_step)
        on_step({std::string(shuffle_kind_name(action.kind)) + " (" +
                     std::to_string(action.choices()) + " choices, hidden)",
                 state.seq, std::nullopt});
    } else if (const auto* reveal = std::get_if<RevealStmt>(&stmt.node)) {
      auto [seq, obs] = state.seq.turn_over(reveal->positions);
      state.seq = std::move(seq);
      state.trace.push_back(obs);
      if (on_step) on_step({"reveal", state.seq, obs});
    } else if (const auto* hide = std::get_if<HideStmt>(&stmt.node)) {
      state.seq = state.seq.turn_over(hide->positions).first;
      if (on_step) {
        std::string desc = "hide";
        for (std::size_t p = 0; p < hide->positions.size(); ++p)
          desc += (p ? "," : " ") + std::to_string(hide->positions[p]);
        on_step({desc, state.seq, std::nullopt});
      }
    } else if (const auto* branch = std::get_if<BranchStmt>(&stmt.node)) {
      const std::string& suits = state.trace.back().suits;
      const BranchArm* taken = nullptr;
      for (const BranchArm& arm : branch->arms)
        if (arm.pattern == suits) {
          taken = &arm;
          break;
        }
      if (!taken)
        throw protocol_error(ExecError::unmatched_observation, stmt.loc,
                             "no branch arm matches observation " + suits);
      if (on_step) on_step({"branch " + taken->pattern, state.seq, std::nullopt});
      prog = &taken->body;
      i = 0;
      continue;
    } else if (const auto* output = std::get_if<OutputStmt>(&stmt.node)) {
      PathOutcome outcome;
      outcome.final_seq = state.seq;
      outcome.probability = state.prob;
      outcome.trace = state.trace;
      outcome.choices = state.choices;
      outcome.shuffle_count = state.shuffles;
      outcome.shuffle_breakdown = state.breakdown;
      outcome.output = *output;
      return outcome;
    }
    ++i;
  }
}

// Structural checks that need no execution: branches follow reveals, arms are
// disjoint and nothing trails a branch group or an output. Throws
// protocol_error on the first violation.
inline void validate_structure(const Program& prog, bool after_reveal = false) {
  for (std::size_t i = 0; i < prog.size(); ++i) {
    const Statement& stmt = prog[i];
    if (const auto* branch = std::get_if<BranchStmt>(&stmt.node)) {
      if (!after_reveal)
        throw protocol_error(ExecError::branch_without_reveal, stmt.loc,
                             "branch without a preceding reveal");
      if (i + 1 != prog.size())
        throw protocol_error(ExecError::statement_after_branch, stmt.loc,
                             "statements after a branch group");
      for (std::size_t a = 0; a < branch->arms.size(); ++a)
        for (std::size_t b = a + 1; b < branch->arms.size(); ++b)
          if (branch->arms[a].pattern == branch->arms[b].pattern)
            throw protocol_error(ExecError::unmatched_observation, stmt.loc,
                                 "duplicate branch pattern " + branch->arms[a].pattern);
      for (const BranchArm& arm : branch->arms) validate_structure(arm.body, false);
      return;
    }
    if (std::holds_alternative<OutputStmt>(stmt.node)) {
      if (i + 1 != prog.size())
        throw protocol_error(ExecError::statement_after_output, stmt.loc,
                             "statements after an output");
      return;
    }
    after_reveal = std::holds_alternative<RevealStmt>(stmt.node);
  }
}

}  // namespace cardproto
