// Library walkthrough: build the five-card trick, replay one seeded
// execution step by step, then verify it exhaustively.

#include <iostream>

#include "cardproto/analyzer.hpp"
#include "cardproto/builtins.hpp"

int main() {
  using namespace cardproto;

  Protocol trick = five_card_trick();
  std::cout << "deck: " << trick.cards << " cards (" << trick.clubs << " clubs, " << trick.hearts
            << " hearts)\n\n";

  std::cout << "one run with inputs p=1, q=0:\n";
  PathOutcome outcome = run_single(trick, {1, 0}, /*seed=*/1, [](const RunStep& step) {
    std::cout << "  " << step.description << ": " << render(step.state);
    if (step.observation) std::cout << "  -> " << step.observation->suits;
    std::cout << "\n";
  });
  std::cout << "  result: " << outcome.output.value << "\n\n";

  FunctionSpec conjunction = FunctionSpec::logical_and(2);
  AnalysisReport report = analyze_protocol(trick, conjunction);
  std::cout << "exhaustive check over all inputs and cut choices:\n";
  std::cout << "  correctness: " << (report.correctness.pass ? "pass" : "fail") << " ("
            << report.correctness.paths_checked << " paths)\n";
  std::cout << "  security:    " << (report.security.pass ? "pass" : "fail") << "\n";
  return report.correctness.pass && report.security.pass ? 0 : 1;
}
