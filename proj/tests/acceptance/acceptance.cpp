// Runs the acceptance battery twice with seed 1 and prints one line per
// criterion. A criterion passes when its verdicts pass and it finishes within
// its one-core budget; criterion 12 compares the two suite reports byte for byte.

#include <cstdio>
#include <cstdlib>

#include "potlab/cli/suite.hpp"

using namespace potlab::cli;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  bool all = true;

  const SuiteResult first = run_suite(seed);
  for (const auto& c : first.criteria) {
    const bool in_budget = c.seconds <= c.budget_seconds;
    const bool pass = c.pass && in_budget;
    all = all && pass;
    std::printf("criterion %2d %s  %s  [%.1f s / %.0f s]  %s%s\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str(),
                c.seconds, c.budget_seconds, c.summary.c_str(), in_budget ? "" : "  (over budget)");
    std::fflush(stdout);
  }

  const SuiteResult second = run_suite(seed);
  const bool same = first.report == second.report;
  all = all && same;
  std::printf("criterion 12 %s  reproducible suite report  [%zu bytes]  %s\n", same ? "PASS" : "FAIL",
              first.report.size(), same ? "byte-identical on repeat" : "reports differ");
  return all ? 0 : 1;
}
