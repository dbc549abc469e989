#pragma once

// Cross-module verification suites.  The acceptance set pins every criterion
// (tolerances included) in code; `quick` runs reduced-scale versions of the
// fast suites for CI-style checks.

#include <string>
#include <vector>

namespace vomc::verify {

enum class Level { quick, full };

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// The nine acceptance criteria at their stated scales and tolerances.
std::vector<SuiteResult> run_acceptance();

// quick: reduced-scale oracle/golden suites (< 60 s);
// full: the acceptance set plus informational diagnostics.
std::vector<SuiteResult> run(Level level);

bool all_passed(const std::vector<SuiteResult>& results);
std::string format_report(const std::vector<SuiteResult>& results);

}  // namespace vomc::verify
