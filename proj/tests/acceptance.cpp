// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances and scales live in verify.cpp next to the suites.

#include <cstdio>

#include "vomc/verify.hpp"

int main() {
  const auto results = vomc::verify::run_acceptance();
  std::fputs(vomc::verify::format_report(results).c_str(), stdout);
  return vomc::verify::all_passed(results) ? 0 : 1;
}
