#pragma once

// Acceptance criteria 1-9 as runnable checks. `vmrd selftest` runs the fast
// subset; the acceptance test binary runs all of them.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vmrd::tools {

/// Reference values the checks compare against. Tests corrupt one of these
/// to make sure the suite can fail.
struct ReferenceValues {
  double example1_rate = 0.342282;        // feedforward example, p = q = 0.25, D = 0.1
  double repeat_request_rate = 0.007262;  // epsilon = 0.5, D = 0.1, per informative symbol
  double h2_half = 1.0;
  double h2_quarter = 0.811278;
  double h2_04 = 0.970951;
};

struct AcceptanceOptions {
  bool fast_only = false;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  ReferenceValues reference;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool fast = false;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

/// One line per criterion, then a summary line.
void print_report(std::ostream& out, const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace vmrd::tools
