#pragma once
// Cross-check matrix: every headline quantity recomputed through independent
// routes and compared at fixed tolerances.  The fast level runs the
// deterministic closed-form and series checks; the full level adds the
// Monte Carlo, kernel-operator, and Fredholm checks.
//
// Each check reports one normalized line: observed metric, the bound it was
// held to, and wall time against the check's own time budget.  A check fails
// if its metric exceeds the bound, its runtime exceeds the budget, or it
// throws.
//
// Setting the environment variable CUEMOM_VERIFY_FAULT perturbs the first
// check's reference values, forcing a failure; it exists so the failure exit
// path can be exercised end to end.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace cuemom::verify {

enum class Level { fast, full };

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;     // worst normalized metric over the check's parts
  double bound = 0.0;        // the tolerance the metric was held to
  double seconds = 0.0;      // wall time
  double time_budget = 0.0;  // seconds allowed
  std::string detail;        // one-line specifics
};

// Runs the matrix in a fixed order.  The seed feeds every stochastic check
// through an independent derived stream, so reruns with the same seed give
// identical results.
std::vector<CheckResult> run_checks(Level level, std::uint64_t seed);

bool all_passed(const std::vector<CheckResult>& results);

// One line per check: [PASS]/[FAIL], name, metric vs bound, time.
void print_report(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace cuemom::verify
