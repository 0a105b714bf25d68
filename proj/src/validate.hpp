#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ps {

// One acceptance criterion: a physical claim the toolkit must reproduce,
// checked at a fixed tolerance that is pinned in validate.cpp, not here.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool ran = false;     // false when skipped (quick mode)
  bool passed = false;  // meaningful only when ran
  std::string detail;   // measured value, target and tolerance, one line
  double seconds = 0.0;
};

struct ValidationReport {
  std::vector<CriterionResult> results;

  // true when every criterion that ran passed (and at least one ran)
  bool all_passed() const;
  std::string to_text() const;
};

struct AcceptanceOptions {
  uint64_t seed = 0x5EEDBA5EULL;
  // quick keeps only the fast deterministic smoke checks (exact one-step
  // sampler, closed-form sieve anchors, pure-state tracking): no ensembles,
  // well under 10 s, and green on a healthy build. The truncation-floor
  // check and the ensemble criteria run only in the full battery.
  bool quick = false;
  int threads = 1;
};

// Runs the full acceptance battery. Criteria never abort the battery: a
// thrown error is recorded as a failure of that criterion and the rest run.
ValidationReport run_acceptance(const AcceptanceOptions& opt = {});

}  // namespace ps
