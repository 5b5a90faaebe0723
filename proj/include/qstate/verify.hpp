#pragma once

// The acceptance suite: ten numbered checks, each reducing to a pass/fail
// line with the measured numbers attached.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace qstate {

struct VerifyOptions {
  int level = 6;          // main mesh level
  int oracle_level = 5;   // mesh level of the brute-force comparison
  int sample_level = 3;   // initial points of the measurement runs
  std::uint64_t seed = 20240517;
  std::vector<int> only;  // criterion ids to run; empty runs all

  void validate() const;
};

struct CheckResult {
  int id = 0;
  std::string claim;   // short name of the property checked
  bool passed = false;
  std::string detail;  // measured numbers
  double seconds = 0.0;
};

// Runs the selected checks in order; `on_result` (if set) is called as each
// one finishes. Exceptions inside a check turn into a failed result.
std::vector<CheckResult> run_verify_suite(
    const VerifyOptions& options,
    const std::function<void(const CheckResult&)>& on_result = {});

// "PASS  3  bracket inequality ... (12.3 s)  detail"
std::string format_result(const CheckResult& r);

}  // namespace qstate
