// Runs the ten acceptance checks on the level-6 mesh and prints one line per
// check. Exit status 1 if any check fails.

#include <iostream>

#include "qstate/verify.hpp"

int main() {
  qstate::VerifyOptions options;
  int failed = 0;
  qstate::run_verify_suite(options, [&](const qstate::CheckResult& r) {
    std::cout << qstate::format_result(r) << std::endl;
    if (!r.passed) ++failed;
  });
  std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
