#pragma once

// Embedded oracle checks run by `cdc_incent selftest`.

#include <iosfwd>
#include <string>
#include <vector>

namespace cdc::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_all();

/// One "PASS name: detail" / "FAIL name: detail" line per check. Returns 0
/// when everything passed, 2 otherwise.
int report(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace cdc::selftest
