#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cdc::cli {

/// Runs one cdc_incent invocation. Exit codes: 0 success, 1 usage or
/// configuration error, 2 runtime failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cdc::cli
