#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bwmj/harness.hpp"

namespace bwmj::cli {

// Entry point behind the `bwmj` binary. Returns the process exit code;
// diagnostics go to `err` as lines prefixed "error:".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const harness::AlgorithmRegistry& registry = harness::AlgorithmRegistry::builtin());

}  // namespace bwmj::cli
