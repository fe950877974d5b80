#pragma once

#include "collapse/cli/config.hpp"
#include "collapse/error.hpp"

#include <iosfwd>

namespace collapse::cli {

/// Runs one experiment. The result goes to config.output (stdout when empty)
/// and, for file output, a manifest to config.output + ".manifest.json".
/// Returns 0 on success, 1 on numerical failure, 2 on a usage error.
int execute(RunConfig config, std::ostream& out, std::ostream& err);

/// Exit status for an error code.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace collapse::cli
