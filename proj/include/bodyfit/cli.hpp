#pragma once

#include <string>
#include <vector>

namespace bodyfit {

/// Entry point of the `bodyfit` tool. Returns the process exit code: 0 on
/// success, 1 after a failure (one `error: <kind>: <message>` line on
/// stderr), 2 for usage errors (unknown subcommand, bad option or config key).
int cli_main(const std::vector<std::string>& args);

}  // namespace bodyfit
