#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace geoaug::cli {

/// Runs one `geoaug` invocation. `args` excludes the program name. Returns
/// the process exit code: 0 on success, otherwise the ErrorKind value of
/// the failure (command-line parse errors count as configuration errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geoaug::cli
