#pragma once

#include <string>
#include <vector>

namespace cggm {

// Runs the command-line tool on args given in natural order, without the
// program name. Returns the process exit status.
int cli_run(const std::vector<std::string>& args);

}  // namespace cggm
