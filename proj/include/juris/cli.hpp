#pragma once

#include <string>
#include <vector>

namespace juris {

// Dispatch one CLI invocation; args excludes the program name. Returns the
// process exit code: 0 success, 1 data error (message on stderr), 2 usage
// error (usage text on stderr).
int run_command(const std::vector<std::string>& args);

}  // namespace juris
