#pragma once

#include <string>
#include <vector>

namespace summaug {

// argv-style arguments without the program name. Returns the process exit
// code: 0 on success, 1 on usage errors, 2 on runtime failures.
int run_cli(const std::vector<std::string>& args);

}  // namespace summaug
