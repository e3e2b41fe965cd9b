#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rgm::cli {

enum ExitCode { ok = 0, usage = 1, data = 2, verification = 3 };

/// Runs one command line. argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace rgm::cli
