#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pefcert::cli {

/// Runs one pefcert command line (args exclude the program name).
/// Returns 0 on success, 1 on validation errors, 2 on numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pefcert::cli
