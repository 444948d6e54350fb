#pragma once

#include <iostream>

namespace xtomo::cli {

/// Runs one verb. Exit codes: 0 success, 1 runtime error, 2 usage error.
/// Diagnostics go to `err`; written data paths are echoed to `out`.
int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace xtomo::cli
