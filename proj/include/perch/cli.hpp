#pragma once

#include <iosfwd>

namespace perch {

/// Runs the `perch` command line. Returns 0 on success, 2 on usage errors and
/// 1 on any other failure (diagnostic written to `err`).
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace perch
