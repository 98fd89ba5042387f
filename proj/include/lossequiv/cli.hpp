#pragma once

#include <iosfwd>

namespace lossequiv {

/// Entry point shared by the `lossequiv` binary and the CLI tests.
/// Returns 0 on success, 1 on usage or validation failure, 2 on runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lossequiv
