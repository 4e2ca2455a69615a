#pragma once

#include <iosfwd>

namespace rowcalc {

// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitData = 2,
    kExitIo = 3,
};

// The whole command-line tool; `out` receives results, `err` diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rowcalc
