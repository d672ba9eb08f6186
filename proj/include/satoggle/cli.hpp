// cli.hpp - sa-toggle command line (synth / analyze / simulate / compare)
#pragma once

#include <ostream>

namespace satoggle {

enum ExitCode : int {
  kExitOk = 0,
  kExitBadArguments = 2,
  kExitWorkloadIo = 3,
  kExitInvariant = 4,
};

// Entry point shared by the sa-toggle binary and the integration tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace satoggle
