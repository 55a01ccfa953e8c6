#pragma once

#include <ostream>

namespace fewsim::gateway {

/// fewsim command line. Returns 0 on success, 2 on usage errors and 1 on runtime failures.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace fewsim::gateway
