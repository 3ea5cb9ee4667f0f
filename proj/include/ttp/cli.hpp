#pragma once

#include <ostream>

namespace ttp {

// Exit codes: 0 success, 1 usage, 2 input validation, 3 solver failure, 4 I/O.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ttp
