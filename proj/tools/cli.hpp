#pragma once

#include <istream>
#include <ostream>

namespace spectral_lab::cli {

// Exit codes: 0 success, 1 unexpected failure, 2 bad input or configuration
// (including missing files), 3 numerical failure or size cap.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace spectral_lab::cli
