#pragma once

#include <iosfwd>

namespace mppctl {

/// Command-line entry point. Returns 0 on success, 1 when a verified identity or
/// inequality fails, 2 on usage or configuration errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mppctl
