#pragma once

namespace camo {

// Full command-line front end; returns the process exit status.
// 0 success, 2 usage/parse error, 3 unreadable or invalid file,
// 4 numeric or domain failure.
int run_cli(int argc, const char* const* argv);

}  // namespace camo
