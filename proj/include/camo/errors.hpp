#pragma once

#include <stdexcept>
#include <string>

namespace camo {

// Unreadable, unparsable, or unwritable files. The CLI maps this to its own
// exit status, distinct from numeric failures.
struct FileError : std::runtime_error {
  explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace camo
