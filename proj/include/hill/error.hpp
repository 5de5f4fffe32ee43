#pragma once

#include <stdexcept>
#include <string>

namespace hill {

/// Raised on any contract violation in the library (bad input, broken
/// precondition, malformed file). The CLI turns it into a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hill
