#pragma once

#include <stdexcept>
#include <string>

namespace qspa {

/// Raised on any contract violation: bad dimensions, non-unitary operators,
/// unnormalized states, zero-probability forced branches, malformed files.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qspa
