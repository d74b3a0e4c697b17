#pragma once

#include <stdexcept>
#include <string>

namespace qbc {

/// Two sequences that must describe the same photons have different lengths,
/// or an index falls outside the session.
class SizeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace qbc
