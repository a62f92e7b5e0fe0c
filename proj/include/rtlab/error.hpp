#pragma once

#include <stdexcept>
#include <string>

namespace rtlab {

/// Base class for every failure raised by the library. Messages are meant to
/// be shown to the user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rtlab
