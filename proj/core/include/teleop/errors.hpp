#pragma once

#include <stdexcept>

namespace teleop {

/// A component could not start (port in use, bad bind address, ...).
class StartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace teleop
