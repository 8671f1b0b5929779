// SPDX-License-Identifier: Apache-2.0
//
// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace ttncirc {

/// Axis/dimension mismatch in a tensor operation.
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// An operation's documented precondition was violated.
struct PreconditionError : std::invalid_argument {
  explicit PreconditionError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Problem size exceeds a hard resource bound (e.g. dense 2^N vectors).
struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid experiment configuration; message names the offending field.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Numerical routine failed to converge or produced non-finite values.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace ttncirc
