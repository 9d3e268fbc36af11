#pragma once

#include <stdexcept>
#include <string>

namespace btq {

/// Precondition violated by the caller (bad size, index, unknown name...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation left the numeric domain: non-finite values, a quadrature
/// rule that is too coarse or did not stabilize, negative radicands.
class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace btq
