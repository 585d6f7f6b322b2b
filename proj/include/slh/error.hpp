#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slh {

// Base of everything the library throws. The two direct subclasses split
// failures into bad input (user-correctable) and numerical failure; the CLI
// maps them onto exit codes 2 and 1 respectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class UnknownMode : public InputError {
 public:
  explicit UnknownMode(const std::string& name)
      : InputError("unknown mode '" + name + "'") {}
};

class RegistryMismatch : public InputError {
 public:
  RegistryMismatch() : InputError("operands use different mode registries") {}
};

class PortMismatch : public InputError {
 public:
  PortMismatch(std::size_t downstream, std::size_t upstream)
      : InputError("series product needs equal port counts (downstream " +
                   std::to_string(downstream) + ", upstream " +
                   std::to_string(upstream) + ")") {}
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

// A triple that falls outside the linear (quadratic H, affine L, scalar S)
// regime handled by lowering and coherent output evaluation.
class NonlinearError : public InputError {
 public:
  using InputError::InputError;
};

class SingularDrift : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace slh
