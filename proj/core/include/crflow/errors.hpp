#pragma once

#include <stdexcept>
#include <string>

namespace crflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// nonpositive conformal factor, f(a) <= 0 in the shadow rhs, bad parameters
struct DomainError : Error {
  using Error::Error;
};

// field defined on a different model / wrong length
struct ShapeError : Error {
  using Error::Error;
};

struct IntegrabilityError : Error {
  using Error::Error;
};

// int f u^4 <= 0 after the raw Euler update
struct InfeasibleError : Error {
  using Error::Error;
};

// u <= 0 at some node after a step; caller should halve dt
struct StepSizeError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace crflow
