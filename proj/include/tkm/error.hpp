#pragma once

#include <stdexcept>
#include <string>

namespace tkm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two elements from different spaces were combined.
class SpaceMismatch : public Error {
 public:
  using Error::Error;
};

// An operator was applied outside the space it is defined on, or an argument
// is out of its admissible range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A value that must be finite was NaN or infinite.
class NonFiniteValue : public DomainError {
 public:
  using DomainError::DomainError;
};

// Parameter sequences fail the hypotheses of the convergence theorems.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

// Iterates left the divergence guard or became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tkm
