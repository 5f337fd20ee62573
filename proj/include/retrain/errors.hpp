#pragma once

#include <stdexcept>
#include <string>

namespace retrain {

// Invalid caller-supplied argument (bad alpha, empty grid, length mismatch).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or missing input data (absent pe entry, dimension mismatch, bad CSV).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called in a state that does not allow it (empty info set, exhausted env).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Too few observations to fit a model.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace retrain
