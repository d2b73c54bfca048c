#pragma once

#include <stdexcept>
#include <string>

namespace qfan {

/// Malformed or inconsistent input data (CSV rows, timestamps, model files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, SVD non-convergence, diverging training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qfan
