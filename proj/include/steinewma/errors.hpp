#pragma once

#include <stdexcept>
#include <string>

namespace steinewma {

// Parameter outside the domain of a distribution, chart, or process.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested (mean, dispersion) pair or model cannot be realized.
class FeasibilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Observed data incompatible with a chart (negative count, count above n, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration document.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace steinewma
