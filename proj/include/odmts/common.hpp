#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace odmts {

// Node positions follow the array order of the instance file.
using NodeIndex = std::size_t;
using CommodityIndex = std::size_t;

inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();

// Absolute tolerance for comparisons of times (minutes).
inline constexpr double kTimeEps = 1e-9;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (bad JSON, missing or mistyped field).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Precondition of an operation is violated by its arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

inline bool leq_eps(double a, double b, double eps = kTimeEps) {
  return a <= b + eps;
}

inline bool near(double a, double b, double eps = kTimeEps) {
  return std::fabs(a - b) <= eps;
}

}  // namespace odmts
