#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace casclab {

// Error taxonomy. Operations throw subclasses so callers (and the CLI)
// can map failures to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidCoefficient : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

// Structural or sign violation of the coupling hypotheses (A2/A3 class).
class HypothesisViolation : public Error {
 public:
  HypothesisViolation(const std::string& which, const std::string& what)
      : Error("hypothesis-violation(" + which + "): " + what), hypothesis(which) {}
  std::string hypothesis;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class SpaceViolation : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class CannotEvaluate : public Error {
 public:
  using Error::Error;
};

class UndefinedRatio : public Error {
 public:
  using Error::Error;
};

// Open subinterval of (0, L).
struct Interval {
  double a = 0.0;
  double b = 0.0;
  double length() const { return b - a; }
  bool contains(double x) const { return x > a && x < b; }
  bool valid_within(double L) const { return a >= 0.0 && b <= L && a < b; }
};

inline double sqr(double x) { return x * x; }

}  // namespace casclab
