#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace msb {

/// Pair of reals: Laplace arguments, flow values, moment vectors.
struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }
inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm(Vec2 a) { return std::hypot(a.x1, a.x2); }
inline double max_abs(Vec2 a) { return std::fmax(std::fabs(a.x1), std::fabs(a.x2)); }

/// A point of the state space R+ x N.
struct MixedState {
  double y1 = 0.0;
  std::int64_t y2 = 0;

  friend bool operator==(const MixedState&, const MixedState&) = default;

  Vec2 as_vec() const { return {y1, static_cast<double>(y2)}; }
  bool valid() const { return std::isfinite(y1) && y1 >= 0.0 && y2 >= 0; }
};

inline MixedState operator+(MixedState a, MixedState b) { return {a.y1 + b.y1, a.y2 + b.y2}; }

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Negative Laplace argument or similar out-of-domain input.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Integrator blow-up, nonfinite evaluation, internal consistency failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation called outside its hypotheses (e.g. no stationary law).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed parameters, configs or files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter regime the implemented formulas do not cover.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_nonneg(Vec2 lambda, const char* what) {
  if (!(lambda.x1 >= 0.0) || !(lambda.x2 >= 0.0)) {
    throw DomainError(std::string(what) + ": lambda must be componentwise >= 0");
  }
}

}  // namespace msb
