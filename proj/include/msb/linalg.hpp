#pragma once

#include <array>
#include <complex>

#include "msb/common.hpp"

namespace msb {

/// Dense real 2x2 matrix, row-major.
struct Mat2 {
  double m11 = 0.0;
  double m12 = 0.0;
  double m21 = 0.0;
  double m22 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(double a, double b) { return {a, 0.0, 0.0, b}; }

  double trace() const { return m11 + m22; }
  double det() const { return m11 * m22 - m12 * m21; }
  /// (m11 - m22)^2 + 4 m12 m21; the discriminant of the characteristic polynomial.
  double discriminant() const { return (m11 - m22) * (m11 - m22) + 4.0 * m12 * m21; }
  Mat2 transpose() const { return {m11, m21, m12, m22}; }

  friend bool operator==(const Mat2&, const Mat2&) = default;
};

Mat2 operator+(const Mat2& a, const Mat2& b);
Mat2 operator-(const Mat2& a, const Mat2& b);
Mat2 operator*(double s, const Mat2& a);
Mat2 operator*(const Mat2& a, const Mat2& b);
Vec2 operator*(const Mat2& a, Vec2 v);

double max_abs(const Mat2& a);

/// Spectral norm sup_{|v|=1} |A v|.
double operator_norm(const Mat2& a);

/// Eigenvalues, first one with the larger real part: (tr +- sqrt(disc)) / 2.
std::array<std::complex<double>, 2> eigenvalues(const Mat2& a);

/// Inverse; throws NumericError when singular.
Mat2 inverse(const Mat2& a);

/// exp(t H). Closed 2x2 spectral form when |disc(tH)| > 1e-10, otherwise
/// scaling and squaring of the order-13 Taylor polynomial.
Mat2 matrix_exponential(const Mat2& h, double t);

/// Scaling-and-squaring branch, exposed for testing both routes.
Mat2 matrix_exponential_series(const Mat2& h, double t);

/// int_0^t exp(s H) ds, as H^{-1}(exp(tH) - I) when H is well conditioned,
/// composite Simpson on exp(sH) otherwise.
Mat2 integrated_exponential(const Mat2& h, double t);

}  // namespace msb
