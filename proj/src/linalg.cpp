#include "msb/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace msb {

Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
}

Mat2 operator*(double s, const Mat2& a) { return {s * a.m11, s * a.m12, s * a.m21, s * a.m22}; }

Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
          a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

Vec2 operator*(const Mat2& a, Vec2 v) {
  return {a.m11 * v.x1 + a.m12 * v.x2, a.m21 * v.x1 + a.m22 * v.x2};
}

double max_abs(const Mat2& a) {
  return std::max({std::fabs(a.m11), std::fabs(a.m12), std::fabs(a.m21), std::fabs(a.m22)});
}

double operator_norm(const Mat2& a) {
  // sigma_max^2 + sigma_min^2 = |A|_F^2, sigma_max * sigma_min = |det A|
  const double fro2 = a.m11 * a.m11 + a.m12 * a.m12 + a.m21 * a.m21 + a.m22 * a.m22;
  const double d = std::fabs(a.det());
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * d * d);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

std::array<std::complex<double>, 2> eigenvalues(const Mat2& a) {
  const double half_tr = 0.5 * a.trace();
  const double disc = a.discriminant();
  if (disc >= 0.0) {
    const double q = 0.5 * std::sqrt(disc);
    return {std::complex<double>(half_tr + q, 0.0), std::complex<double>(half_tr - q, 0.0)};
  }
  const double q = 0.5 * std::sqrt(-disc);
  return {std::complex<double>(half_tr, q), std::complex<double>(half_tr, -q)};
}

Mat2 inverse(const Mat2& a) {
  const double d = a.det();
  if (d == 0.0 || !std::isfinite(d)) throw NumericError("inverse: singular 2x2 matrix");
  return {a.m22 / d, -a.m12 / d, -a.m21 / d, a.m11 / d};
}

Mat2 matrix_exponential_series(const Mat2& h, double t) {
  Mat2 a = t * h;
  int squarings = 0;
  const double nrm = max_abs(a) * 2.0;
  if (nrm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    a = std::ldexp(1.0, -squarings) * a;
  }
  // Horner evaluation of sum_{k<=13} A^k / k!
  Mat2 result = Mat2::identity();
  for (int k = 13; k >= 1; --k) {
    result = Mat2::identity() + (1.0 / k) * (a * result);
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

Mat2 matrix_exponential(const Mat2& h, double t) {
  const Mat2 a = t * h;
  const double disc = a.discriminant();
  if (std::fabs(disc) <= 1e-10) return matrix_exponential_series(h, t);

  // exp(A) = e^s [ f(q) I + g(q) (A - s I) ], s = tr/2, q = sqrt(|disc|)/2
  const double s = 0.5 * a.trace();
  const double q = 0.5 * std::sqrt(std::fabs(disc));
  double f = 0.0;
  double g = 0.0;
  if (disc > 0.0) {
    f = std::cosh(q);
    g = std::sinh(q) / q;
  } else {
    f = std::cos(q);
    g = std::sin(q) / q;
  }
  const Mat2 shifted = a - s * Mat2::identity();
  return std::exp(s) * (f * Mat2::identity() + g * shifted);
}

Mat2 integrated_exponential(const Mat2& h, double t) {
  if (t == 0.0) return {};
  const double d = h.det();
  const double scale = std::max(1.0, max_abs(h) * max_abs(h));
  if (std::fabs(d) > 1e-8 * scale) {
    return inverse(h) * (matrix_exponential(h, t) - Mat2::identity());
  }
  // Simpson on an even grid; the integrand is entire so 2000 panels is ample.
  const int panels = 2000;
  const double dh = t / panels;
  Mat2 acc = matrix_exponential(h, 0.0) + matrix_exponential(h, t);
  for (int i = 1; i < panels; ++i) {
    acc = acc + ((i % 2 == 1) ? 4.0 : 2.0) * matrix_exponential(h, i * dh);
  }
  return (dh / 3.0) * acc;
}

}  // namespace msb
