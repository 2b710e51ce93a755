#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "msb/common.hpp"

namespace msb {

/// Uniform grid on [0, horizon] with spacing <= step.
struct UniformGrid {
  std::size_t intervals = 0;
  double h = 0.0;

  static UniformGrid cover(double horizon, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("step must be > 0");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ValidationError("horizon must be >= 0");
    UniformGrid g;
    if (horizon == 0.0) return g;
    g.intervals = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
    if (g.intervals == 0) g.intervals = 1;
    g.h = horizon / static_cast<double>(g.intervals);
    return g;
  }
  double time(std::size_t i) const { return h * static_cast<double>(i); }
};

/// One classical RK4 step for an autonomous field.
template <class Field>
Vec2 rk4_step(const Field& f, Vec2 y, double h) {
  const Vec2 k1 = f(y);
  const Vec2 k2 = f(y + (0.5 * h) * k1);
  const Vec2 k3 = f(y + (0.5 * h) * k2);
  const Vec2 k4 = f(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class Field>
double rk4_step_scalar(const Field& f, double y, double h) {
  const double k1 = f(y);
  const double k2 = f(y + 0.5 * h * k1);
  const double k3 = f(y + 0.5 * h * k2);
  const double k4 = f(y + h * k3);
  return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Composite Simpson over equally spaced samples; the last three panels use
/// the 3/8 rule when the number of intervals is odd.
inline double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.empty() ? 0 : f.size() - 1;
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * h * (f[0] + f[1]);
  double s = 0.0;
  std::size_t even_end = n;
  if (n % 2 == 1) {
    even_end = n - 3;
    s += 3.0 * h / 8.0 * (f[n - 3] + 3.0 * f[n - 2] + 3.0 * f[n - 1] + f[n]);
  }
  if (even_end > 0) {
    double acc = f[0] + f[even_end];
    for (std::size_t i = 1; i < even_end; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
    s += h / 3.0 * acc;
  }
  return s;
}

}  // namespace msb
