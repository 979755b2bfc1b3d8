#pragma once

#include "rgap/mixture.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

/// int_0^inf r^{2+x} exp(-m r^2 / 2) dr times the Maxwellian normalization and 4 pi,
/// i.e. int |v|^x mu_i dv for a unit concentration.
inline double radial_moment(double x, double m) {
  const double cut = 40.0 / std::sqrt(m);
  const double r = simpson([&](double t) { return t <= 0.0 ? 0.0 : std::pow(t, 2.0 + x) * std::exp(-0.5 * m * t * t); },
                           0.0, cut, 200000);
  return 4.0 * std::numbers::pi * std::pow(m / (2.0 * std::numbers::pi), 1.5) * r;
}

/// Equal masses 1, energies (0, 0, E/2, E/2), c1 = c2 = c3 = 1, c4 = exp(-E).
inline rgap::MixtureConfig equal_mass_config(double E, double gamma) {
  return rgap::MixtureConfig::from_mass_action({1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 0.5 * E, 0.5 * E}, 1.0,
                                               1.0, 1.0, gamma);
}

}  // namespace oracle
