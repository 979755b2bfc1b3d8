#pragma once

#include "rgap/common.hpp"
#include "rgap/kernels.hpp"
#include "rgap/quadrature.hpp"

#include <string>

namespace rgap {

class MixtureConfig;

/// int_y^inf r^{s-1} e^{-r} dr.
double incomplete_gamma_upper(double s, double y);
/// int_0^y r^{s-1} e^{-r} dr.
double incomplete_gamma_lower(double s, double y);

/// E|V|^x for V ~ N(0, I/m) in three dimensions; finite for x > -3.
double gaussian_radial_moment(double x, double mass);

/// Constants bracketing the chemical collision frequency of one species.
///
/// `lower`/`upper` bound nu_i against (1 + |v|^gamma); `lower_bracket`/
/// `upper_bracket` against <v>^gamma, obtained with the scale factors
///   scale_lower (1 + |v|^gamma) >= <v>^gamma   (scale_lower = 1),
///   (1 + |v|^gamma) <= scale_upper <v>^gamma   (scale_upper = 2^{1 - gamma/2}).
struct NuBounds {
  int species = 0;
  double lower = 0.0;
  double upper = 0.0;
  double lower_bracket = 0.0;
  double upper_bracket = 0.0;
  double scale_lower = 1.0;
  double scale_upper = 1.0;
  // Intermediate factors.
  double c_bar = 0.0;         // 2 (1 + 2 E / m12)
  double angular_mass = 0.0;  // int b dsigma
  double upper_gamma_term = 0.0;
  double lower_case_large = 0.0;  // |v|^2 >= C_bar branch
  double lower_case_small = 0.0;  // |v|^2 <= C_bar branch
  double incomplete_lower = 0.0;  // Gamma_lower(3/2, m_partner / 4)
  double incomplete_upper = 0.0;  // Gamma_upper((gamma + 5)/4, 3/2 m_partner C_bar)
  std::string provenance;         // "closed-form" (species 1, 2) or "derived" (3, 4)
};

/// sup over r >= 0 of (1 + r^gamma) / (1 + r^2)^{gamma/2}, located numerically.
double scale_equivalence_upper(double gamma);

NuBounds bound_constants(const MixtureConfig& config, const KernelSuite& kernels, int i);

/// Monte Carlo estimate of nu_i^CH(v); partner stream 100 + i.
Estimate nu_chemical(const MixtureConfig& config, const KernelSuite& kernels, int i, const Vec3& v,
                     const QuadratureSpec& spec);

}  // namespace rgap
