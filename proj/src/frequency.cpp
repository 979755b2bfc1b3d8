#include "rgap/frequency.hpp"

#include "rgap/mixture.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rgap {

double incomplete_gamma_upper(double s, double y) {
  if (!(s > 0.0)) throw ParameterError("incomplete gamma: s must be positive");
  if (!(y >= 0.0)) throw ParameterError("incomplete gamma: y must be nonnegative");
  return boost::math::tgamma(s, y);
}

double incomplete_gamma_lower(double s, double y) {
  if (!(s > 0.0)) throw ParameterError("incomplete gamma: s must be positive");
  if (!(y >= 0.0)) throw ParameterError("incomplete gamma: y must be nonnegative");
  if (y == 0.0) return 0.0;
  return boost::math::tgamma_lower(s, y);
}

double gaussian_radial_moment(double x, double mass) {
  if (!(x > -3.0)) throw ParameterError("radial moment exponent must exceed -3");
  if (!(mass > 0.0)) throw ParameterError("mass must be positive");
  return 2.0 / std::sqrt(std::numbers::pi) * std::pow(2.0 / mass, 0.5 * x) *
         std::tgamma(0.5 * (x + 3.0));
}

double scale_equivalence_upper(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in [0, 1]");
  if (gamma == 0.0) return 2.0;
  // Ratio depends on r only through t = r^2; maximize over t in [0, T] and
  // also check the t -> infinity limit 1.
  auto neg_ratio = [gamma](double t) {
    return -(1.0 + std::pow(t, 0.5 * gamma)) / std::pow(1.0 + t, 0.5 * gamma);
  };
  const auto [tmin, fmin] = boost::math::tools::brent_find_minima(neg_ratio, 0.0, 100.0, 52);
  (void)tmin;
  return std::max({-fmin, -neg_ratio(0.0), 1.0});
}

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

NuBounds closed_form_bounds(const MixtureConfig& config, const KernelSuite& kernels, int i) {
  // Species 1 partners with species 2; species 2 is its permutation.
  const int partner = i == 0 ? 1 : 0;
  const double gamma = config.gamma();
  const double m_p = config.mass(partner);
  const double m12 = config.reduced_mass_12();
  const double m34 = config.reduced_mass_34();
  const double c_inf = config.total_concentration();
  const double C = kernels.reactive.forward_constant();
  const double E = config.binding_energy();

  NuBounds nb;
  nb.species = i;
  nb.provenance = "closed-form";
  nb.angular_mass = angular_mass(kernels.reactive.angular());
  nb.c_bar = 2.0 * (1.0 + 2.0 * E / m12);
  const double ratio_pow = std::pow(m12 / m34, 0.25 * (gamma + 1.0));

  nb.upper_gamma_term =
      4.0 / kSqrtPi * std::pow(2.0 / m_p, 0.5 * gamma) * incomplete_gamma_upper(gamma + 3.0, 0.0);
  nb.upper = c_inf * C * ratio_pow * std::max(1.0, nb.upper_gamma_term) * nb.angular_mass;

  nb.incomplete_lower = incomplete_gamma_lower(1.5, 0.25 * m_p);
  nb.lower_case_large = c_inf / (2.0 * kSqrtPi) * C *
                        std::pow(m12 / (4.0 * nb.c_bar * m34), 0.25 * (gamma + 1.0)) *
                        nb.incomplete_lower * nb.angular_mass;

  nb.incomplete_upper = incomplete_gamma_upper(0.25 * (gamma + 5.0), 1.5 * m_p * nb.c_bar);
  nb.lower_case_small = c_inf / (kSqrtPi * (1.0 + std::pow(nb.c_bar, 0.5 * gamma))) * C *
                        ratio_pow * std::pow(2.0 / m_p, 0.25 * (gamma - 1.0)) *
                        nb.incomplete_upper * nb.angular_mass;
  nb.lower = std::min(nb.lower_case_large, nb.lower_case_small);
  return nb;
}

NuBounds derived_bounds(const MixtureConfig& config, const KernelSuite& kernels, int i) {
  // Species 3 partners with species 4, species 4 with 3. The exothermic
  // direction has no threshold:
  //   nu_i(v) = K int (g^2 + s)^p g^{-beta} mu_partner(v_*) dv_*,
  //   K = C_34^12 int b (m34/m12)^p,  p = (gamma+1)/4,  beta = (1-gamma)/2,  s = 2E/m34.
  // Upper: (g^2 + s)^p <= g^{2p} + s^p, E|v - V|^gamma <= |v|^gamma + E|V|^gamma and
  // E|v - V|^{-beta} <= E|V|^{-beta}.
  // Lower: (g^2 + s)^p >= g^{2p} and E|v - V|^gamma >= max(E|V|^gamma, |v|^gamma - E|V|^gamma).
  const int partner = i == 2 ? 3 : 2;
  const double gamma = config.gamma();
  const double m_p = config.mass(partner);
  const double c_p = config.concentration(partner);
  const double m12 = config.reduced_mass_12();
  const double m34 = config.reduced_mass_34();
  const double E = config.binding_energy();
  const double p = 0.25 * (gamma + 1.0);
  const double beta = 0.5 * (1.0 - gamma);

  NuBounds nb;
  nb.species = i;
  nb.provenance = "derived";
  nb.angular_mass = angular_mass(kernels.reactive.angular());
  nb.c_bar = 2.0 * (1.0 + 2.0 * E / m12);
  const double K = kernels.reactive.backward_constant() * nb.angular_mass * std::pow(m34 / m12, p);
  const double a_gamma = gaussian_radial_moment(gamma, m_p);
  const double a_beta = gaussian_radial_moment(-beta, m_p);
  const double s = 2.0 * E / m34;
  nb.upper_gamma_term = a_gamma + std::pow(s, p) * a_beta;
  nb.upper = K * c_p * std::max(1.0, nb.upper_gamma_term);
  nb.lower = K * c_p * std::min(0.5 * a_gamma, 0.25);
  nb.lower_case_large = nb.lower;
  nb.lower_case_small = nb.lower;
  return nb;
}

}  // namespace

NuBounds bound_constants(const MixtureConfig& config, const KernelSuite& kernels, int i) {
  check_species(i);
  NuBounds nb = i <= 1 ? closed_form_bounds(config, kernels, i) : derived_bounds(config, kernels, i);
  nb.scale_lower = 1.0;
  nb.scale_upper = scale_equivalence_upper(config.gamma());
  nb.lower_bracket = nb.lower * nb.scale_lower;
  nb.upper_bracket = nb.upper * nb.scale_upper;
  return nb;
}

Estimate nu_chemical(const MixtureConfig& config, const KernelSuite& kernels, int i, const Vec3& v,
                     const QuadratureSpec& spec) {
  check_species(i);
  const auto quad = ReactionQuadruple::for_species(i);
  const auto& pair = kernels.reactive;
  auto integrand = [&](const Vec3& vs, const Vec3& sigma) {
    const Vec3 d = v - vs;
    const double g = d.norm();
    if (!outgoing_relative_speed(g, quad, config)) return 0.0;
    if (g == 0.0) {
      // Direction undefined; any fixed axis serves on this null set.
      return pair.gamma() < 1.0 ? std::numeric_limits<double>::quiet_NaN()
                                : eval_reactive(pair, quad, g, sigma.z(), config);
    }
    const double ct = std::clamp(sigma.dot(d) / g, -1.0, 1.0);
    return eval_reactive(pair, quad, g, ct, config);
  };
  return partner_integral(integrand, config, quad.j(), spec, 100 + static_cast<std::uint64_t>(i));
}

}  // namespace rgap
