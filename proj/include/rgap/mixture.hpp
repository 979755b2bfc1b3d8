#pragma once

#include "rgap/common.hpp"

#include <array>

namespace rgap {

/// Normalized units: u_inf = 0, K_B T_inf = 1.
struct SpeciesParams {
  double mass = 1.0;
  double chem_energy = 0.0;
  double concentration = 1.0;
};

using SpeciesArray = std::array<SpeciesParams, kSpecies>;

/// Four-species mixture at its global chemical equilibrium.
///
/// Construction enforces m_i > 0, c_i > 0, m1 + m2 = m3 + m4, a nonnegative
/// binding energy E = E4 + E3 - E2 - E1, gamma in [0, 1] and the mass action
/// law. Instances are immutable.
class MixtureConfig {
 public:
  static constexpr double kMassTolerance = 1e-12;
  static constexpr double kMassActionTolerance = 1e-10;

  static MixtureConfig create(const SpeciesArray& species, double gamma);

  /// Completes c4 from (c1, c2, c3) with solve_mass_action.
  static MixtureConfig from_mass_action(const std::array<double, kSpecies>& masses,
                                        const std::array<double, kSpecies>& energies, double c1,
                                        double c2, double c3, double gamma);

  const SpeciesArray& species() const { return species_; }
  double mass(int i) const { return species_[i].mass; }
  double energy(int i) const { return species_[i].chem_energy; }
  double concentration(int i) const { return species_[i].concentration; }
  double gamma() const { return gamma_; }

  /// E_12^34 = E4 + E3 - E2 - E1 >= 0.
  double binding_energy() const { return binding_energy_; }
  double reduced_mass(int i, int j) const;
  double reduced_mass_12() const { return m12_; }
  double reduced_mass_34() const { return m34_; }
  double total_concentration() const;
  double total_density() const;

  /// Stable 64-bit fingerprint of the parameters; tags perturbations built
  /// against this configuration.
  std::uint64_t tag() const { return tag_; }

 private:
  MixtureConfig() = default;

  SpeciesArray species_{};
  double gamma_ = 0.0;
  double binding_energy_ = 0.0;
  double m12_ = 0.0;
  double m34_ = 0.0;
  std::uint64_t tag_ = 0;
};

/// mu_i(v) = c_i (m_i / 2 pi)^{3/2} exp(-m_i |v|^2 / 2).
double maxwellian(const MixtureConfig& config, int i, const Vec3& v);

/// Unique c4 satisfying c1 c2 / (c3 c4) = (m3 m4 / (m1 m2))^{3/2} exp(E_12^34).
double solve_mass_action(double c1, double c2, double c3, const std::array<double, kSpecies>& masses,
                         const std::array<double, kSpecies>& energies);

/// log(c1 c2 / (c3 c4)) - (3/2) log(m3 m4 / (m1 m2)) - E_12^34.
double mass_action_residual(const SpeciesArray& species);
double mass_action_residual(const MixtureConfig& config);

}  // namespace rgap
