#include "rgap/mixture.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

namespace rgap {

namespace {

double binding_energy_of(const SpeciesArray& s) {
  return s[3].chem_energy + s[2].chem_energy - s[1].chem_energy - s[0].chem_energy;
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < n; ++k) {
    h ^= p[k];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

MixtureConfig MixtureConfig::create(const SpeciesArray& species, double gamma) {
  for (int i = 0; i < kSpecies; ++i) {
    const auto& s = species[i];
    const std::string prefix = "species[" + std::to_string(i + 1) + "]";
    if (!std::isfinite(s.mass) || s.mass <= 0.0) {
      throw ConfigError(prefix + ".mass", "mass must be positive and finite");
    }
    if (!std::isfinite(s.concentration) || s.concentration <= 0.0) {
      throw ConfigError(prefix + ".concentration", "concentration must be positive and finite");
    }
    if (!std::isfinite(s.chem_energy)) {
      throw ConfigError(prefix + ".energy", "chemical energy must be finite");
    }
  }
  if (!std::isfinite(gamma) || gamma < 0.0 || gamma > 1.0) {
    throw ConfigError("gamma", "gamma must lie in [0, 1]");
  }

  const double lhs = species[0].mass + species[1].mass;
  const double rhs = species[2].mass + species[3].mass;
  if (std::abs(lhs - rhs) > kMassTolerance * std::max(lhs, rhs)) {
    std::ostringstream os;
    os << "mass conservation m1 + m2 = m3 + m4 violated (" << lhs << " vs " << rhs << ")";
    throw ConfigError("mass_conservation", os.str());
  }

  double energy = binding_energy_of(species);
  double energy_scale = 0.0;
  for (const auto& s : species) energy_scale += std::abs(s.chem_energy);
  if (energy < -1e-13 * (1.0 + energy_scale)) {
    throw ConfigError("binding_energy",
                      "E_12^34 = E4 + E3 - E2 - E1 must be >= 0 (forward reaction endothermic)");
  }
  energy = std::max(energy, 0.0);

  const double residual = mass_action_residual(species);
  if (std::abs(residual) > kMassActionTolerance) {
    std::ostringstream os;
    os << "mass action law c1 c2 / (c3 c4) = (m3 m4 / (m1 m2))^{3/2} exp(E_12^34) violated, log "
          "residual "
       << residual;
    throw ConfigError("mass_action_law", os.str());
  }

  MixtureConfig config;
  config.species_ = species;
  config.gamma_ = gamma;
  config.binding_energy_ = energy;
  config.m12_ = species[0].mass * species[1].mass / (species[0].mass + species[1].mass);
  config.m34_ = species[2].mass * species[3].mass / (species[2].mass + species[3].mass);

  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& s : species) {
    h = fnv1a(&s.mass, sizeof(double), h);
    h = fnv1a(&s.chem_energy, sizeof(double), h);
    h = fnv1a(&s.concentration, sizeof(double), h);
  }
  h = fnv1a(&gamma, sizeof(double), h);
  config.tag_ = h == 0 ? 1 : h;
  return config;
}

MixtureConfig MixtureConfig::from_mass_action(const std::array<double, kSpecies>& masses,
                                              const std::array<double, kSpecies>& energies,
                                              double c1, double c2, double c3, double gamma) {
  const double c4 = solve_mass_action(c1, c2, c3, masses, energies);
  SpeciesArray s;
  const std::array<double, kSpecies> c{c1, c2, c3, c4};
  for (int i = 0; i < kSpecies; ++i) s[i] = SpeciesParams{masses[i], energies[i], c[i]};
  return create(s, gamma);
}

double MixtureConfig::reduced_mass(int i, int j) const {
  check_species(i);
  check_species(j);
  return mass(i) * mass(j) / (mass(i) + mass(j));
}

double MixtureConfig::total_concentration() const {
  double c = 0.0;
  for (const auto& s : species_) c += s.concentration;
  return c;
}

double MixtureConfig::total_density() const {
  double rho = 0.0;
  for (const auto& s : species_) rho += s.mass * s.concentration;
  return rho;
}

double maxwellian(const MixtureConfig& config, int i, const Vec3& v) {
  check_species(i);
  const double m = config.mass(i);
  return config.concentration(i) * std::pow(m / (2.0 * std::numbers::pi), 1.5) *
         std::exp(-0.5 * m * v.squaredNorm());
}

double solve_mass_action(double c1, double c2, double c3, const std::array<double, kSpecies>& masses,
                         const std::array<double, kSpecies>& energies) {
  for (double c : {c1, c2, c3}) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("concentrations must be positive");
  }
  for (double m : masses) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("masses must be positive");
  }
  const double lhs = masses[0] + masses[1];
  const double rhs = masses[2] + masses[3];
  if (std::abs(lhs - rhs) > MixtureConfig::kMassTolerance * std::max(lhs, rhs)) {
    throw ParameterError("masses violate m1 + m2 = m3 + m4");
  }
  const double energy = energies[3] + energies[2] - energies[1] - energies[0];
  if (energy < -1e-13) throw ParameterError("binding energy E_12^34 must be >= 0");
  // c4 = c1 c2 / c3 * (m1 m2 / (m3 m4))^{3/2} * exp(-E)
  const double log_c4 = std::log(c1) + std::log(c2) - std::log(c3) +
                        1.5 * (std::log(masses[0]) + std::log(masses[1]) - std::log(masses[2]) -
                               std::log(masses[3])) -
                        energy;
  return std::exp(log_c4);
}

double mass_action_residual(const SpeciesArray& s) {
  const double energy = binding_energy_of(s);
  return std::log(s[0].concentration) + std::log(s[1].concentration) -
         std::log(s[2].concentration) - std::log(s[3].concentration) -
         1.5 * (std::log(s[2].mass) + std::log(s[3].mass) - std::log(s[0].mass) -
                std::log(s[1].mass)) -
         energy;
}

double mass_action_residual(const MixtureConfig& config) {
  return mass_action_residual(config.species());
}

}  // namespace rgap
