#include "rgap/kinematics.hpp"

#include "rgap/mixture.hpp"

#include <cmath>

namespace rgap {

namespace {

void check_sigma(const Vec3& sigma) {
  if (!(std::abs(sigma.norm() - 1.0) <= kSigmaTolerance)) {
    throw ParameterError("sigma must be a unit vector (|sigma| = " +
                         std::to_string(sigma.norm()) + ")");
  }
}

}  // namespace

ReactionQuadruple ReactionQuadruple::create(int i, int j, int h, int k) {
  const std::array<int, 4> q{i, j, h, k};
  static constexpr std::array<std::array<int, 4>, 4> allowed{
      {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}}};
  for (const auto& a : allowed) {
    if (a == q) return ReactionQuadruple(i, j, h, k);
  }
  throw ParameterError("not a quadruple of S1 + S2 <-> S3 + S4: (" + std::to_string(i + 1) + "," +
                       std::to_string(j + 1) + "," + std::to_string(h + 1) + "," +
                       std::to_string(k + 1) + ")");
}

ReactionQuadruple ReactionQuadruple::for_species(int i) {
  check_species(i);
  switch (i) {
    case 0: return {0, 1, 2, 3};
    case 1: return {1, 0, 3, 2};
    case 2: return {2, 3, 0, 1};
    default: return {3, 2, 1, 0};
  }
}

double ReactionQuadruple::energy_gap(const MixtureConfig& config) const {
  return config.energy(k()) + config.energy(h()) - config.energy(j()) - config.energy(i());
}

std::string ReactionQuadruple::label() const {
  return std::to_string(i() + 1) + std::to_string(j() + 1) + "->" + std::to_string(h() + 1) +
         std::to_string(k() + 1);
}

VelocityPair elastic_post(const Vec3& v, const Vec3& vs, const Vec3& sigma, double mi, double mj) {
  check_sigma(sigma);
  if (!(mi > 0.0) || !(mj > 0.0)) throw ParameterError("masses must be positive");
  const double M = mi + mj;
  const Vec3 center = (mi * v + mj * vs) / M;
  const double g = (v - vs).norm();
  return {center + (mj * g / M) * sigma, center - (mi * g / M) * sigma};
}

std::optional<double> outgoing_relative_speed(double g, const ReactionQuadruple& quad,
                                              const MixtureConfig& config) {
  if (!(g >= 0.0)) throw ParameterError("relative speed must be nonnegative");
  const double mij = config.reduced_mass(quad.i(), quad.j());
  const double mhk = config.reduced_mass(quad.h(), quad.k());
  const double e = quad.energy_gap(config);
  const double arg = g * g - 2.0 * e / mij;
  if (arg < 0.0) return std::nullopt;
  return std::sqrt(mij / mhk * arg);
}

std::optional<VelocityPair> reactive_post(const Vec3& v, const Vec3& vs, const Vec3& sigma,
                                          const ReactionQuadruple& quad,
                                          const MixtureConfig& config) {
  check_sigma(sigma);
  const auto gout = outgoing_relative_speed((v - vs).norm(), quad, config);
  if (!gout) return std::nullopt;
  const double mi = config.mass(quad.i());
  const double mj = config.mass(quad.j());
  const double mh = config.mass(quad.h());
  const double mk = config.mass(quad.k());
  const Vec3 center = (mi * v + mj * vs) / (mi + mj);
  const double M = mh + mk;
  return VelocityPair{center + (mk * *gout / M) * sigma, center - (mh * *gout / M) * sigma};
}

}  // namespace rgap
