#include "rgap/kernels.hpp"

#include "rgap/mixture.hpp"
#include "rgap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rgap {

std::string to_string(AngularFamily family) {
  switch (family) {
    case AngularFamily::AbsCosSin: return "abs-cos-sin";
    case AngularFamily::AbsCos: return "abs-cos";
    case AngularFamily::Constant: return "constant";
  }
  return "unknown";
}

AngularFamily angular_family_from_string(const std::string& name) {
  if (name == "abs-cos-sin") return AngularFamily::AbsCosSin;
  if (name == "abs-cos") return AngularFamily::AbsCos;
  if (name == "constant") return AngularFamily::Constant;
  throw ParameterError("unknown angular family '" + name + "'");
}

AngularPart AngularPart::abs_cos_sin(double cb) { return {AngularFamily::AbsCosSin, cb}; }
AngularPart AngularPart::abs_cos(double cb) { return {AngularFamily::AbsCos, cb}; }
AngularPart AngularPart::constant(double cb) { return {AngularFamily::Constant, cb}; }

void AngularPart::validate() const {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) {
    throw ParameterError("angular coefficient must be positive");
  }
}

double AngularPart::operator()(double cos_theta) const {
  if (!(cos_theta >= -1.0 && cos_theta <= 1.0)) {
    throw ParameterError("cos(theta) outside [-1, 1]");
  }
  switch (family) {
    case AngularFamily::AbsCosSin:
      return coefficient * std::abs(cos_theta) * std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    case AngularFamily::AbsCos: return coefficient * std::abs(cos_theta);
    case AngularFamily::Constant: return coefficient;
  }
  return 0.0;
}

bool operator==(const AngularPart& a, const AngularPart& b) {
  return a.family == b.family && a.coefficient == b.coefficient;
}

double angular_mass(const AngularPart& b) {
  b.validate();
  // Split at pi/2, where |cos| has its kink.
  static const auto left = legendre_nodes(48, 0.0, 0.5 * std::numbers::pi);
  static const auto right = legendre_nodes(48, 0.5 * std::numbers::pi, std::numbers::pi);
  double s = 0.0;
  for (const auto* rule : {&left, &right}) {
    for (const auto& [t, w] : *rule) s += w * b(std::cos(t)) * std::sin(t);
  }
  return 2.0 * std::numbers::pi * s;
}

double angular_overlap_infimum(const AngularPart& b, int grid) {
  b.validate();
  if (grid < 2) throw ParameterError("angular_overlap_infimum: grid must be >= 2");
  // Rotation invariance reduces (sigma1, sigma2) to their relative angle.
  static const SphereRule rule = sphere_rule(95);
  const Vec3 s1(0.0, 0.0, 1.0);
  double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid; ++a) {
    const double alpha = std::numbers::pi * a / (grid - 1);
    const Vec3 s2(std::sin(alpha), 0.0, std::cos(alpha));
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3& s3 = rule.nodes[q];
      const double c1 = std::clamp(s1.dot(s3), -1.0, 1.0);
      const double c2 = std::clamp(s2.dot(s3), -1.0, 1.0);
      s += rule.weights[q] * std::min(b(c1), b(c2));
    }
    inf = std::min(inf, s);
  }
  return inf;
}

ElasticKernelSet ElasticKernelSet::create(const Matrix4& constants, double gamma,
                                          const AngularPart& b) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "gamma must lie in [0, 1]");
  b.validate();
  for (int i = 0; i < kSpecies; ++i) {
    for (int j = 0; j < kSpecies; ++j) {
      const double c = constants[i][j];
      const std::string field = "kernels.elastic[" + std::to_string(i + 1) + "][" +
                                std::to_string(j + 1) + "]";
      if (!(c > 0.0) || !std::isfinite(c)) {
        throw ConfigError(field, "elastic constants must be positive");
      }
      if (c != constants[j][i]) {
        throw ConfigError(field, "elastic constants must satisfy C_ij = C_ji");
      }
    }
  }
  ElasticKernelSet set;
  set.constants_ = constants;
  set.gamma_ = gamma;
  set.angular_ = b;
  return set;
}

ElasticKernelSet ElasticKernelSet::uniform(double constant, double gamma, const AngularPart& b) {
  Matrix4 m;
  for (auto& row : m) row.fill(constant);
  return create(m, gamma, b);
}

double eval_elastic(const ElasticKernelSet& set, int i, int j, double g, double cos_theta) {
  check_species(i);
  check_species(j);
  if (!(g >= 0.0)) throw ParameterError("relative speed must be nonnegative");
  const double b = set.angular(i, j)(cos_theta);
  return set.constant(i, j) * std::pow(g, set.gamma()) * b;
}

namespace {

double constraint_residual_of(const MixtureConfig& config, double c12, double c34) {
  const double a = c12 * config.reduced_mass_12() * config.reduced_mass_12();
  const double b = c34 * config.reduced_mass_34() * config.reduced_mass_34();
  return std::abs(a - b) / std::max(a, b);
}

}  // namespace

ReactiveKernelPair ReactiveKernelPair::create(const MixtureConfig& config, double forward_constant,
                                              const AngularPart& b) {
  if (!(forward_constant > 0.0) || !std::isfinite(forward_constant)) {
    throw ConfigError("kernels.reactive_constant", "C_12^34 must be positive");
  }
  b.validate();
  ReactiveKernelPair p;
  p.forward_ = forward_constant;
  const double r = config.reduced_mass_12() / config.reduced_mass_34();
  p.backward_ = forward_constant * r * r;
  p.gamma_ = config.gamma();
  p.angular_ = b;
  p.derived_ = true;
  p.constraint_residual_ = constraint_residual_of(config, p.forward_, p.backward_);
  return p;
}

ReactiveKernelPair ReactiveKernelPair::with_backward_constant(const MixtureConfig& config,
                                                              double forward_constant,
                                                              double backward_constant,
                                                              const AngularPart& b) {
  if (!(forward_constant > 0.0) || !std::isfinite(forward_constant)) {
    throw ConfigError("kernels.reactive_constant", "C_12^34 must be positive");
  }
  if (!(backward_constant > 0.0) || !std::isfinite(backward_constant)) {
    throw ConfigError("kernels.backward_constant", "C_34^12 must be positive");
  }
  b.validate();
  ReactiveKernelPair p;
  p.forward_ = forward_constant;
  p.backward_ = backward_constant;
  p.gamma_ = config.gamma();
  p.angular_ = b;
  p.derived_ = false;
  p.constraint_residual_ = constraint_residual_of(config, p.forward_, p.backward_);
  return p;
}

double eval_reactive(const ReactiveKernelPair& pair, const ReactionQuadruple& quad, double g,
                     double cos_theta, const MixtureConfig& config) {
  const double b = pair.angular()(cos_theta);
  if (!(g >= 0.0)) throw ParameterError("relative speed must be nonnegative");
  const auto gout = outgoing_relative_speed(g, quad, config);
  if (!gout) throw DomainError("eval_reactive: relative speed below the reaction threshold");
  const double gamma = pair.gamma();
  if (g == 0.0 && gamma < 1.0) {
    throw DomainError("eval_reactive: kernel singular at g = 0 for gamma < 1");
  }
  return pair.constant(quad) * std::pow(*gout, 0.5 * (gamma + 1.0)) *
         std::pow(g, -0.5 * (1.0 - gamma)) * b;
}

double flux_reactive(const ReactiveKernelPair& pair, const ReactionQuadruple& quad, double g,
                     double cos_theta, const MixtureConfig& config) {
  const double b = pair.angular()(cos_theta);
  const auto gout = outgoing_relative_speed(g, quad, config);
  if (!gout) throw DomainError("flux_reactive: relative speed below the reaction threshold");
  const double p = 0.5 * (pair.gamma() + 1.0);
  return pair.constant(quad) * std::pow(*gout, p) * std::pow(g, p) * b;
}

double microreversibility_residual(const ReactiveKernelPair& pair, double g, double cos_theta,
                                   const MixtureConfig& config) {
  const auto fwd = ReactionQuadruple::forward();
  const auto bwd = ReactionQuadruple::backward();
  const auto gp = outgoing_relative_speed(g, fwd, config);
  if (!gp) throw DomainError("microreversibility_residual: g below the forward threshold");
  const double r = config.reduced_mass_34() / config.reduced_mass_12();
  const double lhs = flux_reactive(pair, fwd, g, cos_theta, config);
  const double rhs = r * r * flux_reactive(pair, bwd, *gp, cos_theta, config);
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (scale == 0.0) return 0.0;
  return (lhs - rhs) / scale;
}

}  // namespace rgap
