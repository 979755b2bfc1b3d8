#pragma once

#include "rgap/common.hpp"
#include "rgap/kinematics.hpp"

#include <array>
#include <string>

namespace rgap {

class MixtureConfig;

enum class AngularFamily { AbsCosSin, AbsCos, Constant };

std::string to_string(AngularFamily family);
AngularFamily angular_family_from_string(const std::string& name);

/// Angular part b(cos theta) = coefficient * shape(cos theta).
///
/// AbsCosSin is the default and satisfies the strong angular cutoff with
/// constant `coefficient`. AbsCos and Constant are test families.
struct AngularPart {
  AngularFamily family = AngularFamily::AbsCosSin;
  double coefficient = 1.0;

  static AngularPart abs_cos_sin(double cb = 1.0);
  static AngularPart abs_cos(double cb = 1.0);
  static AngularPart constant(double cb = 1.0);

  /// Throws ParameterError for cos_theta outside [-1, 1].
  double operator()(double cos_theta) const;

  /// Whether b <= C |cos||sin| holds for C = coefficient.
  bool satisfies_strong_cutoff() const { return family == AngularFamily::AbsCosSin; }

  void validate() const;
};

bool operator==(const AngularPart& a, const AngularPart& b);

/// 2 pi int_0^pi b(cos theta) sin theta d theta.
double angular_mass(const AngularPart& b);

/// inf over (sigma1, sigma2) of int min(b(sigma1.sigma3), b(sigma2.sigma3)) dsigma3,
/// over a coarse grid of sigma pairs. Positive for admissible angular parts.
double angular_overlap_infimum(const AngularPart& b, int grid = 12);

/// Elastic kernels B_ij = C_ij g^gamma b_ij(cos theta).
class ElasticKernelSet {
 public:
  using Matrix4 = std::array<std::array<double, kSpecies>, kSpecies>;

  static ElasticKernelSet create(const Matrix4& constants, double gamma,
                                 const AngularPart& b = AngularPart::abs_cos_sin());
  /// Same constant and angular part for every pair.
  static ElasticKernelSet uniform(double constant, double gamma,
                                  const AngularPart& b = AngularPart::abs_cos_sin());

  double constant(int i, int j) const { return constants_[i][j]; }
  const AngularPart& angular(int /*i*/, int /*j*/) const { return angular_; }
  double gamma() const { return gamma_; }
  const Matrix4& constants() const { return constants_; }

 private:
  ElasticKernelSet() = default;
  Matrix4 constants_{};
  double gamma_ = 0.0;
  AngularPart angular_{};
};

/// C_ij g^gamma b_ij(cos theta).
double eval_elastic(const ElasticKernelSet& set, int i, int j, double g, double cos_theta);

/// Forward/backward reactive kernels sharing one angular part.
///
/// create() derives the backward constant C_34^12 = C_12^34 m12^2 / m34^2,
/// which makes micro-reversibility hold identically. with_backward_constant()
/// accepts an externally specified pair for validation.
class ReactiveKernelPair {
 public:
  static ReactiveKernelPair create(const MixtureConfig& config, double forward_constant,
                                   const AngularPart& b = AngularPart::abs_cos_sin());
  static ReactiveKernelPair with_backward_constant(const MixtureConfig& config,
                                                   double forward_constant,
                                                   double backward_constant,
                                                   const AngularPart& b = AngularPart::abs_cos_sin());

  double forward_constant() const { return forward_; }
  double backward_constant() const { return backward_; }
  /// C_ij^hk for the given quadruple.
  double constant(const ReactionQuadruple& quad) const {
    return quad.is_forward() ? forward_ : backward_;
  }
  const AngularPart& angular() const { return angular_; }
  double gamma() const { return gamma_; }
  bool derived() const { return derived_; }

  /// |C12 m12^2 - C34 m34^2| / max(C12 m12^2, C34 m34^2).
  double constraint_residual() const { return constraint_residual_; }

 private:
  ReactiveKernelPair() = default;
  double forward_ = 0.0;
  double backward_ = 0.0;
  double gamma_ = 0.0;
  AngularPart angular_{};
  bool derived_ = true;
  double constraint_residual_ = 0.0;
};

/// Phi_ij^hk(g) b(cos theta) with Phi = C (g_ij^hk)^{(gamma+1)/2} g^{-(1-gamma)/2}.
/// DomainError below threshold or at g = 0 with gamma < 1.
double eval_reactive(const ReactiveKernelPair& pair, const ReactionQuadruple& quad, double g,
                     double cos_theta, const MixtureConfig& config);

/// g B(g) with the power of g combined, finite at g = 0 and at threshold.
double flux_reactive(const ReactiveKernelPair& pair, const ReactionQuadruple& quad, double g,
                     double cos_theta, const MixtureConfig& config);

/// Signed relative residual of
///   g B_12^34(g) - (m34/m12)^2 g' B_34^12(g'),  g' = g_12^34(g).
/// Zero when both sides vanish. DomainError below the forward threshold.
double microreversibility_residual(const ReactiveKernelPair& pair, double g, double cos_theta,
                                   const MixtureConfig& config);

struct KernelSuite {
  ElasticKernelSet elastic;
  ReactiveKernelPair reactive;
};

}  // namespace rgap
