#pragma once

#include "rgap/common.hpp"

#include <array>
#include <optional>
#include <string>

namespace rgap {

class MixtureConfig;

/// Ordered species indices (i, j, h, k) of a reactive collision
/// S_i + S_j -> S_h + S_k. Only the patterns of S1 + S2 <-> S3 + S4 exist.
class ReactionQuadruple {
 public:
  /// Accepts (0,1,2,3), (1,0,3,2), (2,3,0,1), (3,2,1,0).
  static ReactionQuadruple create(int i, int j, int h, int k);

  static ReactionQuadruple forward() { return {0, 1, 2, 3}; }   // S1 + S2 -> S3 + S4
  static ReactionQuadruple backward() { return {2, 3, 0, 1}; }  // S3 + S4 -> S1 + S2

  /// The quadruple in which species `i` is the first incoming particle.
  static ReactionQuadruple for_species(int i);

  int i() const { return idx_[0]; }
  int j() const { return idx_[1]; }
  int h() const { return idx_[2]; }
  int k() const { return idx_[3]; }

  /// Whether the incoming pair is (S1, S2) in either order.
  bool is_forward() const { return idx_[0] <= 1; }
  ReactionQuadruple reversed() const { return {idx_[2], idx_[3], idx_[0], idx_[1]}; }

  /// E_ij^hk = E_k + E_h - E_j - E_i.
  double energy_gap(const MixtureConfig& config) const;

  std::string label() const;

 private:
  ReactionQuadruple(int i, int j, int h, int k) : idx_{i, j, h, k} {}
  std::array<int, 4> idx_;
};

struct VelocityPair {
  Vec3 v;
  Vec3 vs;
};

/// Elastic post-collisional velocities for masses (m_i, m_j).
VelocityPair elastic_post(const Vec3& v, const Vec3& vs, const Vec3& sigma, double mi, double mj);

/// g_ij^hk; empty below the reaction threshold g^2 < 2 E_ij^hk / m_ij.
std::optional<double> outgoing_relative_speed(double g, const ReactionQuadruple& quad,
                                              const MixtureConfig& config);

/// Reactive post-collisional velocities of S_h and S_k; empty below threshold.
std::optional<VelocityPair> reactive_post(const Vec3& v, const Vec3& vs, const Vec3& sigma,
                                          const ReactionQuadruple& quad,
                                          const MixtureConfig& config);

/// Unit-norm tolerance applied to sigma.
inline constexpr double kSigmaTolerance = 1e-12;

}  // namespace rgap
