#pragma once

#include "rgap/common.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rgap {

class MixtureConfig;

enum class QuadratureMode { TensorDeterministic, MonteCarlo };

std::string to_string(QuadratureMode mode);
QuadratureMode quadrature_mode_from_string(const std::string& name);

struct QuadratureSpec {
  QuadratureMode mode = QuadratureMode::MonteCarlo;
  int hermite_order = 6;  // per velocity axis, tensor mode
  int sphere_order = 7;   // polynomial degree of the sphere rule, tensor mode
  std::uint64_t sample_count = std::uint64_t{1} << 18;
  std::uint64_t seed = 0x5EEDCAFEULL;
  std::uint64_t block_size = std::uint64_t{1} << 14;
  // Non-finite integrand samples tolerated before IntegrationError.
  std::uint64_t nonfinite_quota = 64;
  // 0 selects std::thread::hardware_concurrency().
  int threads = 0;

  void validate() const;
  std::uint64_t block_count() const { return (sample_count + block_size - 1) / block_size; }
};

/// A numerical integral together with its uncertainty and provenance.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for deterministic schemes
  QuadratureSpec scheme{};
  std::uint64_t evaluations = 0;
  std::uint64_t skipped = 0;  // non-finite samples dropped

  bool consistent_with(double reference, double sigmas, double abs_floor = 0.0) const;
};

struct GaussNode {
  double node;
  double weight;
};

/// Gauss rule for the weight exp(-mass x^2 / 2) on the real line. Exact for
/// polynomials of degree <= 2 order - 1; weights sum to sqrt(2 pi / mass).
std::vector<GaussNode> gaussian_nodes(int order, double mass);

/// Gauss-Legendre rule on [a, b].
std::vector<GaussNode> legendre_nodes(int order, double a = -1.0, double b = 1.0);

/// Product rule on the unit sphere: Gauss-Legendre in cos(theta) times a
/// uniform rule in phi. Exact for spherical polynomials of degree <= degree.
struct SphereRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return nodes.size(); }
};

inline constexpr int kMaxSphereDegree = 127;

SphereRule sphere_rule(int degree);

/// One point (v, v_*, sigma) of the collision phase space.
struct CollisionSample {
  Vec3 v;
  Vec3 vs;
  Vec3 sigma;
};

/// Partner-velocity point (v_*, sigma) for collision frequencies.
struct PartnerSample {
  Vec3 vs;
  Vec3 sigma;
};

using CollisionIntegrand = std::function<double(const Vec3& v, const Vec3& vs, const Vec3& sigma)>;
using PartnerIntegrand = std::function<double(const Vec3& vs, const Vec3& sigma)>;

/// Fills `out` with the Monte Carlo points of block `block` for the pair of
/// densities (i, j): v ~ mu_i / c_i, v_* ~ mu_j / c_j, sigma uniform on S^2.
/// The points depend only on (seed, stream, block, masses), which makes
/// evaluations with matched seeds see identical sample paths.
void collision_block(const MixtureConfig& config, int i, int j, const QuadratureSpec& spec,
                     std::uint64_t stream, std::uint64_t block, std::vector<CollisionSample>& out);

void partner_block(const MixtureConfig& config, int j, const QuadratureSpec& spec,
                   std::uint64_t stream, std::uint64_t block, std::vector<PartnerSample>& out);

/// Estimate of  int int int integrand(v, v_*, sigma) mu_i(v) mu_j(v_*) dv dv_* dsigma.
///
/// Monte Carlo mode samples with Maxwellian importance and scales by
/// c_i c_j 4 pi; the standard error is that of the block means. The integrand
/// may be called concurrently from several threads.
Estimate collision_integral(const CollisionIntegrand& integrand, const MixtureConfig& config,
                            int i, int j, const QuadratureSpec& spec, std::uint64_t stream = 0);

/// Estimate of  int int integrand(v_*, sigma) mu_j(v_*) dv_* dsigma.
Estimate partner_integral(const PartnerIntegrand& integrand, const MixtureConfig& config, int j,
                          const QuadratureSpec& spec, std::uint64_t stream = 0);

/// Combines per-block sums into an Estimate. Block means define the standard
/// error; with a single block the per-sample variance is used instead.
Estimate combine_blocks(std::span<const double> block_sums, std::span<const double> block_sq_sums,
                        std::span<const std::uint64_t> block_counts, double scale,
                        const QuadratureSpec& spec, std::uint64_t skipped = 0);

/// Runs fn(block) for block in [0, blocks) on up to `threads` workers.
void parallel_blocks(std::uint64_t blocks, int threads, const std::function<void(std::uint64_t)>& fn);

/// Seed of an independent substream; SplitMix64 over (seed, stream, block).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t block);

}  // namespace rgap
