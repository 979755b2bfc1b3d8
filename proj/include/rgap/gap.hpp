#pragma once

#include "rgap/common.hpp"
#include "rgap/forms.hpp"
#include "rgap/frequency.hpp"
#include "rgap/statespace.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace rgap {

enum class CpsiConvention { Step4, Final };

std::string to_string(CpsiConvention c);
CpsiConvention cpsi_convention_from_string(const std::string& name);

struct CpsiValues {
  double max_abs = 0.0;  // max_kl |<phi_k, phi_l>_w|
  double step4 = 0.0;    // 16 max_abs
  double final = 0.0;    // max_abs
  double select(CpsiConvention c) const { return c == CpsiConvention::Step4 ? step4 : final; }
};

/// max_i of the upper constants on the <v>^gamma scale.
double constant_Cnu(const MixtureConfig& config, const KernelSuite& kernels);

/// int |v|^gamma mu_i dv by deterministic radial quadrature.
double gamma_moment(const MixtureConfig& config, int i);
/// Closed form (2/m)^{gamma/2} Gamma((gamma+3)/2) / Gamma(3/2) c_i.
double gamma_moment_closed_form(const MixtureConfig& config, int i);

/// nu_lower_1 (c_1 + int |v|^gamma mu_1).
double constant_Cb(const MixtureConfig& config, const KernelSuite& kernels);

/// Weighted Gram matrix of the elastic kernel basis and its extremes.
CpsiValues constant_Cpsi(const StateSpace& space);

enum class LambdaElMode { User, Galerkin };

struct LambdaEl {
  double value = 0.0;
  std::string provenance;  // "user" | "galerkin-estimate"
  int degree = 0;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
};

/// Smallest generalized eigenvalue of (-A, W) on the complement of span(K)
/// taken orthogonal in `metric`. A symmetric negative semidefinite with
/// A K = 0; W symmetric positive definite.
double restricted_gap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W, const Eigen::MatrixXd& K,
                      const Eigen::MatrixXd& metric);

/// Kernel basis columns of a BasisSet.
Eigen::MatrixXd basis_matrix(const BasisSet& basis);

/// user: passthrough. galerkin: elastic Galerkin gap on the sampler's
/// polynomial space in the <v>^{gamma/2}-weighted norm (an estimate).
LambdaEl lambda_elastic(LambdaElMode mode, std::optional<double> user_value,
                        const CollisionFormSampler* sampler);

/// Final algebra from the assembled constants.
struct GapSolution {
  double gate = 0.0;
  bool gate_holds = false;
  bool fallback = false;
  double eta = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  double eta_limit = 0.0;  // lambda_EL / (16 C_nu)
};

GapSolution solve_gap(double C_b, double C_nu, double C_psi, double c_inf, double lambda_el);

struct GapReport {
  std::array<NuBounds, kSpecies> nu{};
  double C_nu = 0.0;
  double C_b = 0.0;
  double C_b_moment = 0.0;  // int (1 + |v|^gamma) mu_1
  CpsiValues cpsi{};
  CpsiConvention convention = CpsiConvention::Step4;
  double C_psi = 0.0;
  double c_inf = 0.0;
  LambdaEl lambda_el{};
  GapSolution solution{};
  double lambda() const { return solution.lambda; }
};

GapReport spectral_gap(const MixtureConfig& config, const KernelSuite& kernels,
                       const StateSpace& space, const LambdaEl& lambda_el,
                       CpsiConvention convention = CpsiConvention::Step4);

struct SampleCheck {
  std::uint64_t index = 0;
  double lhs = 0.0;       // <L f, f>
  double lhs_stderr = 0.0;
  double rhs = 0.0;       // -lambda ||f - pi f||_w^2
  double margin = 0.0;    // rhs - lhs
  bool pass = true;
};

struct VerificationStats {
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
  double sigmas = 4.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int degree = 0;
  SampleCheck worst{};  // smallest margin + sigmas * stderr
  std::vector<SampleCheck> violations;
  bool pass() const { return failures == 0; }
};

/// Checks <L f, f> <= -lambda ||f - pi f||_w^2 on random perturbations.
VerificationStats verify_gap(const CollisionFormSampler& sampler, double lambda,
                             std::uint64_t n_samples, std::uint64_t seed, double sigmas = 4.0);
SampleCheck check_sample(const CollisionFormSampler& sampler, double lambda, const Perturbation& f,
                         double sigmas = 4.0);

struct DecayPoint {
  double t = 0.0;
  double norm = 0.0;           // ||f - pi f||_w
  double energy_norm = 0.0;    // ||c||_{G_w}
};

struct DecayResult {
  double fitted_rate = 0.0;
  double matrix_gap = 0.0;
  double lambda = 0.0;
  std::vector<DecayPoint> trajectory;
};

/// Smallest nonzero generalized eigenvalue of (-M_total, G_w).
double galerkin_total_gap(const CollisionFormSampler& sampler);

/// Integrates G_w c' = M c with SDIRK2 from `initial` (kernel component
/// removed when `remove_kernel`), and fits the decay of ||f - pi f||_w on
/// the second half of the run.
DecayResult decay_experiment(const CollisionFormSampler& sampler, double lambda, double t_max,
                             int steps, const Perturbation& initial, bool remove_kernel = true);

}  // namespace rgap
