#pragma once

#include "rgap/common.hpp"
#include "rgap/kernels.hpp"
#include "rgap/quadrature.hpp"
#include "rgap/statespace.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace rgap {

enum class FormPart { Elastic, Chemical, Total };

std::string to_string(FormPart part);

/// Monte Carlo (or tensor) estimate of a symmetric bilinear form on a
/// StateSpace, kept per sample block.
///
/// Block b holds the matrix M_b whose quadratic form f^T M_b f is the block
/// mean of the form integrand. Every quadratic or bilinear evaluation reuses
/// the same sample path, so scaling and polarization identities hold exactly.
class BlockQuadraticForm {
 public:
  BlockQuadraticForm() = default;
  BlockQuadraticForm(std::vector<Eigen::MatrixXd> blocks, std::vector<std::uint64_t> counts,
                     QuadratureSpec spec, std::uint64_t skipped, bool deterministic);

  std::size_t blocks() const { return blocks_.size(); }
  int dimension() const { return blocks_.empty() ? 0 : static_cast<int>(blocks_[0].rows()); }
  const QuadratureSpec& spec() const { return spec_; }
  std::uint64_t skipped() const { return skipped_; }

  /// Sample-weighted mean matrix.
  const Eigen::MatrixXd& mean() const { return mean_; }

  Estimate quadratic(const Eigen::VectorXd& f) const { return bilinear(f, f); }
  Estimate bilinear(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;

  /// Per-entry standard error of mean() restricted to the span of `basis`
  /// columns, i.e. of basis^T M basis.
  Eigen::MatrixXd projected_stderr(const Eigen::MatrixXd& basis) const;

  BlockQuadraticForm& operator+=(const BlockQuadraticForm& other);

 private:
  std::vector<Eigen::MatrixXd> blocks_;
  std::vector<std::uint64_t> counts_;
  QuadratureSpec spec_{};
  std::uint64_t skipped_ = 0;
  bool deterministic_ = false;
  Eigen::MatrixXd mean_;
};

/// Samples both Dirichlet forms once and serves every form evaluation.
/// Stream ids: chemical 1, elastic pair (i, j) 16 + 4 i + j.
class CollisionFormSampler {
 public:
  CollisionFormSampler(std::shared_ptr<const StateSpace> space, KernelSuite kernels,
                       QuadratureSpec spec);

  const StateSpace& space() const { return *space_; }
  const KernelSuite& kernels() const { return kernels_; }
  const QuadratureSpec& spec() const { return spec_; }

  /// -1/4 sum_ij int B_ij mu_i mu_j* [dh][dpsi] over the 16 ordered pairs.
  const BlockQuadraticForm& elastic() const;
  /// -int H B_12^34 mu_1 mu_2* A(h) A(psi).
  const BlockQuadraticForm& chemical() const;
  const BlockQuadraticForm& total() const;
  const BlockQuadraticForm& form(FormPart part) const;

 private:
  std::shared_ptr<const StateSpace> space_;
  KernelSuite kernels_;
  QuadratureSpec spec_;
  mutable std::unique_ptr<BlockQuadraticForm> elastic_;
  mutable std::unique_ptr<BlockQuadraticForm> chemical_;
  mutable std::unique_ptr<BlockQuadraticForm> total_;
};

/// Assembles the elastic form contribution of the ordered pair (i, j).
BlockQuadraticForm assemble_elastic_pair(const StateSpace& space, const KernelSuite& kernels,
                                         int i, int j, const QuadratureSpec& spec);
BlockQuadraticForm assemble_chemical(const StateSpace& space, const KernelSuite& kernels,
                                     const QuadratureSpec& spec);

Estimate dirichlet_elastic(const CollisionFormSampler& sampler, const Perturbation& f);
Estimate dirichlet_chemical(const CollisionFormSampler& sampler, const Perturbation& f);
Estimate weak_form_elastic(const CollisionFormSampler& sampler, const Perturbation& F,
                           const Perturbation& psi);
Estimate weak_form_chemical(const CollisionFormSampler& sampler, const Perturbation& F,
                            const Perturbation& psi);

struct GalerkinMatrix {
  FormPart part = FormPart::Total;
  Eigen::MatrixXd entries;  // symmetrized
  Eigen::MatrixXd stderr_;  // per entry
  double max_asymmetry = 0.0;
  std::vector<std::string> labels;
};

/// M_ab = <L phi_a, phi_b> = 1/4 [Q(phi_a + phi_b) - Q(phi_a - phi_b)].
GalerkinMatrix assemble_galerkin(const CollisionFormSampler& sampler, const BasisSet& basis,
                                 FormPart part);

}  // namespace rgap
