#pragma once

#include "rgap/common.hpp"
#include "rgap/mixture.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace rgap {

/// Monomials v1^a v2^b v3^c of total degree <= D in graded lexicographic
/// order, so the degree-d monomials are a prefix of the degree-D list.
class MonomialBasis {
 public:
  explicit MonomialBasis(int degree);

  static constexpr int kMaxDegree = 16;

  static int count(int degree) { return (degree + 1) * (degree + 2) * (degree + 3) / 6; }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::array<int, 3>& exponent(int a) const { return exponents_[a]; }
  int index(int a, int b, int c) const;

  /// Writes the size() monomial values at v into out.
  void evaluate(const Vec3& v, double* out) const;

 private:
  int degree_;
  std::vector<std::array<int, 3>> exponents_;
};

/// f_i = h_i mu_i with h_i a polynomial of degree <= D. Coefficients are
/// stored species-major: entry i * N + a multiplies monomial a in h_i.
struct Perturbation {
  Eigen::VectorXd coeffs;
  int degree = 0;
  std::uint64_t tag = 0;

  int monomials() const { return MonomialBasis::count(degree); }
  double coefficient(int i, int a) const { return coeffs[i * monomials() + a]; }
  /// h_i at a point, given its monomial values.
  double h(int i, const double* mono) const;

  Perturbation& operator+=(const Perturbation& o);
  Perturbation& operator-=(const Perturbation& o);
  Perturbation& operator*=(double s);
};

Perturbation operator+(Perturbation a, const Perturbation& b);
Perturbation operator-(Perturbation a, const Perturbation& b);
Perturbation operator*(double s, Perturbation a);

struct KernelCoordsEL {
  std::array<double, kSpecies> n{};
  Vec3 u = Vec3::Zero();
  double e = 0.0;
};

struct BasisSet {
  std::vector<Perturbation> vectors;
  std::vector<std::string> labels;
  /// Closed-form squared norms; NaN when none is known.
  std::vector<double> closed_form_norm2;

  std::size_t size() const { return vectors.size(); }
};

/// Both closed-form expressions for the chemical norms.
struct ChemicalNormForms {
  double c1234 = 0.0;  // (c1 + c3)/(c2 + c4) * c2 c4 / (c1 c3)
  double norm1 = 0.0, norm2 = 0.0, norm_momentum = 0.0;
  double norm3_a = 0.0, norm3_b = 0.0;
  double norm7_a = 0.0, norm7_b = 0.0;
};

ChemicalNormForms chemical_norm_forms(const MixtureConfig& config);

struct ProjectionGap {
  double lhs = 0.0;    // ||pi_EL f||^2 - ||pi f||^2
  double rhs = 0.0;    // closed form times E(pi_EL f)
  double bound = 0.0;  // c_inf^4 E(pi_EL f)
  double energy = 0.0;
};

/// Polynomial state space of degree D over a fixed mixture: exact Gram
/// matrices, kernel bases and the two projections.
class StateSpace {
 public:
  StateSpace(const MixtureConfig& config, int degree);

  const MixtureConfig& config() const { return config_; }
  const MonomialBasis& monomials() const { return basis_; }
  int degree() const { return basis_.degree(); }
  int dimension() const { return kSpecies * basis_.size(); }
  int monomial_count() const { return basis_.size(); }

  /// Unweighted Gram matrix: sum_i int h_i g_i mu_i dv.
  const Eigen::MatrixXd& gram() const { return gram_; }
  /// Weighted Gram matrix with the <v>^gamma factor.
  const Eigen::MatrixXd& weighted_gram() const { return weighted_gram_; }

  Perturbation zero() const;
  /// Species i carries the polynomial with the given (monomial index, value) pairs.
  Perturbation from_coefficients(const Eigen::VectorXd& coeffs) const;
  /// Re-expresses f (any degree <= this degree) in this space.
  Perturbation lift(const Perturbation& f) const;
  void check(const Perturbation& f) const;

  double inner(const Perturbation& f, const Perturbation& g) const;
  double inner_weighted(const Perturbation& f, const Perturbation& g) const;
  double norm2(const Perturbation& f) const { return inner(f, f); }
  double norm2_weighted(const Perturbation& f) const { return inner_weighted(f, f); }

  const BasisSet& elastic_basis() const { return elastic_basis_; }
  const BasisSet& chemical_basis() const { return chemical_basis_; }
  /// Closed-form orthogonal chemical vectors.
  const BasisSet& chemical_closed_form() const { return chemical_closed_; }

  KernelCoordsEL coordinates_EL(const Perturbation& f) const;
  Perturbation from_coordinates(const KernelCoordsEL& coords) const;
  Perturbation project_EL(const Perturbation& f) const;
  Perturbation project_full(const Perturbation& f) const;

  /// Coefficient-space projectors (pi(f).coeffs = P f.coeffs).
  const Eigen::MatrixXd& projector_EL() const { return proj_el_; }
  const Eigen::MatrixXd& projector_full() const { return proj_full_; }

  ProjectionGap projection_gap_identity(const Perturbation& f) const;

  /// Coefficients drawn i.i.d. uniform on [-1, 1] from substream (seed, 7, index).
  Perturbation random(std::uint64_t seed, std::uint64_t index) const;

 private:
  MixtureConfig config_;
  MonomialBasis basis_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd weighted_gram_;
  BasisSet elastic_basis_;
  BasisSet chemical_basis_;
  BasisSet chemical_closed_;
  Eigen::MatrixXd proj_el_;
  Eigen::MatrixXd proj_full_;
};

/// (n4 + n3 - n2 - n1 - e E_12^34)^2.
double energy_functional(const KernelCoordsEL& coords, const MixtureConfig& config);

/// int_0^inf r^{n+2} (1 + r^2)^{gamma/2} exp(-m r^2 / 2) dr by adaptive Gauss-Kronrod.
double weighted_radial_moment(int n, double gamma, double mass);

/// Exact Gaussian moment int x^n exp(-m x^2/2) dx / sqrt(2 pi / m) via a Gauss rule.
double gaussian_moment_1d(int n, double mass);

}  // namespace rgap
