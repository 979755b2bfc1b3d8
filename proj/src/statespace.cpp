#include "rgap/statespace.hpp"

#include "rgap/quadrature.hpp"

#include <Eigen/Cholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace rgap {

MonomialBasis::MonomialBasis(int degree) : degree_(degree) {
  if (degree < 0 || degree > kMaxDegree) throw ParameterError("polynomial degree must lie in [0, 16]");
  for (int d = 0; d <= degree; ++d) {
    for (int a = d; a >= 0; --a) {
      for (int b = d - a; b >= 0; --b) exponents_.push_back({a, b, d - a - b});
    }
  }
}

int MonomialBasis::index(int a, int b, int c) const {
  const int d = a + b + c;
  if (a < 0 || b < 0 || c < 0 || d > degree_) throw ParameterError("monomial outside the basis");
  // Offset of degree d, then position of (a, b) inside the block.
  int pos = d == 0 ? 0 : count(d - 1);
  for (int aa = d; aa > a; --aa) pos += d - aa + 1;
  pos += (d - a) - b;
  return pos;
}

void MonomialBasis::evaluate(const Vec3& v, double* out) const {
  // Powers up to degree, then products.
  double px[32], py[32], pz[32];
  if (degree_ >= 32) throw ParameterError("degree too large for monomial evaluation");
  px[0] = py[0] = pz[0] = 1.0;
  for (int k = 1; k <= degree_; ++k) {
    px[k] = px[k - 1] * v.x();
    py[k] = py[k - 1] * v.y();
    pz[k] = pz[k - 1] * v.z();
  }
  for (std::size_t a = 0; a < exponents_.size(); ++a) {
    const auto& e = exponents_[a];
    out[a] = px[e[0]] * py[e[1]] * pz[e[2]];
  }
}

double Perturbation::h(int i, const double* mono) const {
  const int n = monomials();
  double s = 0.0;
  const double* c = coeffs.data() + static_cast<std::ptrdiff_t>(i) * n;
  for (int a = 0; a < n; ++a) s += c[a] * mono[a];
  return s;
}

namespace {
void check_same(const Perturbation& a, const Perturbation& b) {
  if (a.degree != b.degree || a.tag != b.tag || a.coeffs.size() != b.coeffs.size()) {
    throw ParameterError("perturbations belong to different state spaces");
  }
}
}  // namespace

Perturbation& Perturbation::operator+=(const Perturbation& o) {
  check_same(*this, o);
  coeffs += o.coeffs;
  return *this;
}

Perturbation& Perturbation::operator-=(const Perturbation& o) {
  check_same(*this, o);
  coeffs -= o.coeffs;
  return *this;
}

Perturbation& Perturbation::operator*=(double s) {
  coeffs *= s;
  return *this;
}

Perturbation operator+(Perturbation a, const Perturbation& b) { return a += b; }
Perturbation operator-(Perturbation a, const Perturbation& b) { return a -= b; }
Perturbation operator*(double s, Perturbation a) { return a *= s; }

double gaussian_moment_1d(int n, double mass) {
  if (n < 0) throw ParameterError("moment order must be >= 0");
  if (n % 2 == 1) return 0.0;
  const auto rule = gaussian_nodes(std::max(2, n / 2 + 1), mass);
  double s = 0.0, w = 0.0;
  for (const auto& [x, wt] : rule) {
    s += wt * std::pow(x, n);
    w += wt;
  }
  return s / w;
}

double weighted_radial_moment(int n, double gamma, double mass) {
  if (n < 0) throw ParameterError("radial moment order must be >= 0");
  if (!(mass > 0.0)) throw ParameterError("mass must be positive");
  // r = t / sqrt(m) puts the Gaussian scale at 1.
  const double inv_m = 1.0 / mass;
  auto f = [=](double t) {
    return std::pow(t, n + 2) * std::pow(1.0 + t * t * inv_m, 0.5 * gamma) * std::exp(-0.5 * t * t);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  double err = 0.0;
  const double split = std::min(1.0, std::sqrt(mass));
  double s = GK::integrate(f, 0.0, split, 30, 1e-14, &err);
  s += GK::integrate(f, split, 12.0 + std::sqrt(2.0 * n), 30, 1e-14, &err);
  s += GK::integrate(f, 12.0 + std::sqrt(2.0 * n), std::numeric_limits<double>::infinity(), 30,
                     1e-14, &err);
  return s * std::pow(mass, -0.5 * (n + 3));
}

ChemicalNormForms chemical_norm_forms(const MixtureConfig& config) {
  const double c1 = config.concentration(0), c2 = config.concentration(1);
  const double c3 = config.concentration(2), c4 = config.concentration(3);
  const double E = config.binding_energy();
  const double cinf = config.total_concentration();
  ChemicalNormForms f;
  f.c1234 = (c1 + c3) / (c2 + c4) * (c2 * c4) / (c1 * c3);
  const double c = f.c1234;
  const double A = c1 * c3 / (c1 + c3);
  const double B = c2 * c4 / (c2 + c4);
  f.norm1 = c1 + c3;
  f.norm2 = c2 + c4;
  f.norm_momentum = config.total_density();
  f.norm3_a = A * (1.0 + c);
  f.norm3_b = B * (1.0 + c) / c;
  f.norm7_a = 1.5 * cinf + A * c / (1.0 + c) * E * E;
  f.norm7_b = 1.5 * cinf + B / (1.0 + c) * E * E;
  return f;
}

StateSpace::StateSpace(const MixtureConfig& config, int degree)
    : config_(config), basis_(degree) {
  if (degree < 2) throw ParameterError("state space degree must be >= 2 to contain the kernels");
  if (2 * degree > kMaxSphereDegree) throw ParameterError("state space degree too large");
  const int N = basis_.size();
  const int dim = kSpecies * N;
  gram_ = Eigen::MatrixXd::Zero(dim, dim);
  weighted_gram_ = Eigen::MatrixXd::Zero(dim, dim);

  // Angular moments int_{S^2} sigma^k dsigma on an exact rule.
  const SphereRule sph = sphere_rule(std::max(2, 2 * degree));
  auto angular = [&](int a, int b, int c) {
    if ((a | b | c) & 1) return 0.0;
    double s = 0.0;
    for (std::size_t q = 0; q < sph.size(); ++q) {
      const Vec3& x = sph.nodes[q];
      s += sph.weights[q] * std::pow(x.x(), a) * std::pow(x.y(), b) * std::pow(x.z(), c);
    }
    return s;
  };

  for (int i = 0; i < kSpecies; ++i) {
    const double m = config.mass(i);
    const double ci = config.concentration(i);
    std::vector<double> mom(2 * degree + 1);
    for (int k = 0; k <= 2 * degree; ++k) mom[k] = gaussian_moment_1d(k, m);
    std::vector<double> radial(2 * degree + 1);
    for (int k = 0; k <= 2 * degree; k += 2) radial[k] = weighted_radial_moment(k, config.gamma(), m);
    const double norm = ci * std::pow(m / (2.0 * std::numbers::pi), 1.5);
    for (int a = 0; a < N; ++a) {
      for (int b = a; b < N; ++b) {
        const auto& ea = basis_.exponent(a);
        const auto& eb = basis_.exponent(b);
        const int x = ea[0] + eb[0], y = ea[1] + eb[1], z = ea[2] + eb[2];
        const double g = ci * mom[x] * mom[y] * mom[z];
        double gw = 0.0;
        if (!((x | y | z) & 1)) gw = norm * angular(x, y, z) * radial[x + y + z];
        gram_(i * N + a, i * N + b) = gram_(i * N + b, i * N + a) = g;
        weighted_gram_(i * N + a, i * N + b) = weighted_gram_(i * N + b, i * N + a) = gw;
      }
    }
  }

  // Elastic kernel basis.
  const double cinf = config.total_concentration();
  const double rho = config.total_density();
  const int i0 = basis_.index(0, 0, 0);
  const std::array<int, 3> lin{basis_.index(1, 0, 0), basis_.index(0, 1, 0), basis_.index(0, 0, 1)};
  const std::array<int, 3> sq{basis_.index(2, 0, 0), basis_.index(0, 2, 0), basis_.index(0, 0, 2)};
  auto set = [&](Perturbation& p, int i, int a, double v) { p.coeffs[i * N + a] = v; };

  for (int k = 0; k < kSpecies; ++k) {
    Perturbation p = zero();
    set(p, k, i0, 1.0 / std::sqrt(config.concentration(k)));
    elastic_basis_.vectors.push_back(p);
    elastic_basis_.labels.push_back("phiEL" + std::to_string(k + 1));
  }
  for (int l = 0; l < 3; ++l) {
    Perturbation p = zero();
    for (int i = 0; i < kSpecies; ++i) set(p, i, lin[l], config.mass(i) / std::sqrt(rho));
    elastic_basis_.vectors.push_back(p);
    elastic_basis_.labels.push_back("phiEL" + std::to_string(5 + l));
  }
  {
    Perturbation p = zero();
    const double s = 1.0 / (std::sqrt(6.0) * std::sqrt(cinf));
    for (int i = 0; i < kSpecies; ++i) {
      set(p, i, i0, -3.0 * s);
      for (int l = 0; l < 3; ++l) set(p, i, sq[l], config.mass(i) * s);
    }
    elastic_basis_.vectors.push_back(p);
    elastic_basis_.labels.push_back("phiEL8");
  }
  elastic_basis_.closed_form_norm2.assign(8, 1.0);

  // Chemical basis: Gram-Schmidt on the seven collision invariants in order.
  std::vector<Perturbation> raw;
  {
    Perturbation p1 = zero(), p2 = zero(), p3 = zero();
    set(p1, 0, i0, 1.0);
    set(p1, 2, i0, 1.0);
    set(p2, 1, i0, 1.0);
    set(p2, 3, i0, 1.0);
    set(p3, 0, i0, 1.0);
    set(p3, 3, i0, 1.0);
    raw = {p1, p2, p3};
    for (int l = 0; l < 3; ++l) {
      Perturbation p = zero();
      for (int i = 0; i < kSpecies; ++i) set(p, i, lin[l], config.mass(i));
      raw.push_back(p);
    }
    Perturbation p7 = zero();
    for (int i = 0; i < kSpecies; ++i) {
      set(p7, i, i0, config.energy(i));
      for (int l = 0; l < 3; ++l) set(p7, i, sq[l], 0.5 * config.mass(i));
    }
    raw.push_back(p7);
  }
  const ChemicalNormForms nf = chemical_norm_forms(config);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    Perturbation p = raw[k];
    for (const auto& q : chemical_basis_.vectors) p -= (inner(raw[k], q) / norm2(q)) * q;
    if (!(norm2(p) > 1e-14 * norm2(raw[k]))) {
      throw NumericalError("chemical kernel basis is degenerate");
    }
    chemical_basis_.vectors.push_back(p);
    chemical_basis_.labels.push_back("phiCH" + std::to_string(k + 1));
  }
  chemical_basis_.closed_form_norm2 = {nf.norm1,         nf.norm2,         nf.norm3_a,
                                       nf.norm_momentum, nf.norm_momentum, nf.norm_momentum,
                                       nf.norm7_a};

  // Closed-form orthogonal vectors.
  {
    const double c1 = config.concentration(0), c2 = config.concentration(1);
    const double c3 = config.concentration(2), c4 = config.concentration(3);
    const double c = nf.c1234;
    const double E = config.binding_energy();
    Perturbation q3 = zero();
    set(q3, 0, i0, c3 / (c1 + c3));
    set(q3, 1, i0, -c4 / (c2 + c4));
    set(q3, 2, i0, -c1 / (c1 + c3));
    set(q3, 3, i0, c2 / (c2 + c4));
    Perturbation q7 = zero();
    const std::array<double, kSpecies> corr{-c3 / (c1 + c3) * c / (1.0 + c),
                                            -c4 / (c2 + c4) / (1.0 + c),
                                            c1 / (c1 + c3) * c / (1.0 + c),
                                            c2 / (c2 + c4) / (1.0 + c)};
    for (int i = 0; i < kSpecies; ++i) {
      set(q7, i, i0, -1.5 + E * corr[i]);
      for (int l = 0; l < 3; ++l) set(q7, i, sq[l], 0.5 * config.mass(i));
    }
    chemical_closed_.vectors = {raw[0], raw[1], q3, raw[3], raw[4], raw[5], q7};
    chemical_closed_.labels = chemical_basis_.labels;
    chemical_closed_.closed_form_norm2 = chemical_basis_.closed_form_norm2;
  }

  // Projectors in coefficient space.
  proj_el_ = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& p : elastic_basis_.vectors) proj_el_ += p.coeffs * (gram_ * p.coeffs).transpose();
  proj_full_ = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& p : chemical_basis_.vectors) {
    proj_full_ += p.coeffs * (gram_ * p.coeffs).transpose() / norm2(p);
  }
}

Perturbation StateSpace::zero() const {
  Perturbation p;
  p.coeffs = Eigen::VectorXd::Zero(dimension());
  p.degree = degree();
  p.tag = config_.tag();
  return p;
}

Perturbation StateSpace::from_coefficients(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != dimension()) throw ParameterError("coefficient vector has the wrong size");
  Perturbation p = zero();
  p.coeffs = coeffs;
  return p;
}

Perturbation StateSpace::lift(const Perturbation& f) const {
  if (f.tag != config_.tag()) throw ParameterError("perturbation built for a different mixture");
  if (f.degree > degree()) throw ParameterError("perturbation degree exceeds the state space");
  Perturbation p = zero();
  const int n = f.monomials();
  const int N = monomial_count();
  for (int i = 0; i < kSpecies; ++i) p.coeffs.segment(i * N, n) = f.coeffs.segment(i * n, n);
  return p;
}

void StateSpace::check(const Perturbation& f) const {
  if (f.tag != config_.tag()) throw ParameterError("perturbation built for a different mixture");
  if (f.degree != degree() || f.coeffs.size() != dimension()) {
    throw ParameterError("perturbation degree does not match the state space");
  }
}

double StateSpace::inner(const Perturbation& f, const Perturbation& g) const {
  check(f);
  check(g);
  return f.coeffs.dot(gram_ * g.coeffs);
}

double StateSpace::inner_weighted(const Perturbation& f, const Perturbation& g) const {
  check(f);
  check(g);
  return f.coeffs.dot(weighted_gram_ * g.coeffs);
}

KernelCoordsEL StateSpace::coordinates_EL(const Perturbation& f) const {
  check(f);
  std::array<double, 8> a{};
  for (int k = 0; k < 8; ++k) a[k] = inner(f, elastic_basis_.vectors[k]);
  const double cinf = config_.total_concentration();
  const double rho = config_.total_density();
  const double s = 1.0 / (std::sqrt(6.0) * std::sqrt(cinf));
  KernelCoordsEL c;
  for (int i = 0; i < kSpecies; ++i) c.n[i] = a[i] / std::sqrt(config_.concentration(i)) - 3.0 * a[7] * s;
  for (int l = 0; l < 3; ++l) c.u[l] = a[4 + l] / std::sqrt(rho);
  c.e = 2.0 * a[7] * s;
  return c;
}

Perturbation StateSpace::from_coordinates(const KernelCoordsEL& coords) const {
  Perturbation p = zero();
  const int N = monomial_count();
  const int i0 = basis_.index(0, 0, 0);
  const std::array<int, 3> lin{basis_.index(1, 0, 0), basis_.index(0, 1, 0), basis_.index(0, 0, 1)};
  const std::array<int, 3> sq{basis_.index(2, 0, 0), basis_.index(0, 2, 0), basis_.index(0, 0, 2)};
  for (int i = 0; i < kSpecies; ++i) {
    const double m = config_.mass(i);
    p.coeffs[i * N + i0] = coords.n[i];
    for (int l = 0; l < 3; ++l) {
      p.coeffs[i * N + lin[l]] = m * coords.u[l];
      p.coeffs[i * N + sq[l]] = 0.5 * m * coords.e;
    }
  }
  return p;
}

Perturbation StateSpace::project_EL(const Perturbation& f) const {
  check(f);
  Perturbation p = zero();
  p.coeffs = proj_el_ * f.coeffs;
  return p;
}

Perturbation StateSpace::project_full(const Perturbation& f) const {
  check(f);
  Perturbation p = zero();
  p.coeffs = proj_full_ * f.coeffs;
  return p;
}

ProjectionGap StateSpace::projection_gap_identity(const Perturbation& f) const {
  const Perturbation pel = project_EL(f);
  const Perturbation pf = project_full(f);
  ProjectionGap r;
  r.lhs = norm2(pel) - norm2(pf);
  r.energy = energy_functional(coordinates_EL(f), config_);
  const ChemicalNormForms nf = chemical_norm_forms(config_);
  const double c1 = config_.concentration(0), c3 = config_.concentration(2);
  const double K = c1 * c3 / (c1 + c3) * nf.c1234 / (1.0 + nf.c1234);
  const double cinf = config_.total_concentration();
  const double E = config_.binding_energy();
  r.rhs = 1.5 * cinf * K / (1.5 * cinf + K * E * E) * r.energy;
  r.bound = std::pow(cinf, 4) * r.energy;
  return r;
}

Perturbation StateSpace::random(std::uint64_t seed, std::uint64_t index) const {
  std::mt19937_64 rng(substream_seed(seed, 7, index));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Perturbation p = zero();
  for (int k = 0; k < dimension(); ++k) p.coeffs[k] = u(rng);
  return p;
}

double energy_functional(const KernelCoordsEL& c, const MixtureConfig& config) {
  const double d = c.n[3] + c.n[2] - c.n[1] - c.n[0] - c.e * config.binding_energy();
  return d * d;
}

}  // namespace rgap
