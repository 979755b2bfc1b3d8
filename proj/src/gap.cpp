#include "rgap/gap.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rgap {

std::string to_string(CpsiConvention c) { return c == CpsiConvention::Step4 ? "step4" : "final"; }

CpsiConvention cpsi_convention_from_string(const std::string& name) {
  if (name == "step4") return CpsiConvention::Step4;
  if (name == "final") return CpsiConvention::Final;
  throw ParameterError("unknown C_psi convention '" + name + "' (expected step4 or final)");
}

double constant_Cnu(const MixtureConfig& config, const KernelSuite& kernels) {
  double c = 0.0;
  for (int i = 0; i < kSpecies; ++i) c = std::max(c, bound_constants(config, kernels, i).upper_bracket);
  return c;
}

double gamma_moment(const MixtureConfig& config, int i) {
  check_species(i);
  const double m = config.mass(i);
  const double gamma = config.gamma();
  auto f = [=](double r) { return std::pow(r, 2.0 + gamma) * std::exp(-0.5 * m * r * r); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double radial = GK::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 30, 1e-14);
  return config.concentration(i) * std::pow(m / (2.0 * std::numbers::pi), 1.5) * 4.0 *
         std::numbers::pi * radial;
}

double gamma_moment_closed_form(const MixtureConfig& config, int i) {
  check_species(i);
  const double gamma = config.gamma();
  return std::pow(2.0 / config.mass(i), 0.5 * gamma) * std::tgamma(0.5 * (gamma + 3.0)) /
         std::tgamma(1.5) * config.concentration(i);
}

double constant_Cb(const MixtureConfig& config, const KernelSuite& kernels) {
  const NuBounds nb = bound_constants(config, kernels, 0);
  return nb.lower * (config.concentration(0) + gamma_moment(config, 0));
}

CpsiValues constant_Cpsi(const StateSpace& space) {
  const Eigen::MatrixXd B = basis_matrix(space.elastic_basis());
  const Eigen::MatrixXd W = B.transpose() * space.weighted_gram() * B;
  CpsiValues v;
  v.max_abs = W.cwiseAbs().maxCoeff();
  v.step4 = 16.0 * v.max_abs;
  v.final = v.max_abs;
  return v;
}

Eigen::MatrixXd basis_matrix(const BasisSet& basis) {
  if (basis.size() == 0) return {};
  Eigen::MatrixXd K(basis.vectors[0].coeffs.size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) K.col(static_cast<Eigen::Index>(k)) = basis.vectors[k].coeffs;
  return K;
}

double restricted_gap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W, const Eigen::MatrixXd& K,
                      const Eigen::MatrixXd& metric) {
  const Eigen::Index dim = A.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(metric);
  if (llt.info() != Eigen::Success) throw NumericalError("metric Gram matrix is not positive definite");
  const Eigen::MatrixXd Lt = llt.matrixU();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Lt * K);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd Y = Q.rightCols(dim - K.cols());
  const Eigen::MatrixXd X = llt.matrixU().solve(Y);
  Eigen::MatrixXd a = -(X.transpose() * A * X);
  Eigen::MatrixXd w = X.transpose() * W * X;
  a = 0.5 * (a + a.transpose()).eval();
  w = 0.5 * (w + w.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, w);
  if (es.info() != Eigen::Success) {
    throw NumericalError("generalized eigensolver failed (weighted Gram matrix indefinite?)");
  }
  return es.eigenvalues()(0);
}

LambdaEl lambda_elastic(LambdaElMode mode, std::optional<double> user_value,
                        const CollisionFormSampler* sampler) {
  LambdaEl out;
  if (mode == LambdaElMode::User) {
    if (!user_value || !(*user_value > 0.0) || !std::isfinite(*user_value)) {
      throw ParameterError("lambda_EL must be a positive number in user mode");
    }
    out.value = *user_value;
    out.provenance = "user";
    return out;
  }
  if (!sampler) throw ParameterError("galerkin lambda_EL needs a form sampler");
  const StateSpace& space = sampler->space();
  if (space.degree() < 3) throw ParameterError("galerkin lambda_EL needs degree >= 3");
  const double gap = restricted_gap(sampler->elastic().mean(), space.weighted_gram(),
                                    basis_matrix(space.elastic_basis()), space.gram());
  if (!(gap > 0.0)) throw NumericalError("elastic Galerkin gap estimate is not positive");
  out.value = gap;
  out.provenance = "galerkin-estimate";
  out.degree = space.degree();
  out.seed = sampler->spec().seed;
  out.samples = sampler->spec().sample_count;
  return out;
}

GapSolution solve_gap(double C_b, double C_nu, double C_psi, double c_inf, double lambda_el) {
  for (double x : {C_b, C_nu, C_psi, c_inf, lambda_el}) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("gap constants must be positive");
  }
  GapSolution s;
  const double c4 = std::pow(c_inf, 4);
  const double D = C_b + 16.0 * C_nu * C_psi * c4;
  s.eta_limit = lambda_el / (16.0 * C_nu);
  s.gate = lambda_el * C_psi * c4 / D;
  s.gate_holds = s.gate <= 1.0;
  if (s.gate_holds) {
    s.eta = s.gate;
    if (!(s.eta < s.eta_limit)) throw NumericalError("eta violates eta < lambda_EL / (16 C_nu)");
    s.delta = std::min(1.0, s.eta * C_b / ((lambda_el - 16.0 * C_nu * s.eta) * C_psi * c4));
    s.lambda = lambda_el * C_b / (2.0 * D);
    return s;
  }
  // eta restricted to (0, min(1, lambda_EL / (16 C_nu))).
  s.fallback = true;
  const double hi = std::min(1.0, s.eta_limit);
  const int n = 1 << 14;
  double best = -1.0;
  for (int k = 1; k < n; ++k) {
    const double eta = hi * k / n;
    const double lam = std::min(0.5 * (lambda_el - 16.0 * C_nu * eta), eta * C_b / (2.0 * C_psi * c4));
    if (lam > best) {
      best = lam;
      s.eta = eta;
    }
  }
  s.delta = std::min(1.0, s.eta * C_b / ((lambda_el - 16.0 * C_nu * s.eta) * C_psi * c4));
  s.lambda = s.delta * (lambda_el - 16.0 * C_nu * s.eta) / 2.0;
  return s;
}

GapReport spectral_gap(const MixtureConfig& config, const KernelSuite& kernels,
                       const StateSpace& space, const LambdaEl& lambda_el,
                       CpsiConvention convention) {
  GapReport r;
  for (int i = 0; i < kSpecies; ++i) r.nu[i] = bound_constants(config, kernels, i);
  r.C_nu = 0.0;
  for (const auto& nb : r.nu) r.C_nu = std::max(r.C_nu, nb.upper_bracket);
  r.C_b_moment = config.concentration(0) + gamma_moment(config, 0);
  r.C_b = r.nu[0].lower * r.C_b_moment;
  r.cpsi = constant_Cpsi(space);
  r.convention = convention;
  r.C_psi = r.cpsi.select(convention);
  r.c_inf = config.total_concentration();
  r.lambda_el = lambda_el;
  r.solution = solve_gap(r.C_b, r.C_nu, r.C_psi, r.c_inf, lambda_el.value);
  return r;
}

SampleCheck check_sample(const CollisionFormSampler& sampler, double lambda, const Perturbation& f,
                         double sigmas) {
  const StateSpace& space = sampler.space();
  const Estimate lhs = sampler.total().quadratic(f.coeffs);
  const Perturbation r = f - space.project_full(f);
  SampleCheck s;
  s.lhs = lhs.value;
  s.lhs_stderr = lhs.std_error;
  s.rhs = -lambda * space.norm2_weighted(r);
  s.margin = s.rhs - s.lhs;
  // Rounding floor for directions where every sample vanishes.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + space.norm2_weighted(f));
  s.pass = s.margin + sigmas * s.lhs_stderr + floor >= 0.0;
  return s;
}

VerificationStats verify_gap(const CollisionFormSampler& sampler, double lambda,
                             std::uint64_t n_samples, std::uint64_t seed, double sigmas) {
  if (n_samples == 0) throw ParameterError("verification needs at least one sample");
  VerificationStats st;
  st.samples = n_samples;
  st.sigmas = sigmas;
  st.lambda = lambda;
  st.seed = seed;
  st.degree = sampler.space().degree();
  double worst = std::numeric_limits<double>::infinity();
  for (std::uint64_t k = 0; k < n_samples; ++k) {
    SampleCheck s = check_sample(sampler, lambda, sampler.space().random(seed, k), sigmas);
    s.index = k;
    if (!std::isfinite(s.margin)) throw NumericalError("non-finite verification margin");
    if (s.margin < worst) {
      worst = s.margin;
      st.worst = s;
    }
    if (!s.pass) {
      ++st.failures;
      st.violations.push_back(s);
    }
  }
  return st;
}

double galerkin_total_gap(const CollisionFormSampler& sampler) {
  const StateSpace& space = sampler.space();
  return restricted_gap(sampler.total().mean(), space.weighted_gram(),
                        basis_matrix(space.chemical_basis()), space.weighted_gram());
}

DecayResult decay_experiment(const CollisionFormSampler& sampler, double lambda, double t_max,
                             int steps, const Perturbation& initial, bool remove_kernel) {
  if (!(t_max > 0.0)) throw ParameterError("t_max must be positive");
  if (steps < 4) throw ParameterError("decay needs at least 4 steps");
  const StateSpace& space = sampler.space();
  space.check(initial);
  const Eigen::MatrixXd& M = sampler.total().mean();
  const Eigen::MatrixXd& Gw = space.weighted_gram();
  const Eigen::MatrixXd& P = space.projector_full();

  Eigen::VectorXd c = initial.coeffs;
  if (remove_kernel) {
    const Eigen::MatrixXd K = basis_matrix(space.chemical_basis());
    const Eigen::MatrixXd KtG = K.transpose() * Gw;
    c -= K * (KtG * K).ldlt().solve(KtG * c);
  }

  const double h = t_max / steps;
  const double g = 1.0 - 1.0 / std::sqrt(2.0);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Gw - g * h * M);

  DecayResult out;
  out.lambda = lambda;
  out.matrix_gap = galerkin_total_gap(sampler);
  auto record = [&](double t) {
    const Eigen::VectorXd r = c - P * c;
    DecayPoint p;
    p.t = t;
    p.norm = std::sqrt(std::max(0.0, r.dot(Gw * r)));
    p.energy_norm = std::sqrt(std::max(0.0, c.dot(Gw * c)));
    if (!std::isfinite(p.norm) || !std::isfinite(p.energy_norm)) {
      throw NumericalError("decay integration produced non-finite values at t = " + std::to_string(t));
    }
    out.trajectory.push_back(p);
  };
  record(0.0);
  for (int n = 1; n <= steps; ++n) {
    const Eigen::VectorXd k1 = lu.solve(M * c);
    const Eigen::VectorXd k2 = lu.solve(M * (c + (1.0 - g) * h * k1));
    c += h * ((1.0 - g) * k1 + g * k2);
    record(n * h);
  }

  // Least-squares slope of log ||f - pi f||_w over the second half.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& p : out.trajectory) {
    if (p.t < 0.5 * t_max || !(p.norm > 1e-250)) continue;
    const double y = std::log(p.norm);
    sx += p.t;
    sy += y;
    sxx += p.t * p.t;
    sxy += p.t * y;
    ++cnt;
  }
  if (cnt >= 2) {
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    out.fitted_rate = -slope;
  } else {
    out.fitted_rate = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace rgap
