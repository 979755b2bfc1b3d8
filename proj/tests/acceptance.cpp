// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "rgap/forms.hpp"
#include "rgap/frequency.hpp"
#include "rgap/gap.hpp"
#include "rgap/kinematics.hpp"
#include "rgap/scenario.hpp"
#include "rgap/statespace.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace rgap;

namespace {

// Pinned tolerances.
constexpr double kConservationTol = 1e-11;
constexpr double kMicroTol = 1e-12;
constexpr double kMomentTol = 1e-10;
constexpr double kBasisTol = 1e-10;
constexpr double kSigmas = 4.0;
constexpr double kProjectionTol = 1e-9;
constexpr double kDecayAbsTol = 1e-3;
constexpr double kDecayRelTol = 0.05;
constexpr double kClosedFormTol = 1e-15;
constexpr std::uint64_t kFormSamples = std::uint64_t{1} << 20;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool within = secs <= limit_s;
  const bool pass = o.pass && within;
  if (!pass) ++failures;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2fs/%.0fs", secs, limit_s);
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << " ["
            << buf << (within ? "" : " over time budget") << "]" << std::endl;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// Random mixture with mass ratios up to 1e3 and a nonnegative binding energy.
MixtureConfig random_mixture(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lg(0.0, 3.0), u(0.0, 1.0);
  const double m1 = std::pow(10.0, lg(rng)), m2 = std::pow(10.0, lg(rng));
  const double total = m1 + m2;
  const double lo = std::max(total / 1001.0, std::max(m1, m2) / 1000.0);
  const double m3 = lo + (total - 2 * lo) * u(rng);
  const double m4 = total - m3;
  const double e1 = u(rng), e2 = u(rng), e3 = u(rng);
  const double e4 = std::max(0.0, e1 + e2 - e3) + 2.0 * u(rng);
  return MixtureConfig::from_mass_action({m1, m2, m3, m4}, {e1, e2, e3, e4}, 0.5 + u(rng), 0.5 + u(rng),
                                         0.5 + u(rng), u(rng));
}

Outcome criterion_conservation() {
  std::mt19937_64 rng(0xC0FFEE);
  std::normal_distribution<double> n;
  double worst_el = 0.0, worst_ch = 0.0;
  std::uint64_t reactive = 0;
  for (int c = 0; c < 100; ++c) {
    const MixtureConfig cfg = random_mixture(rng);
    for (int k = 0; k < 1000; ++k) {
      const int i = k % 4, j = (k / 4) % 4;
      const double si = 3.0 / std::sqrt(cfg.mass(i)), sj = 3.0 / std::sqrt(cfg.mass(j));
      const Vec3 v(si * n(rng), si * n(rng), si * n(rng)), vs(sj * n(rng), sj * n(rng), sj * n(rng));
      const Vec3 sigma = Vec3(n(rng), n(rng), n(rng)).normalized();
      const double mi = cfg.mass(i), mj = cfg.mass(j);
      const auto p = elastic_post(v, vs, sigma, mi, mj);
      const double pscale = mi * v.norm() + mj * vs.norm();
      const double e0 = 0.5 * (mi * v.squaredNorm() + mj * vs.squaredNorm());
      worst_el = std::max({worst_el, (mi * v + mj * vs - mi * p.v - mj * p.vs).norm() / pscale,
                           std::abs(e0 - 0.5 * (mi * p.v.squaredNorm() + mj * p.vs.squaredNorm())) / e0});

      const auto q = ReactionQuadruple::for_species(i);
      // Lift the relative speed above threshold for the endothermic direction.
      Vec3 w = vs;
      if (const double thr = 2.0 * std::max(0.0, q.energy_gap(cfg)) / cfg.reduced_mass(q.i(), q.j()); thr > 0.0) {
        w = vs - std::sqrt(thr) * (1.0 + std::abs(n(rng))) * sigma;
      }
      const auto r = reactive_post(v, w, sigma, q, cfg);
      if (!r) continue;
      ++reactive;
      const double a = cfg.mass(q.i()), b = cfg.mass(q.j()), h = cfg.mass(q.h()), kk = cfg.mass(q.k());
      const double ps = a * v.norm() + b * w.norm();
      const double in = 0.5 * (a * v.squaredNorm() + b * w.squaredNorm()) + cfg.energy(q.i()) + cfg.energy(q.j());
      const double out = 0.5 * (h * r->v.squaredNorm() + kk * r->vs.squaredNorm()) + cfg.energy(q.h()) + cfg.energy(q.k());
      worst_ch = std::max({worst_ch, (a * v + b * w - h * r->v - kk * r->vs).norm() / ps, std::abs(in - out) / in});
    }
  }
  const bool ok = worst_el <= kConservationTol && worst_ch <= kConservationTol && reactive >= 90000;
  return {ok, "1e5 collisions, " + std::to_string(reactive) + " reactive; worst elastic " + sci(worst_el) +
                  ", reactive " + sci(worst_ch)};
}

Outcome criterion_microreversibility() {
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, worst_trip = 0.0;
  for (int c = 0; c < 10; ++c) {
    const MixtureConfig cfg = random_mixture(rng);
    const auto pair = ReactiveKernelPair::create(cfg, 0.5 + u(rng), AngularPart::abs_cos_sin());
    const double g0 = std::sqrt(2.0 * cfg.binding_energy() / cfg.reduced_mass_12());
    for (int k = 0; k < 1000; ++k) {
      const double g = g0 * (1.0 + 1e-9) + 10.0 * u(rng) / std::sqrt(cfg.reduced_mass_12());
      worst = std::max(worst, std::abs(microreversibility_residual(pair, g, 2.0 * u(rng) - 1.0, cfg)));
      const auto q = ReactionQuadruple::forward();
      const double go = *outgoing_relative_speed(g, q, cfg);
      worst_trip = std::max(worst_trip, std::abs(*outgoing_relative_speed(go, q.reversed(), cfg) - g) / g);
    }
  }
  return {worst <= kMicroTol && worst_trip <= kMicroTol,
          "1e4 samples; worst residual " + sci(worst) + ", round trip " + sci(worst_trip)};
}

Outcome criterion_moments(const Scenario& s) {
  double worst = 0.0;
  for (int i = 0; i < kSpecies; ++i) {
    const double m = s.config.mass(i), c = s.config.concentration(i);
    const auto r = gaussian_nodes(6, m);
    const double norm = c * std::pow(m / (2.0 * std::numbers::pi), 1.5);
    double m0 = 0, m2 = 0, m4 = 0;
    for (const auto& a : r)
      for (const auto& b : r)
        for (const auto& d : r) {
          const double w = a.weight * b.weight * d.weight * norm;
          const double r2 = a.node * a.node + b.node * b.node + d.node * d.node;
          m0 += w;
          m2 += w * r2;
          m4 += w * r2 * r2;
        }
    worst = std::max({worst, std::abs(m0 / c - 1), std::abs(m2 * m / (3 * c) - 1), std::abs(m4 * m * m / (15 * c) - 1)});
  }
  return {worst <= kMomentTol, "worst relative error " + sci(worst)};
}

Outcome criterion_bases(const StateSpace& space) {
  const Eigen::MatrixXd B = basis_matrix(space.elastic_basis());
  const double el = (B.transpose() * space.gram() * B - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff();
  const BasisSet& gs = space.chemical_basis();
  const BasisSet& cf = space.chemical_closed_form();
  double vec = 0.0, nrm = 0.0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    vec = std::max(vec, (gs.vectors[k].coeffs - cf.vectors[k].coeffs).cwiseAbs().maxCoeff());
    nrm = std::max(nrm, std::abs(space.norm2(gs.vectors[k]) - gs.closed_form_norm2[k]) / gs.closed_form_norm2[k]);
  }
  const ChemicalNormForms nf = chemical_norm_forms(space.config());
  const double alt = std::max(std::abs(nf.norm3_a - nf.norm3_b) / nf.norm3_a, std::abs(nf.norm7_a - nf.norm7_b) / nf.norm7_a);
  const bool ok = el <= kBasisTol && vec <= kBasisTol && nrm <= kBasisTol && alt <= kBasisTol;
  return {ok, "elastic Gram " + sci(el) + ", vectors " + sci(vec) + ", norms " + sci(nrm) + ", alternative forms " + sci(alt)};
}

Outcome criterion_annihilation(const CollisionFormSampler& sampler) {
  const StateSpace& space = sampler.space();
  double worst = 0.0;  // |value| / max(1e-10, 4 stderr)
  for (const auto& phi : space.elastic_basis().vectors) {
    const Estimate e = sampler.elastic().quadratic(phi.coeffs);
    worst = std::max(worst, std::abs(e.value) / std::max(1e-10, kSigmas * e.std_error));
  }
  for (const auto& phi : space.chemical_basis().vectors) {
    const Estimate e = sampler.total().quadratic(phi.coeffs);
    worst = std::max(worst, std::abs(e.value) / std::max(1e-10, kSigmas * e.std_error));
  }
  return {worst <= 1.0, std::to_string(sampler.spec().sample_count) + " samples per form; worst |Q|/tolerance " + sci(worst)};
}

Outcome criterion_weak_forms(const CollisionFormSampler& sampler, std::uint64_t seed) {
  const StateSpace& space = sampler.space();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  double worst = 0.0;
  int checks = 0;
  auto test = [&](const Estimate& e) {
    worst = std::max(worst, std::abs(e.value) / std::max(1e-10, kSigmas * e.std_error));
    ++checks;
  };
  for (std::uint64_t k = 0; k < 3; ++k) {
    const Perturbation F = space.random(seed, 2000 + k);
    std::vector<Perturbation> psis = space.chemical_basis().vectors;
    Perturbation mix = space.zero();
    for (const auto& p : space.chemical_basis().vectors) mix += n(rng) * p;
    psis.push_back(mix);
    for (const auto& psi : psis) {
      test(weak_form_elastic(sampler, F, psi));
      test(weak_form_chemical(sampler, F, psi));
    }
  }
  return {worst <= 1.0, std::to_string(checks) + " weak-form evaluations; worst |value|/tolerance " + sci(worst)};
}

Outcome criterion_nu(const Scenario& s) {
  const std::vector<double> grid = parse_grid("0:10:0.25");
  QuadratureSpec spec = s.quadrature;
  spec.sample_count = s.nu_samples;
  spec.block_size = s.nu_samples / 16;
  std::vector<Vec3> dirs;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        if (a || b || c) dirs.push_back(Vec3(a, b, c).normalized());
  std::uint64_t rows = 0, violations = 0;
  for (int i = 0; i < kSpecies; ++i) {
    const NuBounds nb = bound_constants(s.config, s.kernels, i);
    for (double speed : grid) {
      const double w = std::pow(1.0 + speed * speed, 0.5 * s.config.gamma());
      const auto& ds = speed == 0.0 ? std::vector<Vec3>{Vec3::UnitZ()} : dirs;
      for (const Vec3& d : ds) {
        const Estimate e = nu_chemical(s.config, s.kernels, i, speed * d, spec);
        ++rows;
        const double tol = kSigmas * e.std_error;
        if (e.value < nb.lower_bracket * w - tol || e.value > nb.upper_bracket * w + tol) {
          ++violations;
          std::cout << "BOUND-VIOLATION species=" << i + 1 << " speed=" << speed << " nu=" << e.value << "\n";
        }
      }
    }
  }
  return {violations == 0, std::to_string(rows) + " rows, " + std::to_string(violations) + " outside the bracket"};
}

Outcome criterion_projection(const StateSpace& space, std::uint64_t seed) {
  double worst = 0.0, bound_ratio = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const ProjectionGap g = space.projection_gap_identity(space.random(seed, k));
    worst = std::max(worst, std::abs(g.lhs - g.rhs) / (1.0 + std::abs(g.lhs)));
    bound_ratio = std::max(bound_ratio, g.lhs / g.bound);
  }
  return {worst <= kProjectionTol && bound_ratio <= 1.0,
          "100 samples; worst scaled difference " + sci(worst) + ", max lhs/(c_inf^4 E) " + sci(bound_ratio)};
}

Outcome criterion_coercivity(const CollisionFormSampler& sampler, const GapReport& r, const Scenario& s) {
  const VerificationStats st = verify_gap(sampler, r.lambda(), s.verify_samples, s.verify_seed, kSigmas);
  return {st.pass() && st.samples == 500,
          "lambda " + sci(r.lambda()) + " (lambda_EL " + sci(r.lambda_el.value) + "), " + std::to_string(st.failures) +
              "/" + std::to_string(st.samples) + " failures, worst margin " + sci(st.worst.margin)};
}

Outcome criterion_decay(const CollisionFormSampler& sampler, const GapReport& r, const Scenario& s) {
  const DecayResult d = decay_experiment(sampler, r.lambda(), s.t_max, s.steps, sampler.space().random(s.verify_seed, 0));
  const double rel = std::abs(d.fitted_rate - d.matrix_gap) / d.matrix_gap;
  return {d.fitted_rate >= r.lambda() - kDecayAbsTol && rel <= kDecayRelTol,
          "fitted rate " + sci(d.fitted_rate) + ", matrix gap " + sci(d.matrix_gap) + ", relative difference " + sci(rel)};
}

Outcome criterion_closed_form() {
  const GapSolution s = solve_gap(1, 1, 1, 1, 1);
  const double err = std::abs(s.lambda - 1.0 / 34.0);
  return {s.gate_holds && !s.fallback && std::abs(s.gate - 1.0 / 17.0) <= kClosedFormTol && err <= kClosedFormTol,
          "gate " + sci(s.gate) + ", |lambda - 1/34| " + sci(err)};
}

}  // namespace

int main() {
  const Scenario s = default_scenario();
  std::cout << "scenario " << hex64(s.hash) << ", seed " << hex64(s.quadrature.seed) << std::endl;
  const auto space = std::make_shared<const StateSpace>(s.config, s.degree);

  report(1, "kinematics conservation", 10, criterion_conservation);
  report(2, "micro-reversibility", 5, criterion_microreversibility);
  report(3, "moment identities", 1, [&] { return criterion_moments(s); });
  report(4, "basis structure", 1, [&] { return criterion_bases(*space); });

  QuadratureSpec big = s.quadrature;
  big.sample_count = kFormSamples;
  const CollisionFormSampler large(space, s.kernels, big);
  report(5, "kernel annihilation", 300, [&] { return criterion_annihilation(large); });
  report(6, "collision invariants", 300, [&] { return criterion_weak_forms(large, s.verify_seed); });
  report(7, "nu sandwich", 600, [&] { return criterion_nu(s); });
  report(8, "projection-difference identity", 30, [&] { return criterion_projection(*space, s.verify_seed); });

  const CollisionFormSampler sampler(space, s.kernels, s.quadrature);
  std::unique_ptr<GapReport> gap;
  report(9, "coercivity inequality", 3600, [&] {
    const LambdaEl lel = lambda_elastic(LambdaElMode::Galerkin, std::nullopt, &sampler);
    gap = std::make_unique<GapReport>(spectral_gap(s.config, s.kernels, *space, lel, s.convention));
    return criterion_coercivity(sampler, *gap, s);
  });
  report(10, "decay consistency", 300, [&] {
    if (!gap) return Outcome{false, "no gap report"};
    return criterion_decay(sampler, *gap, s);
  });
  report(11, "closed-form lambda", 1, criterion_closed_form);

  std::cout << (failures ? "FAIL" : "PASS") << " acceptance: " << 11 - failures << "/11 criteria" << std::endl;
  return failures ? 1 : 0;
}
