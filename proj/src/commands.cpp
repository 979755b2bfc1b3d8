#include "rgap/commands.hpp"

#include "rgap/forms.hpp"
#include "rgap/frequency.hpp"
#include "rgap/gap.hpp"
#include "rgap/kinematics.hpp"
#include "rgap/scenario.hpp"
#include "rgap/statespace.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#ifndef RGAP_VERSION
#define RGAP_VERSION "0.0.0"
#endif

namespace rgap {

namespace {

using nlohmann::ordered_json;

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> quad_samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> degree;
  std::optional<std::string> grid;
  std::optional<std::string> lambda_el;
  std::optional<std::string> convention;
  std::optional<double> lambda_override;
  double lambda_scale = 1.0;
  double nu_upper_scale = 1.0;
  double nu_lower_scale = 1.0;
  std::optional<double> t_max;
  std::optional<int> steps;
  std::optional<int> threads;
};

/// Failure of a named invariant; maps to the numerical exit code.
struct InvariantFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario load_with_overrides(const Options& o) {
  Scenario s = o.scenario.empty() ? default_scenario() : load_scenario(o.scenario);
  if (o.seed) {
    s.quadrature.seed = *o.seed;
    s.verify_seed = *o.seed;
  }
  if (o.quad_samples) {
    s.quadrature.sample_count = *o.quad_samples;
    s.quadrature.block_size = std::min(s.quadrature.block_size,
                                       std::max<std::uint64_t>(1, *o.quad_samples / 16));
  }
  if (o.threads) s.quadrature.threads = *o.threads;
  try {
    s.quadrature.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("quadrature", e.what());
  }
  if (o.degree) {
    if (*o.degree < 3 || *o.degree > 8) throw ConfigError("degree", "degree must lie in 3..8");
    s.degree = *o.degree;
  }
  if (o.grid) {
    parse_grid(*o.grid);
    s.grid = *o.grid;
  }
  if (o.lambda_el) {
    if (*o.lambda_el == "galerkin") {
      s.lambda_mode = LambdaElMode::Galerkin;
      s.lambda_value.reset();
    } else {
      double v = 0.0;
      try {
        std::size_t pos = 0;
        v = std::stod(*o.lambda_el, &pos);
        if (pos != o.lambda_el->size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("lambda_el", "expected 'galerkin' or a positive number");
      }
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("lambda_el", "must be positive");
      s.lambda_mode = LambdaElMode::User;
      s.lambda_value = v;
    }
  }
  if (o.convention) {
    try {
      s.convention = cpsi_convention_from_string(*o.convention);
    } catch (const ParameterError& e) {
      throw ConfigError("cpsi_convention", e.what());
    }
  }
  if (o.t_max) {
    if (!(*o.t_max > 0.0)) throw ConfigError("decay.t_max", "must be positive");
    s.t_max = *o.t_max;
  }
  if (o.steps) {
    if (*o.steps < 4) throw ConfigError("decay.steps", "must be >= 4");
    s.steps = *o.steps;
  }
  refresh_hash(s);
  return s;
}

void require_microreversibility(const Scenario& s) {
  const double d = s.microreversibility_defect();
  if (d > 1e-12) {
    std::ostringstream msg;
    msg.precision(3);
    msg << "backward constant breaks micro-reversibility C_12^34 m12^2 = C_34^12 m34^2 "
        << "(relative defect " << d << ")";
    throw ConfigError("kernels.backward_constant", msg.str());
  }
}

ordered_json header(const Scenario& s, const char* command) {
  ordered_json j;
  j["tool"] = "rgap";
  j["version"] = RGAP_VERSION;
  j["command"] = command;
  j["scenario_hash"] = hex64(s.hash);
  j["quadrature_seed"] = hex64(s.quadrature.seed);
  j["verify_seed"] = hex64(s.verify_seed);
  j["scenario"] = ordered_json::parse(s.canonical);
  return j;
}

ordered_json to_json(const NuBounds& nb) {
  return {{"species", nb.species + 1},
          {"provenance", nb.provenance},
          {"lower", nb.lower},
          {"upper", nb.upper},
          {"lower_bracket", nb.lower_bracket},
          {"upper_bracket", nb.upper_bracket},
          {"scale_lower", nb.scale_lower},
          {"scale_upper", nb.scale_upper},
          {"c_bar", nb.c_bar},
          {"angular_mass", nb.angular_mass},
          {"upper_gamma_term", nb.upper_gamma_term},
          {"lower_case_large", nb.lower_case_large},
          {"lower_case_small", nb.lower_case_small},
          {"incomplete_lower", nb.incomplete_lower},
          {"incomplete_upper", nb.incomplete_upper}};
}

ordered_json to_json(const GapReport& r) {
  ordered_json nu = ordered_json::array();
  for (const auto& nb : r.nu) nu.push_back(to_json(nb));
  ordered_json j;
  j["nu"] = nu;
  j["C_nu"] = r.C_nu;
  j["C_b"] = r.C_b;
  j["C_b_moment"] = r.C_b_moment;
  j["C_psi"] = {{"convention", to_string(r.convention)},
                {"value", r.C_psi},
                {"max_abs", r.cpsi.max_abs},
                {"step4", r.cpsi.step4},
                {"final", r.cpsi.final}};
  j["c_inf"] = r.c_inf;
  j["lambda_el"] = {{"value", r.lambda_el.value},
                    {"provenance", r.lambda_el.provenance},
                    {"degree", r.lambda_el.degree},
                    {"seed", hex64(r.lambda_el.seed)},
                    {"samples", r.lambda_el.samples}};
  j["solution"] = {{"gate", r.solution.gate},
                   {"gate_holds", r.solution.gate_holds},
                   {"fallback", r.solution.fallback},
                   {"eta", r.solution.eta},
                   {"delta", r.solution.delta},
                   {"eta_limit", r.solution.eta_limit},
                   {"lambda", r.solution.lambda}};
  j["lambda"] = r.lambda();
  return j;
}

ordered_json to_json(const SampleCheck& s) {
  return {{"index", s.index},     {"lhs", s.lhs},       {"lhs_stderr", s.lhs_stderr},
          {"rhs", s.rhs},         {"margin", s.margin}, {"pass", s.pass}};
}

/// Writes to --out when given, otherwise to the primary stream.
void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw ConfigError("out", "cannot write '" + o.out + "'");
  f << text;
}

struct Pipeline {
  Scenario scenario;
  std::shared_ptr<const StateSpace> space;
  std::unique_ptr<CollisionFormSampler> sampler;
  GapReport report;
};

Pipeline build_pipeline(const Options& o) {
  Pipeline p{load_with_overrides(o), nullptr, nullptr, {}};
  require_microreversibility(p.scenario);
  p.space = std::make_shared<const StateSpace>(p.scenario.config, p.scenario.degree);
  p.sampler = std::make_unique<CollisionFormSampler>(p.space, p.scenario.kernels, p.scenario.quadrature);
  const LambdaEl lel = lambda_elastic(p.scenario.lambda_mode, p.scenario.lambda_value, p.sampler.get());
  p.report = spectral_gap(p.scenario.config, p.scenario.kernels, *p.space, lel, p.scenario.convention);
  if (!(p.report.lambda() > 0.0) || !std::isfinite(p.report.lambda())) {
    throw NumericalError("spectral gap constant is not a positive finite number");
  }
  return p;
}

int cmd_gap(const Options& o, std::ostream& out) {
  Pipeline p = build_pipeline(o);
  ordered_json j = header(p.scenario, "gap");
  j["report"] = to_json(p.report);
  const double matrix_gap = galerkin_total_gap(*p.sampler);
  j["galerkin_total_gap"] = matrix_gap;
  j["galerkin_gap_below_lambda"] = matrix_gap < p.report.lambda();
  emit(o, out, j.dump(2) + "\n");
  if (!o.out.empty()) {
    out << "lambda = " << p.report.lambda() << " (lambda_EL = " << p.report.lambda_el.value << ", "
        << (p.report.solution.gate_holds ? "gate holds" : "fallback") << ")\n";
  }
  return kExitPass;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.samples && *o.samples == 0) throw ConfigError("samples", "verification needs at least one sample");
  if (!(o.lambda_scale > 0.0)) throw ConfigError("lambda_scale", "must be positive");
  Pipeline p = build_pipeline(o);
  const std::uint64_t n = o.samples ? *o.samples : p.scenario.verify_samples;
  if (n == 0) throw ConfigError("verify.samples", "verification needs at least one sample");
  double lambda = o.lambda_override ? *o.lambda_override : p.report.lambda();
  lambda *= o.lambda_scale;
  const VerificationStats st = verify_gap(*p.sampler, lambda, n, p.scenario.verify_seed, p.scenario.sigmas);
  ordered_json j = header(p.scenario, "verify");
  j["lambda_report"] = p.report.lambda();
  j["lambda_used"] = lambda;
  j["lambda_adjusted"] = o.lambda_override.has_value() || o.lambda_scale != 1.0;
  j["samples"] = st.samples;
  j["degree"] = st.degree;
  j["sigmas"] = st.sigmas;
  j["failures"] = st.failures;
  j["pass"] = st.pass();
  j["worst"] = to_json(st.worst);
  ordered_json viol = ordered_json::array();
  for (const auto& v : st.violations) viol.push_back(to_json(v));
  j["violations"] = viol;
  emit(o, out, j.dump(2) + "\n");
  for (const auto& v : st.violations) {
    err << "GAP-VIOLATION sample=" << v.index << " lhs=" << v.lhs << " rhs=" << v.rhs
        << " stderr=" << v.lhs_stderr << "\n";
  }
  if (!o.out.empty() || !st.pass()) {
    (st.pass() ? out : err) << (st.pass() ? "PASS" : "FAIL") << " verify: " << st.failures << "/"
                            << st.samples << " violations at lambda = " << lambda << "\n";
  }
  return st.pass() ? kExitPass : kExitGapViolation;
}

const std::vector<Vec3>& cube_directions() {
  static const std::vector<Vec3> dirs = [] {
    std::vector<Vec3> d;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c)
          if (a || b || c) d.push_back(Vec3(a, b, c).normalized());
    return d;
  }();
  return dirs;
}

int cmd_nu_table(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario s = load_with_overrides(o);
  const std::vector<double> grid = parse_grid(s.grid);
  const std::uint64_t samples = o.samples ? *o.samples : s.nu_samples;
  if (samples < 2) throw ConfigError("samples", "nu table needs at least 2 partner samples");
  if (!(o.nu_upper_scale > 0.0) || !(o.nu_lower_scale > 0.0)) {
    throw ConfigError("nu_scale", "bound scale factors must be positive");
  }
  QuadratureSpec spec = s.quadrature;
  spec.mode = QuadratureMode::MonteCarlo;
  spec.sample_count = samples;
  spec.block_size = std::max<std::uint64_t>(1, samples / 16);
  const double gamma = s.config.gamma();

  std::ostringstream table;
  std::uint64_t violations = 0, rows = 0;
  for (int i = 0; i < kSpecies; ++i) {
    const NuBounds nb = bound_constants(s.config, s.kernels, i);
    const double lo = nb.lower_bracket * o.nu_lower_scale;
    const double hi = nb.upper_bracket * o.nu_upper_scale;
    for (double speed : grid) {
      const double weight = std::pow(1.0 + speed * speed, 0.5 * gamma);
      const std::vector<Vec3> dirs = speed == 0.0 ? std::vector<Vec3>{Vec3::UnitZ()} : cube_directions();
      for (const Vec3& d : dirs) {
        const Estimate e = nu_chemical(s.config, s.kernels, i, speed * d, spec);
        const double tol = s.sigmas * e.std_error;
        const bool in = e.value >= lo * weight - tol && e.value <= hi * weight + tol;
        ordered_json row = {{"species", i + 1},
                            {"speed", speed},
                            {"direction", {d.x(), d.y(), d.z()}},
                            {"nu", e.value},
                            {"stderr", e.std_error},
                            {"bracket_weight", weight},
                            {"lower", lo * weight},
                            {"upper", hi * weight},
                            {"in_bracket", in}};
        table << row.dump() << "\n";
        ++rows;
        if (!in) {
          ++violations;
          err << "BOUND-VIOLATION species=" << i + 1 << " speed=" << speed << " nu=" << e.value
              << " stderr=" << e.std_error << " bracket=[" << lo * weight << ", " << hi * weight
              << "]\n";
        }
      }
    }
  }
  emit(o, out, table.str());
  if (!o.out.empty()) {
    out << (violations ? "FAIL" : "PASS") << " nu-table: " << rows << " rows, " << violations
        << " outside the bracket\n";
  }
  return violations ? kExitBoundViolation : kExitPass;
}

int cmd_decay(const Options& o, std::ostream& out, std::ostream& err) {
  Pipeline p = build_pipeline(o);
  const Perturbation init = p.space->random(p.scenario.verify_seed, 0);
  const DecayResult r = decay_experiment(*p.sampler, p.report.lambda(), p.scenario.t_max,
                                         p.scenario.steps, init);
  std::ostringstream traj;
  for (const auto& pt : r.trajectory) {
    traj << ordered_json{{"t", pt.t}, {"norm", pt.norm}, {"energy_norm", pt.energy_norm}}.dump() << "\n";
  }
  emit(o, out, traj.str());
  const double rel = std::abs(r.fitted_rate - r.matrix_gap) / r.matrix_gap;
  const bool above = r.fitted_rate >= r.lambda - 1e-3;
  const bool agree = rel <= 0.05;
  std::ostream& summary = o.out.empty() ? err : out;
  summary << ordered_json{{"scenario_hash", hex64(p.scenario.hash)},
                          {"fitted_rate", r.fitted_rate},
                          {"matrix_gap", r.matrix_gap},
                          {"lambda", r.lambda},
                          {"relative_difference", rel},
                          {"rate_above_lambda", above},
                          {"rate_matches_matrix_gap", agree}}
                 .dump()
          << "\n";
  if (!above) return kExitGapViolation;
  if (!agree) throw InvariantFailure("decay: fitted rate differs from the matrix gap by more than 5%");
  return kExitPass;
}

// Self-test: deterministic invariants and a reduced stochastic suite.

struct Check {
  std::string name;
  std::function<std::string()> run;  // empty string on success, else detail
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

std::string check_mass_action(const Scenario& s) {
  const double r = std::abs(mass_action_residual(s.config));
  return r <= MixtureConfig::kMassActionTolerance ? "" : "residual " + fmt(r);
}

std::string check_microreversibility(const Scenario& s) {
  const double d = s.microreversibility_defect();
  if (d > 1e-12) return "constant relation defect " + fmt(d);
  std::mt19937_64 rng(substream_seed(s.quadrature.seed, 0x3EE, 0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fwd = ReactionQuadruple::forward();
  const double g0 = std::sqrt(2.0 * fwd.energy_gap(s.config) / s.config.reduced_mass_12());
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double g = g0 + 1e-6 + 8.0 * u(rng);
    const double ct = 2.0 * u(rng) - 1.0;
    worst = std::max(worst, std::abs(microreversibility_residual(s.kernels.reactive, g, ct, s.config)));
    const auto gout = outgoing_relative_speed(g, fwd, s.config);
    const auto back = outgoing_relative_speed(*gout, fwd.reversed(), s.config);
    worst = std::max(worst, std::abs(*back - g) / g);
  }
  return worst <= 1e-12 ? "" : "worst residual " + fmt(worst);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 x(n(rng), n(rng), n(rng));
  return x.normalized();
}

std::string check_conservation(const Scenario& s) {
  std::mt19937_64 rng(substream_seed(s.quadrature.seed, 0xC0, 0));
  std::normal_distribution<double> n(0.0, 2.0);
  const auto& cfg = s.config;
  double worst = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const Vec3 v(n(rng), n(rng), n(rng)), vs(n(rng), n(rng), n(rng));
    const Vec3 sigma = random_unit(rng);
    const int i = k % 4, j = (k / 4) % 4;
    const double mi = cfg.mass(i), mj = cfg.mass(j);
    const VelocityPair post = elastic_post(v, vs, sigma, mi, mj);
    const Vec3 dp = mi * v + mj * vs - mi * post.v - mj * post.vs;
    const double e0 = 0.5 * (mi * v.squaredNorm() + mj * vs.squaredNorm());
    const double de = e0 - 0.5 * (mi * post.v.squaredNorm() + mj * post.vs.squaredNorm());
    worst = std::max({worst, dp.norm() / (1.0 + (mi * v).norm() + (mj * vs).norm()), std::abs(de) / (1.0 + e0)});

    const auto quad = ReactionQuadruple::for_species(i);
    const auto rp = reactive_post(v, vs, sigma, quad, cfg);
    if (!rp) continue;
    const double mh = cfg.mass(quad.h()), mk = cfg.mass(quad.k());
    const double mi_ = cfg.mass(quad.i()), mj_ = cfg.mass(quad.j());
    const Vec3 dpr = mi_ * v + mj_ * vs - mh * rp->v - mk * rp->vs;
    const double r0 = 0.5 * (mi_ * v.squaredNorm() + mj_ * vs.squaredNorm()) + cfg.energy(quad.i()) +
                      cfg.energy(quad.j());
    const double r1 = 0.5 * (mh * rp->v.squaredNorm() + mk * rp->vs.squaredNorm()) +
                      cfg.energy(quad.h()) + cfg.energy(quad.k());
    worst = std::max({worst, dpr.norm() / (1.0 + (mi_ * v).norm() + (mj_ * vs).norm()),
                      std::abs(r0 - r1) / (1.0 + std::abs(r0))});
  }
  return worst <= 1e-11 ? "" : "worst residual " + fmt(worst);
}

std::string check_moments(const Scenario& s) {
  double worst = 0.0;
  for (int i = 0; i < kSpecies; ++i) {
    const double m = s.config.mass(i), c = s.config.concentration(i);
    const auto nodes = gaussian_nodes(8, m);
    const double norm = c * std::pow(m / (2.0 * M_PI), 1.5);
    double m0 = 0, m2 = 0, m4 = 0;
    for (const auto& a : nodes)
      for (const auto& b : nodes)
        for (const auto& d : nodes) {
          const double w = a.weight * b.weight * d.weight * norm;
          const double r2 = a.node * a.node + b.node * b.node + d.node * d.node;
          m0 += w;
          m2 += w * r2;
          m4 += w * r2 * r2;
        }
    worst = std::max({worst, std::abs(m0 / c - 1.0), std::abs(m2 / (3.0 * c / m) - 1.0),
                      std::abs(m4 / (15.0 * c / (m * m)) - 1.0)});
  }
  return worst <= 1e-10 ? "" : "worst relative error " + fmt(worst);
}

std::string check_bases(const StateSpace& space) {
  const Eigen::MatrixXd B = basis_matrix(space.elastic_basis());
  const double el = (B.transpose() * space.gram() * B - Eigen::MatrixXd::Identity(B.cols(), B.cols()))
                        .cwiseAbs()
                        .maxCoeff();
  if (el > 1e-10) return "elastic Gram deviates from identity by " + fmt(el);
  const BasisSet& gs = space.chemical_basis();
  const BasisSet& cf = space.chemical_closed_form();
  double worst = 0.0;
  for (std::size_t k = 0; k < gs.size(); ++k) {
    worst = std::max(worst, std::sqrt(space.norm2(gs.vectors[k] - cf.vectors[k])) /
                                std::max(1.0, std::sqrt(space.norm2(cf.vectors[k]))));
    if (std::isfinite(gs.closed_form_norm2[k])) {
      worst = std::max(worst, std::abs(space.norm2(gs.vectors[k]) - gs.closed_form_norm2[k]) /
                                  std::max(1.0, gs.closed_form_norm2[k]));
    }
  }
  const ChemicalNormForms nf = chemical_norm_forms(space.config());
  worst = std::max({worst, std::abs(nf.norm3_a - nf.norm3_b) / nf.norm3_a,
                    std::abs(nf.norm7_a - nf.norm7_b) / nf.norm7_a});
  return worst <= 1e-10 ? "" : "chemical basis mismatch " + fmt(worst);
}

std::string check_projection(const StateSpace& space, std::uint64_t seed) {
  for (std::uint64_t k = 0; k < 20; ++k) {
    const ProjectionGap g = space.projection_gap_identity(space.random(seed, k));
    if (std::abs(g.lhs - g.rhs) > 1e-9 * (1.0 + std::abs(g.lhs))) {
      return "sample " + std::to_string(k) + ": lhs " + fmt(g.lhs) + " rhs " + fmt(g.rhs);
    }
  }
  return "";
}

std::string check_annihilation(const CollisionFormSampler& sampler) {
  const StateSpace& space = sampler.space();
  auto probe = [&](const BlockQuadraticForm& form, const BasisSet& basis, const char* what) -> std::string {
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Estimate e = form.quadratic(basis.vectors[k].coeffs);
      if (std::abs(e.value) > std::max(1e-10, 4.0 * e.std_error)) {
        return std::string(what) + " form on " + basis.labels[k] + " = " + fmt(e.value);
      }
    }
    return "";
  };
  std::string r = probe(sampler.elastic(), space.elastic_basis(), "elastic");
  if (r.empty()) r = probe(sampler.total(), space.chemical_basis(), "total");
  return r;
}

std::string check_weak_forms(const CollisionFormSampler& sampler, std::uint64_t seed) {
  const StateSpace& space = sampler.space();
  for (std::uint64_t k = 0; k < 2; ++k) {
    const Perturbation F = space.random(seed, 1000 + k);
    for (const auto& psi : space.chemical_basis().vectors) {
      const Estimate e = weak_form_chemical(sampler, F, psi);
      if (std::abs(e.value) > std::max(1e-10, 4.0 * e.std_error)) return "chemical weak form " + fmt(e.value);
    }
    for (const auto& psi : space.elastic_basis().vectors) {
      const Estimate e = weak_form_elastic(sampler, F, psi);
      if (std::abs(e.value) > std::max(1e-10, 4.0 * e.std_error)) return "elastic weak form " + fmt(e.value);
    }
  }
  return "";
}

std::string check_nu(const Scenario& s) {
  QuadratureSpec spec = s.quadrature;
  spec.mode = QuadratureMode::MonteCarlo;
  spec.sample_count = 1 << 14;
  spec.block_size = 1 << 10;
  for (int i = 0; i < kSpecies; ++i) {
    const NuBounds nb = bound_constants(s.config, s.kernels, i);
    for (double speed : {0.0, 1.0, 4.0}) {
      const double w = std::pow(1.0 + speed * speed, 0.5 * s.config.gamma());
      const Estimate e = nu_chemical(s.config, s.kernels, i, speed * Vec3::UnitX(), spec);
      const double tol = 4.0 * e.std_error;
      if (e.value < nb.lower_bracket * w - tol || e.value > nb.upper_bracket * w + tol) {
        return "species " + std::to_string(i + 1) + " at |v| = " + fmt(speed);
      }
    }
  }
  return "";
}

int cmd_selftest(const Options& o, std::ostream& out, std::ostream& err) {
  Scenario s = load_with_overrides(o);
  if (!o.quad_samples) {
    s.quadrature.sample_count = 1 << 15;
    s.quadrature.block_size = 1 << 11;
  }
  if (!o.degree) s.degree = 3;
  std::shared_ptr<const StateSpace> space;
  std::unique_ptr<CollisionFormSampler> sampler;
  auto need_space = [&] {
    if (!space) space = std::make_shared<const StateSpace>(s.config, s.degree);
    return space;
  };
  auto need_sampler = [&]() -> const CollisionFormSampler& {
    if (!sampler) sampler = std::make_unique<CollisionFormSampler>(need_space(), s.kernels, s.quadrature);
    return *sampler;
  };
  const std::vector<Check> checks = {
      {"mass-action", [&] { return check_mass_action(s); }},
      {"micro-reversibility", [&] { return check_microreversibility(s); }},
      {"conservation", [&] { return check_conservation(s); }},
      {"moments", [&] { return check_moments(s); }},
      {"bases", [&] { return check_bases(*need_space()); }},
      {"projection-identity", [&] { return check_projection(*need_space(), s.verify_seed); }},
      {"nu-bracket", [&] { return check_nu(s); }},
      {"kernel-annihilation", [&] { return check_annihilation(need_sampler()); }},
      {"weak-forms", [&] { return check_weak_forms(need_sampler(), s.verify_seed); }},
  };
  for (const auto& c : checks) {
    const std::string detail = c.run();
    if (!detail.empty()) {
      out << "FAIL " << c.name << ": " << detail << "\n";
      err << "selftest: invariant '" << c.name << "' failed: " << detail << "\n";
      return kExitNumerical;
    }
    out << "PASS " << c.name << "\n";
  }
  return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Explicit spectral gap of the linearized reactive Boltzmann operator", "rgap"};
  app.set_version_flag("--version", RGAP_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough();

  app.add_option("--scenario", o.scenario, "Scenario JSON file (built-in default when omitted)");
  app.add_option("--out", o.out, "Report or table destination (standard output when omitted)");
  app.add_option("--samples", o.samples,
                 "verify: perturbations; nu-table: partner samples per point");
  app.add_option("--quad-samples", o.quad_samples, "Monte Carlo samples per collision form");
  app.add_option("--seed", o.seed, "Seed for quadrature and random perturbations");
  app.add_option("--degree", o.degree, "Polynomial degree of the state space");
  app.add_option("--grid", o.grid, "nu-table speeds: start:stop:step or a comma list");
  app.add_option("--lambda-el", o.lambda_el, "Elastic gap: a positive number or 'galerkin'");
  app.add_option("--cpsi-convention", o.convention, "step4 or final");
  app.add_option("--lambda-override", o.lambda_override, "verify: test this lambda instead");
  app.add_option("--lambda-scale", o.lambda_scale, "verify: multiply the tested lambda");
  app.add_option("--nu-upper-scale", o.nu_upper_scale, "nu-table: scale the upper bracket");
  app.add_option("--nu-lower-scale", o.nu_lower_scale, "nu-table: scale the lower bracket");
  app.add_option("--t-max", o.t_max, "decay: integration horizon");
  app.add_option("--steps", o.steps, "decay: time steps");
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");

  auto* gap = app.add_subcommand("gap", "Compute the spectral gap constant and write the report");
  auto* verify = app.add_subcommand("verify", "Check the coercivity inequality on random perturbations");
  auto* nu = app.add_subcommand("nu-table", "Tabulate chemical collision frequencies against their bounds");
  auto* self = app.add_subcommand("selftest", "Run the invariant suite");
  auto* decay = app.add_subcommand("decay", "Integrate the Galerkin semigroup and fit its decay rate");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForVersion&) {
    out << RGAP_VERSION << "\n";
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error[cli]: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (gap->parsed()) return cmd_gap(o, out);
    if (verify->parsed()) return cmd_verify(o, out, err);
    if (nu->parsed()) return cmd_nu_table(o, out, err);
    if (self->parsed()) return cmd_selftest(o, out, err);
    if (decay->parsed()) return cmd_decay(o, out, err);
  } catch (const ConfigError& e) {
    err << "error[" << e.field() << "]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "error[parameter]: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantFailure& e) {
    err << "error[invariant]: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "error[numerical]: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IntegrationError& e) {
    err << "error[integration]: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "error[domain]: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace rgap
