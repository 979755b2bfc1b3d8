#include "rgap/statespace.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace rgap;

namespace {

MixtureConfig general_config(double gamma = 1.0) {
  return MixtureConfig::from_mass_action({2.0, 1.5, 1.0, 2.5}, {0.0, 0.1, 0.35, 0.25}, 0.8, 1.2, 0.6, gamma);
}

}  // namespace

TEST_CASE("monomial basis") {
  const MonomialBasis b(4);
  CHECK(b.size() == 35);
  CHECK(MonomialBasis::count(2) == 10);
  CHECK(b.index(0, 0, 0) == 0);
  const MonomialBasis b2(2);
  for (int a = 0; a < b2.size(); ++a) CHECK(b.exponent(a) == b2.exponent(a));
  double out[35];
  b.evaluate(Vec3(2.0, 3.0, 5.0), out);
  CHECK(out[b.index(1, 2, 1)] == doctest::Approx(2.0 * 9.0 * 5.0));
  CHECK_THROWS_AS(MonomialBasis(40), ParameterError);
}

TEST_CASE("gram matrices") {
  const auto cfg = general_config();
  const StateSpace s(cfg, 4);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.gram());
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  const int N = s.monomial_count();
  for (int i = 0; i < 4; ++i) {
    const double m = cfg.mass(i), c = cfg.concentration(i);
    CHECK(s.gram()(i * N, i * N) == doctest::Approx(c).epsilon(1e-13));
    const int xx = s.monomials().index(2, 0, 0);
    CHECK(s.gram()(i * N + xx, i * N + xx) == doctest::Approx(3.0 * c / (m * m)).epsilon(1e-13));
    // <v>^gamma weighted entries against a radial Simpson oracle.
    auto radial = [m](int n) {
      return oracle::simpson([&](double r) { return std::pow(r, 2 + n) * std::sqrt(1 + r * r) * std::exp(-0.5 * m * r * r); }, 0.0,
                             40.0 / std::sqrt(m), 200000) *
             std::pow(m / (2 * std::numbers::pi), 1.5);
    };
    CHECK(s.weighted_gram()(i * N, i * N) == doctest::Approx(c * 4 * std::numbers::pi * radial(0)).epsilon(1e-9));
    // v1^2 averages |v|^2 / 3 over the sphere.
    CHECK(s.weighted_gram()(i * N, i * N + xx) == doctest::Approx(c * 4 * std::numbers::pi * radial(2) / 3).epsilon(1e-9));
  }
  SUBCASE("gamma zero makes both products equal") {
    const StateSpace s0(general_config(0.0), 3);
    CHECK((s0.gram() - s0.weighted_gram()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("elastic kernel basis") {
  const auto cfg = general_config();
  const StateSpace s(cfg, 4);
  const auto& b = s.elastic_basis();
  REQUIRE(b.size() == 8);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 8; ++l) CHECK(std::abs(s.inner(b.vectors[k], b.vectors[l]) - (k == l)) < 1e-12);
  // The energy vector via the moment identities: sum_i 6 c_i / (6 c_inf).
  CHECK(s.norm2(b.vectors[7]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.project_EL(b.vectors[2]).coeffs.isApprox(b.vectors[2].coeffs, 1e-12));
}

TEST_CASE("elastic projection") {
  const auto cfg = general_config();
  const StateSpace s(cfg, 4);
  SUBCASE("odd cubic only has a bulk velocity") {
    Perturbation f = s.zero();
    const int N = s.monomial_count();
    for (int i = 0; i < 4; ++i) f.coeffs[i * N + s.monomials().index(3, 0, 0)] = 1.0;
    const KernelCoordsEL c = s.coordinates_EL(f);
    double expect = 0;
    for (int i = 0; i < 4; ++i) expect += 3.0 * cfg.concentration(i) / cfg.mass(i);
    expect /= cfg.total_density();
    for (double n : c.n) CHECK(std::abs(n) < 1e-12);
    CHECK(std::abs(c.e) < 1e-12);
    CHECK(c.u.x() == doctest::Approx(expect).epsilon(1e-12));
    CHECK(std::abs(c.u.y()) + std::abs(c.u.z()) < 1e-12);
  }
  SUBCASE("coordinates round trip") {
    const Perturbation f = s.random(9, 0);
    const Perturbation p = s.project_EL(f);
    CHECK(s.from_coordinates(s.coordinates_EL(f)).coeffs.isApprox(p.coeffs, 1e-10));
  }
  SUBCASE("Pythagoras and nesting") {
    for (std::uint64_t k = 0; k < 20; ++k) {
      const Perturbation f = s.random(1, k);
      const Perturbation pe = s.project_EL(f), pf = s.project_full(f);
      CHECK(s.norm2(f) == doctest::Approx(s.norm2(pe) + s.norm2(f - pe)).epsilon(1e-10));
      CHECK(s.norm2(pf) <= s.norm2(pe) * (1 + 1e-12));
      CHECK(s.norm2(pe) <= s.norm2(f) * (1 + 1e-12));
    }
  }
}

TEST_CASE("chemical kernel basis") {
  const auto cfg = general_config();
  const StateSpace s(cfg, 4);
  const auto& gs = s.chemical_basis();
  const auto& cf = s.chemical_closed_form();
  REQUIRE(gs.size() == 7);
  const ChemicalNormForms nf = chemical_norm_forms(cfg);
  const double c1 = cfg.concentration(0), c2 = cfg.concentration(1), c3 = cfg.concentration(2), c4 = cfg.concentration(3);
  CHECK(nf.norm1 == doctest::Approx(c1 + c3));
  CHECK(nf.norm2 == doctest::Approx(c2 + c4));
  CHECK(nf.norm3_a == doctest::Approx(nf.norm3_b).epsilon(1e-12));
  CHECK(nf.norm7_a == doctest::Approx(nf.norm7_b).epsilon(1e-12));
  for (std::size_t k = 0; k < 7; ++k) {
    for (std::size_t l = 0; l < 7; ++l) {
      if (k != l) CHECK(std::abs(s.inner(gs.vectors[k], gs.vectors[l])) < 1e-10);
    }
    CHECK(gs.vectors[k].coeffs.isApprox(cf.vectors[k].coeffs, 1e-10));
    CHECK(s.norm2(gs.vectors[k]) == doctest::Approx(gs.closed_form_norm2[k]).epsilon(1e-10));
  }
  SUBCASE("no energy correction without reaction energy") {
    const auto c0 = MixtureConfig::from_mass_action({2.0, 1.5, 1.0, 2.5}, {0.0, 0.1, 0.05, 0.05}, 0.8, 1.2, 0.6, 1.0);
    const StateSpace s0(c0, 3);
    const Perturbation& q7 = s0.chemical_closed_form().vectors[6];
    const int N = s0.monomial_count();
    for (int i = 0; i < 4; ++i) CHECK(q7.coeffs[i * N] == doctest::Approx(-1.5));
  }
  SUBCASE("the full projection fixes its own span") {
    Perturbation f = 0.3 * gs.vectors[0] + (-1.2) * gs.vectors[6] + 2.0 * gs.vectors[4];
    CHECK(s.project_full(f).coeffs.isApprox(f.coeffs, 1e-10));
    CHECK(energy_functional(s.coordinates_EL(f), cfg) < 1e-20);
  }
}

TEST_CASE("energy functional") {
  const auto cfg = general_config();
  KernelCoordsEL c;
  c.n = {0, 0, 0, 1};
  CHECK(energy_functional(c, cfg) == doctest::Approx(1.0));
  c.n = {0, 0, 0, 0};
  c.e = 1.0;
  CHECK(energy_functional(c, cfg) == doctest::Approx(cfg.binding_energy() * cfg.binding_energy()));
}

TEST_CASE("projection difference identity") {
  const auto cfg = general_config();
  const StateSpace s(cfg, 4);
  for (std::uint64_t k = 0; k < 100; ++k) {
    const ProjectionGap g = s.projection_gap_identity(s.random(0x5EEDCAFE, k));
    CHECK(std::abs(g.lhs - g.rhs) <= 1e-9 * (1 + std::abs(g.lhs)));
  }
  const ProjectionGap z = s.projection_gap_identity(s.chemical_basis().vectors[6]);
  CHECK(std::abs(z.lhs) < 1e-10);
  CHECK(std::abs(z.rhs) < 1e-10);
  const ProjectionGap e1 = s.projection_gap_identity(s.elastic_basis().vectors[0]);
  CHECK(e1.energy > 0.0);
  CHECK(e1.lhs == doctest::Approx(e1.rhs).epsilon(1e-10));
}

TEST_CASE("perturbation checks") {
  const StateSpace s3(general_config(), 3), s4(general_config(), 4);
  const Perturbation f = s3.random(1, 2);
  CHECK_THROWS_AS(s4.norm2(f), ParameterError);
  const Perturbation g = s4.lift(f);
  CHECK(s4.norm2(g) == doctest::Approx(s3.norm2(f)).epsilon(1e-12));
  CHECK(s3.random(1, 2).coeffs == f.coeffs);
  const StateSpace other(oracle::equal_mass_config(0.5, 1.0), 3);
  CHECK_THROWS_AS(other.norm2(f), ParameterError);
}
