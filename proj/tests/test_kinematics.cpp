#include "rgap/kinematics.hpp"
#include "rgap/mixture.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace rgap;

namespace {

void check_vec(const Vec3& a, const Vec3& b, double tol = 1e-14) {
  CHECK((a - b).norm() < tol);
}

}  // namespace

TEST_CASE("elastic post-collisional velocities") {
  SUBCASE("symmetric head-on") {
    const auto p = elastic_post(Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), 1, 1);
    check_vec(p.v, Vec3(0, 1, 0));
    check_vec(p.vs, Vec3(0, -1, 0));
  }
  SUBCASE("sigma along the relative velocity is the identity") {
    const Vec3 v(0.3, -1.2, 2.0), vs(-0.7, 0.4, 0.1);
    const auto p = elastic_post(v, vs, (v - vs).normalized(), 2.5, 0.4);
    check_vec(p.v, v, 1e-13);
    check_vec(p.vs, vs, 1e-13);
  }
  SUBCASE("unequal masses") {
    const auto p = elastic_post(Vec3(2, 0, 0), Vec3(0, 0, 0), Vec3(0, 0, 1), 1, 3);
    check_vec(p.v, Vec3(0.5, 0, 1.5));
    check_vec(p.vs, Vec3(0.5, 0, -0.5));
    CHECK((1 * p.v + 3 * p.vs - Vec3(2, 0, 0)).norm() < 1e-14);
    CHECK(0.5 * p.v.squaredNorm() + 1.5 * p.vs.squaredNorm() == doctest::Approx(2.0));
  }
  CHECK_THROWS_AS(elastic_post(Vec3::Zero(), Vec3::Zero(), Vec3(1, 1, 0), 1, 1), ParameterError);
}

TEST_CASE("reaction quadruples") {
  CHECK(ReactionQuadruple::forward().is_forward());
  CHECK_FALSE(ReactionQuadruple::backward().is_forward());
  CHECK(ReactionQuadruple::for_species(3).i() == 3);
  CHECK(ReactionQuadruple::for_species(3).j() == 2);
  CHECK_THROWS_AS(ReactionQuadruple::create(0, 2, 1, 3), ParameterError);
  const auto cfg = oracle::equal_mass_config(0.5, 1.0);
  CHECK(ReactionQuadruple::forward().energy_gap(cfg) == doctest::Approx(0.5));
  CHECK(ReactionQuadruple::backward().energy_gap(cfg) == doctest::Approx(-0.5));
}

TEST_CASE("outgoing relative speed") {
  SUBCASE("no shift for equal masses and zero energy") {
    const auto cfg = oracle::equal_mass_config(0.0, 1.0);
    for (double g : {0.0, 0.5, 3.0}) CHECK(*outgoing_relative_speed(g, ReactionQuadruple::forward(), cfg) == g);
  }
  SUBCASE("exact threshold") {
    const auto cfg = oracle::equal_mass_config(1.0, 1.0);
    CHECK(*outgoing_relative_speed(2.0, ReactionQuadruple::forward(), cfg) == 0.0);
    CHECK_FALSE(outgoing_relative_speed(1.99, ReactionQuadruple::forward(), cfg).has_value());
  }
  SUBCASE("round trip") {
    const auto cfg = MixtureConfig::from_mass_action({2.0, 5.0, 3.0, 4.0}, {0, 0.2, 0.6, 0.1}, 1.0, 0.7, 1.3, 1.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int k = 0; k < 1000; ++k) {
      const double g = u(rng);
      for (int i = 0; i < 4; ++i) {
        const auto q = ReactionQuadruple::for_species(i);
        const auto go = outgoing_relative_speed(g, q, cfg);
        if (!go) continue;
        CHECK(std::abs(*outgoing_relative_speed(*go, q.reversed(), cfg) - g) <= 1e-12 * (1 + g));
      }
    }
  }
}

TEST_CASE("reactive post-collisional velocities conserve momentum and total energy") {
  const auto cfg = MixtureConfig::from_mass_action({1.0, 1000.0, 500.5, 500.5}, {0, 0.1, 0.4, 0.3}, 1.0, 2.0, 0.5, 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 3.0);
  int tested = 0;
  for (int k = 0; k < 10000; ++k) {
    const Vec3 v(n(rng), n(rng), n(rng)), vs(n(rng), n(rng), n(rng));
    const Vec3 sigma = Vec3(n(rng), n(rng), n(rng)).normalized();
    const auto q = ReactionQuadruple::for_species(k % 4);
    const auto p = reactive_post(v, vs, sigma, q, cfg);
    if (!p) continue;
    ++tested;
    const double mi = cfg.mass(q.i()), mj = cfg.mass(q.j()), mh = cfg.mass(q.h()), mk = cfg.mass(q.k());
    const Vec3 P = mi * v + mj * vs;
    CHECK((P - mh * p->v - mk * p->vs).norm() <= 1e-11 * (1 + P.norm()));
    const double e0 = 0.5 * mi * v.squaredNorm() + cfg.energy(q.i()) + 0.5 * mj * vs.squaredNorm() + cfg.energy(q.j());
    const double e1 = 0.5 * mh * p->v.squaredNorm() + cfg.energy(q.h()) + 0.5 * mk * p->vs.squaredNorm() + cfg.energy(q.k());
    CHECK(std::abs(e0 - e1) <= 1e-11 * (1 + e0));
  }
  CHECK(tested > 5000);
}

TEST_CASE("reactive rule reduces to the elastic one without energy or mass change") {
  const auto cfg = oracle::equal_mass_config(0.0, 1.0);
  const Vec3 v(0.2, 1.1, -0.4), vs(-1.0, 0.3, 0.9), s = Vec3(1, 2, 2).normalized();
  const auto r = reactive_post(v, vs, s, ReactionQuadruple::forward(), cfg);
  const auto e = elastic_post(v, vs, s, 1, 1);
  REQUIRE(r.has_value());
  check_vec(r->v, e.v, 1e-14);
  check_vec(r->vs, e.vs, 1e-14);
}
