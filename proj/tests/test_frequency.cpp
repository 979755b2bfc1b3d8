#include "rgap/frequency.hpp"
#include "rgap/kernels.hpp"
#include "rgap/mixture.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace rgap;

TEST_CASE("incomplete gamma functions") {
  CHECK(incomplete_gamma_upper(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(incomplete_gamma_upper(1.0, 2.5) == doctest::Approx(std::exp(-2.5)).epsilon(1e-14));
  CHECK(incomplete_gamma_upper(1.5, 0.0) == doctest::Approx(0.5 * std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(incomplete_gamma_lower(2.0, 0.0) == 0.0);
  CHECK(incomplete_gamma_lower(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  const double brute = oracle::simpson([](double r) { return std::sqrt(r) * std::exp(-r); }, 0.0, 0.25, 400000);
  CHECK(incomplete_gamma_lower(1.5, 0.25) == doctest::Approx(brute).epsilon(1e-7));
  const double tail = oracle::simpson([](double r) { return r * r * std::exp(-r); }, 3.0, 80.0, 200000);
  CHECK(incomplete_gamma_upper(3.0, 3.0) == doctest::Approx(tail).epsilon(1e-10));
  CHECK_THROWS_AS(incomplete_gamma_upper(0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(incomplete_gamma_lower(1.0, -1.0), ParameterError);
}

TEST_CASE("gaussian radial moments") {
  for (double x : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
    for (double m : {0.5, 1.0, 3.0}) CHECK(gaussian_radial_moment(x, m) == doctest::Approx(oracle::radial_moment(x, m)).epsilon(1e-7));
  }
}

TEST_CASE("scale equivalence constant") {
  CHECK(scale_equivalence_upper(0.0) == 2.0);
  for (double g : {0.25, 0.5, 1.0}) {
    // Maximum at r = 1 where (1 + r^g) / (1 + r^2)^{g/2} = 2^{1 - g/2}.
    CHECK(scale_equivalence_upper(g) == doctest::Approx(std::pow(2.0, 1.0 - 0.5 * g)).epsilon(1e-10));
  }
}

TEST_CASE("bound constants") {
  const auto cfg = oracle::equal_mass_config(0.5, 1.0);
  const KernelSuite k{ElasticKernelSet::uniform(1.0, 1.0), ReactiveKernelPair::create(cfg, 1.0)};
  for (int i = 0; i < 4; ++i) {
    const NuBounds nb = bound_constants(cfg, k, i);
    CHECK(nb.lower > 0.0);
    CHECK(nb.upper > nb.lower);
    CHECK(nb.upper_bracket == doctest::Approx(nb.upper * std::sqrt(2.0)));
    CHECK(nb.provenance == (i < 2 ? "closed-form" : "derived"));
  }

  SUBCASE("independent re-evaluation for species 1") {
    // Zero energy, equal masses: C_bar = 2, m12 = m34, partner mass 1.
    const auto c0 = oracle::equal_mass_config(0.0, 1.0);
    const KernelSuite k0{ElasticKernelSet::uniform(1.0, 1.0), ReactiveKernelPair::create(c0, 1.0)};
    const NuBounds nb = bound_constants(c0, k0, 0);
    const double cinf = 4.0, am = 4.0 * std::numbers::pi / 3.0, sp = std::sqrt(std::numbers::pi);
    CHECK(nb.c_bar == doctest::Approx(2.0));
    const double up = 4.0 / sp * std::sqrt(2.0) * 6.0;  // Gamma(4) = 6
    CHECK(nb.upper == doctest::Approx(cinf * up * am).epsilon(1e-12));
    const double gl = oracle::simpson([](double r) { return std::sqrt(r) * std::exp(-r); }, 0.0, 0.25, 400000);
    const double large = cinf / (2 * sp) * std::pow(1.0 / 8.0, 0.5) * gl * am;
    CHECK(nb.lower_case_large == doctest::Approx(large).epsilon(1e-7));
    const double gu = oracle::simpson([](double r) { return std::pow(r, 0.5) * std::exp(-r); }, 3.0, 80.0, 400000);
    const double small = cinf / (sp * (1 + std::sqrt(2.0))) * gu * am;
    CHECK(nb.lower_case_small == doctest::Approx(small).epsilon(1e-8));
  }

  SUBCASE("linear in the concentrations and the reaction constant") {
    const auto c2 = MixtureConfig::from_mass_action({1, 1, 1, 1}, {0, 0, 0.25, 0.25}, 2, 2, 2, 1.0);
    const KernelSuite k2{ElasticKernelSet::uniform(1.0, 1.0), ReactiveKernelPair::create(c2, 1.0)};
    const KernelSuite k3{ElasticKernelSet::uniform(1.0, 1.0), ReactiveKernelPair::create(cfg, 2.0)};
    for (int i = 0; i < 4; ++i) {
      CHECK(bound_constants(c2, k2, i).upper == doctest::Approx(2 * bound_constants(cfg, k, i).upper));
      CHECK(bound_constants(c2, k2, i).lower == doctest::Approx(2 * bound_constants(cfg, k, i).lower));
      CHECK(bound_constants(cfg, k3, i).upper == doctest::Approx(2 * bound_constants(cfg, k, i).upper));
    }
  }
}

TEST_CASE("chemical collision frequency") {
  QuadratureSpec spec;
  spec.sample_count = 1 << 17;
  spec.block_size = 1 << 12;

  SUBCASE("radial oracle for species 3 without reaction energy") {
    // nu_3(v) = C (4 pi / 3) int |v - v*| mu_4(v*) dv*; for |v| = s and unit
    // mass the partner speed integral reduces to one dimension.
    const auto cfg = oracle::equal_mass_config(0.0, 1.0);
    const KernelSuite k{ElasticKernelSet::uniform(1.0, 1.0), ReactiveKernelPair::create(cfg, 1.0)};
    for (double s : {0.0, 1.0, 2.5}) {
      auto radial = [s](double r) {
        // Angular average of |v - v*| over the partner direction.
        const double avg = s == 0.0 ? r : ((s + r) * (s + r) * (s + r) - std::pow(std::abs(s - r), 3)) / (6.0 * s * r);
        return 4.0 * std::numbers::pi * r * r * std::pow(2.0 * std::numbers::pi, -1.5) * std::exp(-0.5 * r * r) * (r == 0.0 ? 0.0 : avg);
      };
      const double expect = 4.0 * std::numbers::pi / 3.0 * oracle::simpson(radial, 0.0, 40.0, 200000);
      const Estimate e = nu_chemical(cfg, k, 2, Vec3(0, 0, s), spec);
      CHECK(e.consistent_with(expect, 4.0));
    }
  }
  SUBCASE("bracket at a few speeds") {
    const auto cfg = oracle::equal_mass_config(0.5, 1.0);
    const KernelSuite k{ElasticKernelSet::uniform(1.0, 1.0), ReactiveKernelPair::create(cfg, 1.0)};
    for (int i = 0; i < 4; ++i) {
      const NuBounds nb = bound_constants(cfg, k, i);
      for (double s : {0.0, 3.0, 10.0}) {
        const double w = std::sqrt(1 + s * s);
        const Estimate e = nu_chemical(cfg, k, i, Vec3(s, 0, 0), spec);
        CHECK(e.value >= nb.lower_bracket * w - 4 * e.std_error);
        CHECK(e.value <= nb.upper_bracket * w + 4 * e.std_error);
      }
    }
  }
  SUBCASE("a large reaction energy switches the forward frequency off") {
    const auto cfg = oracle::equal_mass_config(200.0, 1.0);
    const KernelSuite k{ElasticKernelSet::uniform(1.0, 1.0), ReactiveKernelPair::create(cfg, 1.0)};
    CHECK(nu_chemical(cfg, k, 0, Vec3(1, 0, 0), spec).value == 0.0);
  }
}
