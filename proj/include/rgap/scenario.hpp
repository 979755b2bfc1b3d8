#pragma once

#include "rgap/gap.hpp"
#include "rgap/kernels.hpp"
#include "rgap/mixture.hpp"
#include "rgap/quadrature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rgap {

/// Speeds |v| for the nu table: "start:stop:step" or a comma list.
std::vector<double> parse_grid(const std::string& spec);

/// Everything a CLI run needs, parsed and validated from a JSON scenario.
struct Scenario {
  MixtureConfig config;
  KernelSuite kernels;
  QuadratureSpec quadrature;
  LambdaElMode lambda_mode = LambdaElMode::Galerkin;
  std::optional<double> lambda_value{};
  int degree = 4;
  std::uint64_t verify_samples = 500;
  std::uint64_t verify_seed = 0x5EEDCAFEULL;
  double sigmas = 4.0;
  std::string grid = "0:10:0.25";
  std::uint64_t nu_samples = 1 << 16;
  double t_max = 8.0;
  int steps = 2000;
  CpsiConvention convention = CpsiConvention::Step4;
  /// Canonical JSON of the parsed scenario and its FNV-1a hash.
  std::string canonical{};
  std::uint64_t hash = 0;

  /// Micro-reversibility residual of the reactive pair; nonzero only for
  /// scenarios that set the backward constant explicitly.
  double microreversibility_defect() const { return kernels.reactive.constraint_residual(); }
};

/// Parses scenario text. Errors are ConfigError naming the field, or the
/// line and column for malformed documents.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::string& path);

/// Built-in default: equal masses 1, energies (0, 0, 0.25, 0.25), gamma 1,
/// c1 = c2 = c3 = 1 with c4 from the mass action law, unit kernels.
Scenario default_scenario();
std::string default_scenario_text();

/// Recomputes canonical text and hash after programmatic edits.
void refresh_hash(Scenario& s);

std::string hex64(std::uint64_t x);

}  // namespace rgap
