#include "rgap/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rgap {

using nlohmann::json;
using nlohmann::ordered_json;

std::string hex64(std::uint64_t x) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("grid", "cannot parse number '" + s + "' in grid spec '" + spec + "'");
    }
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("grid", "expected start:stop:step, got '" + spec + "'");
    const double a = to_double(parts[0]), b = to_double(parts[1]), h = to_double(parts[2]);
    if (!(h > 0.0) || !(b >= a) || a < 0.0) throw ConfigError("grid", "invalid range '" + spec + "'");
    const auto n = static_cast<long>(std::floor((b - a) / h + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(a + k * h);
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const double v = to_double(item);
      if (v < 0.0) throw ConfigError("grid", "speeds must be nonnegative");
      out.push_back(v);
    }
  }
  if (out.empty()) throw ConfigError("grid", "empty grid");
  return out;
}

namespace {

double get_number(const json& node, const std::string& field) {
  if (!node.is_number()) throw ConfigError(field, "expected a number");
  return node.get<double>();
}

std::uint64_t get_count(const json& node, const std::string& field) {
  if (node.is_number_unsigned()) return node.get<std::uint64_t>();
  if (node.is_number_integer()) {
    const auto v = node.get<std::int64_t>();
    if (v < 0) throw ConfigError(field, "must be nonnegative");
    return static_cast<std::uint64_t>(v);
  }
  if (node.is_string()) {
    // Seeds may be written as hexadecimal strings.
    const auto s = node.get<std::string>();
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(s, &pos, 0);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(field, "cannot parse integer '" + s + "'");
  }
  throw ConfigError(field, "expected a nonnegative integer");
}

void reject_unknown(const json& obj, const std::string& prefix,
                    std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(prefix + it.key(), "unknown field");
  }
}

ordered_json canonical_json(const Scenario& s) {
  ordered_json j;
  ordered_json species = ordered_json::array();
  for (int i = 0; i < kSpecies; ++i) {
    species.push_back({{"mass", s.config.mass(i)},
                       {"energy", s.config.energy(i)},
                       {"concentration", s.config.concentration(i)}});
  }
  j["species"] = species;
  j["gamma"] = s.config.gamma();
  ordered_json el = ordered_json::array();
  for (int a = 0; a < kSpecies; ++a) {
    ordered_json row = ordered_json::array();
    for (int b = 0; b < kSpecies; ++b) row.push_back(s.kernels.elastic.constant(a, b));
    el.push_back(row);
  }
  j["kernels"] = {{"elastic", el},
                  {"reactive_constant", s.kernels.reactive.forward_constant()},
                  {"backward_constant", s.kernels.reactive.backward_constant()},
                  {"backward_derived", s.kernels.reactive.derived()},
                  {"angular",
                   {{"family", to_string(s.kernels.reactive.angular().family)},
                    {"coefficient", s.kernels.reactive.angular().coefficient}}}};
  j["quadrature"] = {{"mode", to_string(s.quadrature.mode)},
                     {"samples", s.quadrature.sample_count},
                     {"block_size", s.quadrature.block_size},
                     {"seed", hex64(s.quadrature.seed)},
                     {"hermite_order", s.quadrature.hermite_order},
                     {"sphere_order", s.quadrature.sphere_order},
                     {"nonfinite_quota", s.quadrature.nonfinite_quota}};
  if (s.lambda_mode == LambdaElMode::User) {
    j["lambda_el"] = *s.lambda_value;
  } else {
    j["lambda_el"] = "galerkin";
  }
  j["degree"] = s.degree;
  j["verify"] = {{"samples", s.verify_samples}, {"seed", hex64(s.verify_seed)}, {"sigmas", s.sigmas}};
  j["nu_table"] = {{"grid", s.grid}, {"samples", s.nu_samples}};
  j["decay"] = {{"t_max", s.t_max}, {"steps", s.steps}};
  j["cpsi_convention"] = to_string(s.convention);
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void refresh_hash(Scenario& s) {
  s.canonical = canonical_json(s).dump();
  s.hash = fnv1a(s.canonical);
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col),
                      std::string("malformed scenario: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source, "scenario must be a JSON object");
  reject_unknown(doc, "", {"species", "solve_mass_action", "gamma", "kernels", "quadrature",
                           "lambda_el", "degree", "verify", "nu_table", "decay",
                           "cpsi_convention", "description"});

  // Mixture.
  if (!doc.contains("species") || !doc["species"].is_array() || doc["species"].size() != 4) {
    throw ConfigError("species", "expected an array of four species");
  }
  const bool solve = doc.value("solve_mass_action", false);
  SpeciesArray sp;
  for (int i = 0; i < kSpecies; ++i) {
    const json& node = doc["species"][i];
    const std::string prefix = "species[" + std::to_string(i + 1) + "].";
    if (!node.is_object()) throw ConfigError("species[" + std::to_string(i + 1) + "]", "expected an object");
    reject_unknown(node, prefix, {"mass", "energy", "concentration", "name"});
    if (!node.contains("mass")) throw ConfigError(prefix + "mass", "missing");
    sp[i].mass = get_number(node["mass"], prefix + "mass");
    sp[i].chem_energy = node.contains("energy") ? get_number(node["energy"], prefix + "energy") : 0.0;
    if (node.contains("concentration")) {
      sp[i].concentration = get_number(node["concentration"], prefix + "concentration");
    } else if (!(solve && i == 3)) {
      throw ConfigError(prefix + "concentration", "missing");
    }
  }
  if (!doc.contains("gamma")) throw ConfigError("gamma", "missing");
  const double gamma = get_number(doc["gamma"], "gamma");

  auto config = [&] {
    if (solve) {
      std::array<double, kSpecies> m{}, e{};
      for (int i = 0; i < kSpecies; ++i) {
        m[i] = sp[i].mass;
        e[i] = sp[i].chem_energy;
      }
      try {
        for (int i = 0; i < 3; ++i) {
          if (!(sp[i].concentration > 0.0)) {
            throw ConfigError("species[" + std::to_string(i + 1) + "].concentration",
                              "concentration must be positive");
          }
        }
        const double lhs = m[0] + m[1], rhs = m[2] + m[3];
        if (std::abs(lhs - rhs) > MixtureConfig::kMassTolerance * std::max(lhs, rhs)) {
          throw ConfigError("mass_conservation", "mass conservation m1 + m2 = m3 + m4 violated");
        }
        if (e[3] + e[2] - e[1] - e[0] < 0.0) {
          throw ConfigError("binding_energy", "E_12^34 = E4 + E3 - E2 - E1 must be >= 0");
        }
        return MixtureConfig::from_mass_action(m, e, sp[0].concentration, sp[1].concentration,
                                               sp[2].concentration, gamma);
      } catch (const ParameterError& err) {
        throw ConfigError("species", err.what());
      }
    }
    return MixtureConfig::create(sp, gamma);
  }();

  // Kernels.
  json kn = doc.value("kernels", json::object());
  if (!kn.is_object()) throw ConfigError("kernels", "expected an object");
  reject_unknown(kn, "kernels.", {"elastic", "reactive_constant", "backward_constant", "angular"});
  AngularPart ang = AngularPart::abs_cos_sin();
  if (kn.contains("angular")) {
    const json& a = kn["angular"];
    if (!a.is_object()) throw ConfigError("kernels.angular", "expected an object");
    reject_unknown(a, "kernels.angular.", {"family", "coefficient"});
    try {
      if (a.contains("family")) ang.family = angular_family_from_string(a["family"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("kernels.angular.family", e.what());
    }
    if (a.contains("coefficient")) ang.coefficient = get_number(a["coefficient"], "kernels.angular.coefficient");
    if (!(ang.coefficient > 0.0)) throw ConfigError("kernels.angular.coefficient", "must be positive");
  }
  ElasticKernelSet::Matrix4 el;
  for (auto& row : el) row.fill(1.0);
  if (kn.contains("elastic")) {
    const json& e = kn["elastic"];
    if (e.is_number()) {
      for (auto& row : el) row.fill(e.get<double>());
    } else if (e.is_array() && e.size() == 4) {
      for (int a = 0; a < 4; ++a) {
        if (!e[a].is_array() || e[a].size() != 4) throw ConfigError("kernels.elastic", "expected a 4x4 matrix");
        for (int b = 0; b < 4; ++b) {
          el[a][b] = get_number(e[a][b], "kernels.elastic[" + std::to_string(a + 1) + "][" +
                                             std::to_string(b + 1) + "]");
        }
      }
    } else {
      throw ConfigError("kernels.elastic", "expected a number or a 4x4 matrix");
    }
  }
  const double c_fwd = kn.contains("reactive_constant")
                           ? get_number(kn["reactive_constant"], "kernels.reactive_constant")
                           : 1.0;
  ElasticKernelSet elastic = ElasticKernelSet::create(el, gamma, ang);
  ReactiveKernelPair reactive =
      kn.contains("backward_constant")
          ? ReactiveKernelPair::with_backward_constant(
                config, c_fwd, get_number(kn["backward_constant"], "kernels.backward_constant"), ang)
          : ReactiveKernelPair::create(config, c_fwd, ang);

  // Quadrature.
  QuadratureSpec q;
  if (doc.contains("quadrature")) {
    const json& qn = doc["quadrature"];
    if (!qn.is_object()) throw ConfigError("quadrature", "expected an object");
    reject_unknown(qn, "quadrature.", {"mode", "samples", "block_size", "seed", "hermite_order",
                                       "sphere_order", "nonfinite_quota", "threads"});
    try {
      if (qn.contains("mode")) q.mode = quadrature_mode_from_string(qn["mode"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("quadrature.mode", e.what());
    }
    if (qn.contains("samples")) q.sample_count = get_count(qn["samples"], "quadrature.samples");
    if (qn.contains("block_size")) q.block_size = get_count(qn["block_size"], "quadrature.block_size");
    if (qn.contains("seed")) q.seed = get_count(qn["seed"], "quadrature.seed");
    if (qn.contains("hermite_order")) q.hermite_order = static_cast<int>(get_count(qn["hermite_order"], "quadrature.hermite_order"));
    if (qn.contains("sphere_order")) q.sphere_order = static_cast<int>(get_count(qn["sphere_order"], "quadrature.sphere_order"));
    if (qn.contains("nonfinite_quota")) q.nonfinite_quota = get_count(qn["nonfinite_quota"], "quadrature.nonfinite_quota");
    if (qn.contains("threads")) q.threads = static_cast<int>(get_count(qn["threads"], "quadrature.threads"));
  }
  try {
    q.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("quadrature", e.what());
  }

  Scenario s{.config = config, .kernels = KernelSuite{elastic, reactive}, .quadrature = q};
  if (doc.contains("lambda_el")) {
    const json& l = doc["lambda_el"];
    if (l.is_string() && l.get<std::string>() == "galerkin") {
      s.lambda_mode = LambdaElMode::Galerkin;
    } else if (l.is_number()) {
      s.lambda_mode = LambdaElMode::User;
      s.lambda_value = l.get<double>();
      if (!(*s.lambda_value > 0.0)) throw ConfigError("lambda_el", "must be positive");
    } else {
      throw ConfigError("lambda_el", "expected \"galerkin\" or a positive number");
    }
  }
  if (doc.contains("degree")) s.degree = static_cast<int>(get_count(doc["degree"], "degree"));
  if (s.degree < 3 || s.degree > 8) throw ConfigError("degree", "degree must lie in 3..8");
  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    reject_unknown(v, "verify.", {"samples", "seed", "sigmas"});
    if (v.contains("samples")) s.verify_samples = get_count(v["samples"], "verify.samples");
    if (v.contains("seed")) s.verify_seed = get_count(v["seed"], "verify.seed");
    if (v.contains("sigmas")) s.sigmas = get_number(v["sigmas"], "verify.sigmas");
  }
  if (doc.contains("nu_table")) {
    const json& v = doc["nu_table"];
    reject_unknown(v, "nu_table.", {"grid", "samples"});
    if (v.contains("grid")) {
      if (!v["grid"].is_string()) throw ConfigError("nu_table.grid", "expected a string");
      s.grid = v["grid"].get<std::string>();
    }
    if (v.contains("samples")) s.nu_samples = get_count(v["samples"], "nu_table.samples");
  }
  parse_grid(s.grid);
  if (doc.contains("decay")) {
    const json& v = doc["decay"];
    reject_unknown(v, "decay.", {"t_max", "steps"});
    if (v.contains("t_max")) s.t_max = get_number(v["t_max"], "decay.t_max");
    if (v.contains("steps")) s.steps = static_cast<int>(get_count(v["steps"], "decay.steps"));
    if (!(s.t_max > 0.0)) throw ConfigError("decay.t_max", "must be positive");
    if (s.steps < 4) throw ConfigError("decay.steps", "must be >= 4");
  }
  if (doc.contains("cpsi_convention")) {
    try {
      s.convention = cpsi_convention_from_string(doc["cpsi_convention"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("cpsi_convention", e.what());
    }
  }
  refresh_hash(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("scenario", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string default_scenario_text() {
  return R"({
  "description": "Equal masses, E_12^34 = 0.5, hard spheres (gamma = 1), c4 from the mass action law",
  "species": [
    {"name": "S1", "mass": 1.0, "energy": 0.0, "concentration": 1.0},
    {"name": "S2", "mass": 1.0, "energy": 0.0, "concentration": 1.0},
    {"name": "S3", "mass": 1.0, "energy": 0.25, "concentration": 1.0},
    {"name": "S4", "mass": 1.0, "energy": 0.25}
  ],
  "solve_mass_action": true,
  "gamma": 1.0,
  "kernels": {
    "elastic": 1.0,
    "reactive_constant": 1.0,
    "angular": {"family": "abs-cos-sin", "coefficient": 1.0}
  },
  "quadrature": {"mode": "monte-carlo", "samples": 262144, "block_size": 16384, "seed": "0x5EEDCAFE"},
  "lambda_el": "galerkin",
  "degree": 4,
  "verify": {"samples": 500, "seed": "0x5EEDCAFE", "sigmas": 4.0},
  "nu_table": {"grid": "0:10:0.25", "samples": 65536},
  "decay": {"t_max": 8.0, "steps": 2000},
  "cpsi_convention": "step4"
}
)";
}

Scenario default_scenario() { return parse_scenario(default_scenario_text(), "<default>"); }

}  // namespace rgap
