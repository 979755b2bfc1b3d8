#include "rgap/quadrature.hpp"

#include "rgap/mixture.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace rgap {

std::string to_string(QuadratureMode mode) {
  return mode == QuadratureMode::MonteCarlo ? "monte-carlo" : "tensor-deterministic";
}

QuadratureMode quadrature_mode_from_string(const std::string& name) {
  if (name == "monte-carlo" || name == "mc") return QuadratureMode::MonteCarlo;
  if (name == "tensor-deterministic" || name == "tensor") return QuadratureMode::TensorDeterministic;
  throw ParameterError("unknown quadrature mode '" + name + "'");
}

void QuadratureSpec::validate() const {
  if (hermite_order < 2) throw ParameterError("hermite_order must be >= 2");
  if (sphere_order < 1 || sphere_order > kMaxSphereDegree) {
    throw ParameterError("sphere_order must lie in 1.." + std::to_string(kMaxSphereDegree));
  }
  if (sample_count < 1) throw ParameterError("sample_count must be >= 1");
  if (block_size < 1) throw ParameterError("block_size must be >= 1");
  if (threads < 0) throw ParameterError("threads must be >= 0");
}

bool Estimate::consistent_with(double reference, double sigmas, double abs_floor) const {
  return std::abs(value - reference) <= sigmas * std_error + abs_floor;
}

namespace {

// Golub-Welsch for a symmetric Jacobi matrix with zero diagonal.
std::vector<GaussNode> golub_welsch(int order, const std::function<double(int)>& offdiag,
                                    double mu0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    J(k, k - 1) = J(k - 1, k) = offdiag(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) throw NumericalError("Golub-Welsch eigensolver failed");
  std::vector<GaussNode> rule(order);
  for (int k = 0; k < order; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule[k] = {es.eigenvalues()(k), mu0 * v0 * v0};
  }
  // Symmetric weight: enforce exact node/weight symmetry.
  for (int k = 0; k < order / 2; ++k) {
    auto& a = rule[k];
    auto& b = rule[order - 1 - k];
    const double x = 0.5 * (b.node - a.node);
    const double w = 0.5 * (a.weight + b.weight);
    a = {-x, w};
    b = {x, w};
  }
  if (order % 2 == 1) rule[order / 2].node = 0.0;
  return rule;
}

}  // namespace

std::vector<GaussNode> gaussian_nodes(int order, double mass) {
  if (order < 2) throw ParameterError("gaussian_nodes: order must be >= 2");
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ParameterError("gaussian_nodes: mass must be positive");
  }
  // Probabilists' Hermite recurrence, weight exp(-x^2/2); then x -> x / sqrt(m).
  auto rule = golub_welsch(
      order, [](int k) { return std::sqrt(static_cast<double>(k)); },
      std::sqrt(2.0 * std::numbers::pi));
  const double s = 1.0 / std::sqrt(mass);
  for (auto& n : rule) {
    n.node *= s;
    n.weight *= s;
  }
  return rule;
}

std::vector<GaussNode> legendre_nodes(int order, double a, double b) {
  if (order < 1) throw ParameterError("legendre_nodes: order must be >= 1");
  if (!(b > a)) throw ParameterError("legendre_nodes: empty interval");
  if (order == 1) return {{0.5 * (a + b), b - a}};
  auto rule = golub_welsch(
      order,
      [](int k) {
        const double kk = static_cast<double>(k);
        return kk / std::sqrt(4.0 * kk * kk - 1.0);
      },
      2.0);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (auto& n : rule) {
    n.node = mid + half * n.node;
    n.weight *= half;
  }
  return rule;
}

SphereRule sphere_rule(int degree) {
  if (degree < 1 || degree > kMaxSphereDegree) {
    throw ParameterError("sphere_rule: unsupported degree " + std::to_string(degree) +
                         " (supported 1.." + std::to_string(kMaxSphereDegree) + ")");
  }
  const int n_theta = (degree + 2) / 2;  // 2 n - 1 >= degree
  const int n_phi = degree + 1;
  const auto leg = legendre_nodes(n_theta);
  SphereRule rule;
  rule.degree = degree;
  rule.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  rule.weights.reserve(rule.nodes.capacity());
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  for (const auto& [z, w] : leg) {
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int p = 0; p < n_phi; ++p) {
      const double phi = (p + 0.5) * dphi;
      Vec3 node(s * std::cos(phi), s * std::sin(phi), z);
      node /= node.norm();
      rule.nodes.push_back(node);
      rule.weights.push_back(w * dphi);
    }
  }
  return rule;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ (block * 0xd1b54a32d192ed03ULL));
}

namespace {

std::uint64_t block_length(const QuadratureSpec& spec, std::uint64_t block) {
  const std::uint64_t start = block * spec.block_size;
  return std::min(spec.block_size, spec.sample_count - start);
}

Vec3 gaussian_vec(std::mt19937_64& rng, std::normal_distribution<double>& nd, double scale) {
  const double x = nd(rng);
  const double y = nd(rng);
  const double z = nd(rng);
  return Vec3(x, y, z) * scale;
}

Vec3 unit_vec(std::mt19937_64& rng, std::normal_distribution<double>& nd) {
  for (;;) {
    Vec3 s = gaussian_vec(rng, nd, 1.0);
    const double n = s.norm();
    if (n > 1e-12) return s / n;
  }
}

}  // namespace

void collision_block(const MixtureConfig& config, int i, int j, const QuadratureSpec& spec,
                     std::uint64_t stream, std::uint64_t block, std::vector<CollisionSample>& out) {
  check_species(i);
  check_species(j);
  const std::uint64_t n = block_length(spec, block);
  out.resize(n);
  std::mt19937_64 rng(substream_seed(spec.seed, stream, block));
  std::normal_distribution<double> nd(0.0, 1.0);
  const double si = 1.0 / std::sqrt(config.mass(i));
  const double sj = 1.0 / std::sqrt(config.mass(j));
  for (auto& s : out) {
    s.v = gaussian_vec(rng, nd, si);
    s.vs = gaussian_vec(rng, nd, sj);
    s.sigma = unit_vec(rng, nd);
  }
}

void partner_block(const MixtureConfig& config, int j, const QuadratureSpec& spec,
                   std::uint64_t stream, std::uint64_t block, std::vector<PartnerSample>& out) {
  check_species(j);
  const std::uint64_t n = block_length(spec, block);
  out.resize(n);
  std::mt19937_64 rng(substream_seed(spec.seed, stream, block));
  std::normal_distribution<double> nd(0.0, 1.0);
  const double sj = 1.0 / std::sqrt(config.mass(j));
  for (auto& s : out) {
    s.vs = gaussian_vec(rng, nd, sj);
    s.sigma = unit_vec(rng, nd);
  }
}

void parallel_blocks(std::uint64_t blocks, int threads,
                     const std::function<void(std::uint64_t)>& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::min<std::uint64_t>(blocks, 1024))));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= blocks) return;
        try {
          fn(b);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(blocks);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Estimate combine_blocks(std::span<const double> block_sums, std::span<const double> block_sq_sums,
                        std::span<const std::uint64_t> block_counts, double scale,
                        const QuadratureSpec& spec, std::uint64_t skipped) {
  const std::size_t nb = block_sums.size();
  if (block_sq_sums.size() != nb || block_counts.size() != nb) {
    throw ParameterError("combine_blocks: mismatched block arrays");
  }
  Estimate est;
  est.scheme = spec;
  est.skipped = skipped;
  std::uint64_t total = 0;
  double sum = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    total += block_counts[b];
    sum += block_sums[b];
  }
  est.evaluations = total + skipped;
  if (total == 0) throw IntegrationError("no finite integrand samples");
  const double mean = sum / static_cast<double>(total);
  est.value = scale * mean;

  std::size_t used = 0;
  double var_of_mean = 0.0;
  for (std::size_t b = 0; b < nb; ++b) used += block_counts[b] > 0 ? 1 : 0;
  if (used >= 2) {
    // Weighted block means; for equal block sizes this is the plain
    // standard error of the block means.
    double acc = 0.0;
    double wsum2 = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      if (block_counts[b] == 0) continue;
      const double w = static_cast<double>(block_counts[b]) / static_cast<double>(total);
      const double d = block_sums[b] / static_cast<double>(block_counts[b]) - mean;
      acc += w * d * d;
      wsum2 += w * w;
    }
    var_of_mean = acc * wsum2 / std::max(1e-300, 1.0 - wsum2);
  } else if (total >= 2) {
    double sq = 0.0;
    for (std::size_t b = 0; b < nb; ++b) sq += block_sq_sums[b];
    const double n = static_cast<double>(total);
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
    var_of_mean = var / n;
  }
  est.std_error = std::abs(scale) * std::sqrt(std::max(0.0, var_of_mean));
  return est;
}

namespace {

struct BlockAccumulator {
  std::vector<double> sums;
  std::vector<double> sq;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> skipped;

  explicit BlockAccumulator(std::uint64_t n) : sums(n, 0.0), sq(n, 0.0), counts(n, 0), skipped(n, 0) {}

  std::uint64_t total_skipped() const {
    std::uint64_t s = 0;
    for (auto k : skipped) s += k;
    return s;
  }
};

void check_quota(std::uint64_t skipped, const QuadratureSpec& spec) {
  if (skipped > spec.nonfinite_quota) {
    throw IntegrationError("non-finite integrand samples (" + std::to_string(skipped) +
                           ") exceed quota " + std::to_string(spec.nonfinite_quota));
  }
}

}  // namespace

Estimate collision_integral(const CollisionIntegrand& integrand, const MixtureConfig& config, int i,
                            int j, const QuadratureSpec& spec, std::uint64_t stream) {
  spec.validate();
  check_species(i);
  check_species(j);
  const double ci = config.concentration(i);
  const double cj = config.concentration(j);

  if (spec.mode == QuadratureMode::TensorDeterministic) {
    const auto gi = gaussian_nodes(spec.hermite_order, config.mass(i));
    const auto gj = gaussian_nodes(spec.hermite_order, config.mass(j));
    const auto sph = sphere_rule(spec.sphere_order);
    const double ni = ci * std::pow(config.mass(i) / (2.0 * std::numbers::pi), 1.5);
    const double nj = cj * std::pow(config.mass(j) / (2.0 * std::numbers::pi), 1.5);
    double total = 0.0;
    std::uint64_t evals = 0;
    std::uint64_t skipped = 0;
    for (const auto& a : gi)
      for (const auto& b : gi)
        for (const auto& c : gi) {
          const Vec3 v(a.node, b.node, c.node);
          const double wv = a.weight * b.weight * c.weight;
          double inner = 0.0;
          for (const auto& d : gj)
            for (const auto& e : gj)
              for (const auto& f : gj) {
                const Vec3 vs(d.node, e.node, f.node);
                const double wvs = d.weight * e.weight * f.weight;
                double s = 0.0;
                for (std::size_t q = 0; q < sph.size(); ++q) {
                  const double val = integrand(v, vs, sph.nodes[q]);
                  ++evals;
                  if (!std::isfinite(val)) {
                    ++skipped;
                    continue;
                  }
                  s += sph.weights[q] * val;
                }
                inner += wvs * s;
              }
          total += wv * inner;
        }
    check_quota(skipped, spec);
    Estimate est;
    est.value = ni * nj * total;
    est.scheme = spec;
    est.evaluations = evals;
    est.skipped = skipped;
    return est;
  }

  const std::uint64_t nb = spec.block_count();
  BlockAccumulator acc(nb);
  parallel_blocks(nb, spec.threads, [&](std::uint64_t b) {
    std::vector<CollisionSample> samples;
    collision_block(config, i, j, spec, stream, b, samples);
    double s = 0.0, s2 = 0.0;
    std::uint64_t n = 0, bad = 0;
    for (const auto& p : samples) {
      const double val = integrand(p.v, p.vs, p.sigma);
      if (!std::isfinite(val)) {
        ++bad;
        continue;
      }
      s += val;
      s2 += val * val;
      ++n;
    }
    acc.sums[b] = s;
    acc.sq[b] = s2;
    acc.counts[b] = n;
    acc.skipped[b] = bad;
  });
  const std::uint64_t skipped = acc.total_skipped();
  check_quota(skipped, spec);
  return combine_blocks(acc.sums, acc.sq, acc.counts, ci * cj * 4.0 * std::numbers::pi, spec,
                        skipped);
}

Estimate partner_integral(const PartnerIntegrand& integrand, const MixtureConfig& config, int j,
                          const QuadratureSpec& spec, std::uint64_t stream) {
  spec.validate();
  check_species(j);
  const double cj = config.concentration(j);

  if (spec.mode == QuadratureMode::TensorDeterministic) {
    const auto gj = gaussian_nodes(spec.hermite_order, config.mass(j));
    const auto sph = sphere_rule(spec.sphere_order);
    const double nj = cj * std::pow(config.mass(j) / (2.0 * std::numbers::pi), 1.5);
    double total = 0.0;
    std::uint64_t evals = 0, skipped = 0;
    for (const auto& d : gj)
      for (const auto& e : gj)
        for (const auto& f : gj) {
          const Vec3 vs(d.node, e.node, f.node);
          double s = 0.0;
          for (std::size_t q = 0; q < sph.size(); ++q) {
            const double val = integrand(vs, sph.nodes[q]);
            ++evals;
            if (!std::isfinite(val)) {
              ++skipped;
              continue;
            }
            s += sph.weights[q] * val;
          }
          total += d.weight * e.weight * f.weight * s;
        }
    check_quota(skipped, spec);
    Estimate est;
    est.value = nj * total;
    est.scheme = spec;
    est.evaluations = evals;
    est.skipped = skipped;
    return est;
  }

  const std::uint64_t nb = spec.block_count();
  BlockAccumulator acc(nb);
  parallel_blocks(nb, spec.threads, [&](std::uint64_t b) {
    std::vector<PartnerSample> samples;
    partner_block(config, j, spec, stream, b, samples);
    double s = 0.0, s2 = 0.0;
    std::uint64_t n = 0, bad = 0;
    for (const auto& p : samples) {
      const double val = integrand(p.vs, p.sigma);
      if (!std::isfinite(val)) {
        ++bad;
        continue;
      }
      s += val;
      s2 += val * val;
      ++n;
    }
    acc.sums[b] = s;
    acc.sq[b] = s2;
    acc.counts[b] = n;
    acc.skipped[b] = bad;
  });
  const std::uint64_t skipped = acc.total_skipped();
  check_quota(skipped, spec);
  return combine_blocks(acc.sums, acc.sq, acc.counts, cj * 4.0 * std::numbers::pi, spec, skipped);
}

}  // namespace rgap
