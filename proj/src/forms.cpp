#include "rgap/forms.hpp"

#include "rgap/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rgap {

std::string to_string(FormPart part) {
  switch (part) {
    case FormPart::Elastic: return "elastic";
    case FormPart::Chemical: return "chemical";
    case FormPart::Total: return "total";
  }
  return "unknown";
}

BlockQuadraticForm::BlockQuadraticForm(std::vector<Eigen::MatrixXd> blocks,
                                       std::vector<std::uint64_t> counts, QuadratureSpec spec,
                                       std::uint64_t skipped, bool deterministic)
    : blocks_(std::move(blocks)),
      counts_(std::move(counts)),
      spec_(spec),
      skipped_(skipped),
      deterministic_(deterministic) {
  if (blocks_.empty() || blocks_.size() != counts_.size()) {
    throw ParameterError("BlockQuadraticForm: empty or mismatched blocks");
  }
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  if (n == 0) throw IntegrationError("BlockQuadraticForm: no samples");
  mean_ = Eigen::MatrixXd::Zero(blocks_[0].rows(), blocks_[0].cols());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    mean_ += (static_cast<double>(counts_[b]) / static_cast<double>(n)) * blocks_[b];
  }
}

Estimate BlockQuadraticForm::bilinear(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  if (f.size() != dimension() || g.size() != dimension()) {
    throw ParameterError("form evaluated on a vector of the wrong dimension");
  }
  if (deterministic_) {
    Estimate e;
    e.value = f.dot(mean_ * g);
    e.scheme = spec_;
    e.evaluations = counts_[0];
    return e;
  }
  std::vector<double> sums(blocks_.size()), sq(blocks_.size(), 0.0);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    sums[b] = static_cast<double>(counts_[b]) * f.dot(blocks_[b] * g);
  }
  Estimate e = combine_blocks(sums, sq, counts_, 1.0, spec_, skipped_);
  return e;
}

Eigen::MatrixXd BlockQuadraticForm::projected_stderr(const Eigen::MatrixXd& basis) const {
  const Eigen::Index k = basis.cols();
  if (deterministic_ || blocks_.size() < 2) return Eigen::MatrixXd::Zero(k, k);
  std::uint64_t n = 0;
  for (auto c : counts_) n += c;
  const Eigen::MatrixXd mean = basis.transpose() * mean_ * basis;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(k, k);
  double wsum2 = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const double w = static_cast<double>(counts_[b]) / static_cast<double>(n);
    const Eigen::MatrixXd d = basis.transpose() * blocks_[b] * basis - mean;
    acc += w * d.cwiseProduct(d);
    wsum2 += w * w;
  }
  return (acc * (wsum2 / (1.0 - wsum2))).cwiseSqrt();
}

BlockQuadraticForm& BlockQuadraticForm::operator+=(const BlockQuadraticForm& other) {
  if (blocks_.empty()) {
    *this = other;
    return *this;
  }
  if (other.blocks_.size() != blocks_.size() || other.dimension() != dimension() ||
      other.deterministic_ != deterministic_) {
    throw ParameterError("cannot add forms with different block layouts");
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    // Independent streams: block means add.
    blocks_[b] += other.blocks_[b];
    counts_[b] = std::min(counts_[b], other.counts_[b]);
  }
  skipped_ += other.skipped_;
  mean_ += other.mean_;
  return *this;
}

namespace {

constexpr int kBatch = 256;

struct PairLayout {
  // Species occupying the compact coordinates, in order.
  std::vector<int> species;
  int n = 0;  // monomials per species
  int dim() const { return static_cast<int>(species.size()) * n; }
  int slot(int s) const {
    for (std::size_t k = 0; k < species.size(); ++k)
      if (species[k] == s) return static_cast<int>(k);
    return -1;
  }
};

// Accumulates sum_s w_s a_s a_s^T over a list of phase-space points.
class BlockAccumulator {
 public:
  explicit BlockAccumulator(int dim)
      : M_(Eigen::MatrixXd::Zero(dim, dim)), R_(kBatch, dim), used_(0) {}

  double* row() { return R_.row(used_).data(); }
  void commit(double weight) {
    R_.row(used_) *= std::sqrt(weight);
    if (++used_ == kBatch) flush();
  }
  Eigen::MatrixXd finish() {
    flush();
    return M_.selfadjointView<Eigen::Lower>();
  }

 private:
  void flush() {
    if (used_ == 0) return;
    M_.selfadjointView<Eigen::Lower>().rankUpdate(R_.topRows(used_).transpose());
    used_ = 0;
  }
  Eigen::MatrixXd M_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R_;
  int used_;
};

// A point of the collision phase space with its quadrature weight.
struct WeightedPoint {
  Vec3 v, vs, sigma;
  double weight;
};

// Generates the points of block b (Monte Carlo) or the whole tensor rule.
std::vector<WeightedPoint> points_for(const StateSpace& space, int i, int j,
                                      const QuadratureSpec& spec, std::uint64_t stream,
                                      std::uint64_t block, double& scale) {
  const auto& cfg = space.config();
  std::vector<WeightedPoint> pts;
  if (spec.mode == QuadratureMode::MonteCarlo) {
    std::vector<CollisionSample> s;
    collision_block(cfg, i, j, spec, stream, block, s);
    pts.reserve(s.size());
    for (const auto& p : s) pts.push_back({p.v, p.vs, p.sigma, 1.0});
    scale = cfg.concentration(i) * cfg.concentration(j) * 4.0 * std::numbers::pi;
    return pts;
  }
  const auto gi = gaussian_nodes(spec.hermite_order, cfg.mass(i));
  const auto gj = gaussian_nodes(spec.hermite_order, cfg.mass(j));
  const auto sph = sphere_rule(spec.sphere_order);
  const double ni = cfg.concentration(i) * std::pow(cfg.mass(i) / (2.0 * std::numbers::pi), 1.5);
  const double nj = cfg.concentration(j) * std::pow(cfg.mass(j) / (2.0 * std::numbers::pi), 1.5);
  for (const auto& a : gi)
    for (const auto& b : gi)
      for (const auto& c : gi)
        for (const auto& d : gj)
          for (const auto& e : gj)
            for (const auto& f : gj)
              for (std::size_t q = 0; q < sph.size(); ++q) {
                pts.push_back({Vec3(a.node, b.node, c.node), Vec3(d.node, e.node, f.node),
                               sph.nodes[q],
                               a.weight * b.weight * c.weight * d.weight * e.weight * f.weight *
                                   sph.weights[q]});
              }
  scale = ni * nj;
  return pts;
}

double cos_theta(const Vec3& v, const Vec3& vs, const Vec3& sigma, double g) {
  if (g == 0.0) return sigma.z();
  return std::clamp(sigma.dot(v - vs) / g, -1.0, 1.0);
}

// Generic assembly: `fill(point, row) -> weight` writes the bracket row in
// compact coordinates and returns the nonnegative kernel weight (NaN to skip,
// 0 for no contribution).
template <class Fill>
BlockQuadraticForm assemble(const StateSpace& space, int i, int j, const PairLayout& layout,
                            double prefactor, const QuadratureSpec& spec, std::uint64_t stream,
                            Fill fill) {
  spec.validate();
  const bool mc = spec.mode == QuadratureMode::MonteCarlo;
  const std::uint64_t nb = mc ? spec.block_count() : 1;
  if (mc && nb < 2) {
    throw ParameterError("form estimates need at least two sample blocks (sample_count > block_size)");
  }
  const int dim = space.dimension();
  const int N = space.monomial_count();
  std::vector<Eigen::MatrixXd> blocks(nb);
  std::vector<std::uint64_t> counts(nb, 0);
  std::vector<std::uint64_t> skipped(nb, 0);

  parallel_blocks(nb, mc ? spec.threads : 1, [&](std::uint64_t b) {
    double scale = 0.0;
    const auto pts = points_for(space, i, j, spec, stream, b, scale);
    BlockAccumulator acc(layout.dim());
    std::uint64_t n = 0, bad = 0;
    for (const auto& p : pts) {
      double* row = acc.row();
      const double w = fill(p, row);
      if (!std::isfinite(w)) {
        ++bad;
        continue;
      }
      ++n;
      if (w == 0.0) continue;
      acc.commit(w * p.weight);
    }
    Eigen::MatrixXd compact = acc.finish();
    // Monte Carlo: block mean. Tensor: weighted sum.
    const double factor = prefactor * scale / (mc ? static_cast<double>(std::max<std::uint64_t>(n, 1)) : 1.0);
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(dim, dim);
    const int ns = static_cast<int>(layout.species.size());
    for (int a = 0; a < ns; ++a)
      for (int c = 0; c < ns; ++c)
        full.block(layout.species[a] * N, layout.species[c] * N, N, N) +=
            factor * compact.block(a * N, c * N, N, N);
    blocks[b] = std::move(full);
    counts[b] = mc ? n : 1;
    skipped[b] = bad;
  });
  std::uint64_t total_skipped = 0;
  for (auto s : skipped) total_skipped += s;
  if (total_skipped > spec.nonfinite_quota) {
    throw IntegrationError("non-finite kernel samples (" + std::to_string(total_skipped) +
                           ") exceed quota " + std::to_string(spec.nonfinite_quota));
  }
  return BlockQuadraticForm(std::move(blocks), std::move(counts), spec, total_skipped, !mc);
}

}  // namespace

BlockQuadraticForm assemble_elastic_pair(const StateSpace& space, const KernelSuite& kernels,
                                         int i, int j, const QuadratureSpec& spec) {
  check_species(i);
  check_species(j);
  const auto& cfg = space.config();
  const int N = space.monomial_count();
  PairLayout layout;
  layout.n = N;
  layout.species = i == j ? std::vector<int>{i} : std::vector<int>{i, j};
  const int si = 0;
  const int sj = layout.slot(j);
  const double mi = cfg.mass(i), mj = cfg.mass(j);
  const auto& mono = space.monomials();
  const auto& set = kernels.elastic;

  auto fill = [&, N](const WeightedPoint& p, double* row) {
    const double g = (p.v - p.vs).norm();
    const double w = eval_elastic(set, i, j, g, cos_theta(p.v, p.vs, p.sigma, g));
    if (w == 0.0) return 0.0;
    const VelocityPair post = elastic_post(p.v, p.vs, p.sigma, mi, mj);
    double a[64], b[64], c[64], d[64];
    mono.evaluate(post.v, a);
    mono.evaluate(p.v, b);
    mono.evaluate(post.vs, c);
    mono.evaluate(p.vs, d);
    std::fill(row, row + layout.dim(), 0.0);
    for (int k = 0; k < N; ++k) {
      row[si * N + k] += a[k] - b[k];
      row[sj * N + k] += c[k] - d[k];
    }
    return w;
  };
  if (N > 64) throw ParameterError("state space degree too large for form assembly");
  return assemble(space, i, j, layout, -0.25, spec, 16 + 4 * static_cast<std::uint64_t>(i) + j,
                  fill);
}

BlockQuadraticForm assemble_chemical(const StateSpace& space, const KernelSuite& kernels,
                                     const QuadratureSpec& spec) {
  const auto& cfg = space.config();
  const int N = space.monomial_count();
  if (N > 64) throw ParameterError("state space degree too large for form assembly");
  PairLayout layout;
  layout.n = N;
  layout.species = {0, 1, 2, 3};
  const auto quad = ReactionQuadruple::forward();
  const auto& mono = space.monomials();
  const auto& pair = kernels.reactive;

  auto fill = [&, N](const WeightedPoint& p, double* row) {
    const double g = (p.v - p.vs).norm();
    const auto post = reactive_post(p.v, p.vs, p.sigma, quad, cfg);
    if (!post) return 0.0;  // below threshold
    if (g == 0.0 && pair.gamma() < 1.0) return std::numeric_limits<double>::quiet_NaN();
    const double w = eval_reactive(pair, quad, g, cos_theta(p.v, p.vs, p.sigma, g), cfg);
    if (w == 0.0) return 0.0;
    mono.evaluate(p.v, row);
    mono.evaluate(p.vs, row + N);
    mono.evaluate(post->v, row + 2 * N);
    mono.evaluate(post->vs, row + 3 * N);
    for (int k = 0; k < 2 * N; ++k) row[k] = -row[k];
    return w;
  };
  return assemble(space, 0, 1, layout, -1.0, spec, 1, fill);
}

CollisionFormSampler::CollisionFormSampler(std::shared_ptr<const StateSpace> space,
                                           KernelSuite kernels, QuadratureSpec spec)
    : space_(std::move(space)), kernels_(std::move(kernels)), spec_(spec) {
  if (!space_) throw ParameterError("CollisionFormSampler: null state space");
  spec_.validate();
}

const BlockQuadraticForm& CollisionFormSampler::elastic() const {
  if (!elastic_) {
    auto form = std::make_unique<BlockQuadraticForm>();
    for (int i = 0; i < kSpecies; ++i)
      for (int j = 0; j < kSpecies; ++j) *form += assemble_elastic_pair(*space_, kernels_, i, j, spec_);
    elastic_ = std::move(form);
  }
  return *elastic_;
}

const BlockQuadraticForm& CollisionFormSampler::chemical() const {
  if (!chemical_) {
    chemical_ = std::make_unique<BlockQuadraticForm>(assemble_chemical(*space_, kernels_, spec_));
  }
  return *chemical_;
}

const BlockQuadraticForm& CollisionFormSampler::total() const {
  if (!total_) {
    auto form = std::make_unique<BlockQuadraticForm>(elastic());
    *form += chemical();
    total_ = std::move(form);
  }
  return *total_;
}

const BlockQuadraticForm& CollisionFormSampler::form(FormPart part) const {
  switch (part) {
    case FormPart::Elastic: return elastic();
    case FormPart::Chemical: return chemical();
    case FormPart::Total: return total();
  }
  return total();
}

Estimate dirichlet_elastic(const CollisionFormSampler& sampler, const Perturbation& f) {
  sampler.space().check(f);
  return sampler.elastic().quadratic(f.coeffs);
}

Estimate dirichlet_chemical(const CollisionFormSampler& sampler, const Perturbation& f) {
  sampler.space().check(f);
  return sampler.chemical().quadratic(f.coeffs);
}

Estimate weak_form_elastic(const CollisionFormSampler& sampler, const Perturbation& F,
                           const Perturbation& psi) {
  sampler.space().check(F);
  sampler.space().check(psi);
  return sampler.elastic().bilinear(F.coeffs, psi.coeffs);
}

Estimate weak_form_chemical(const CollisionFormSampler& sampler, const Perturbation& F,
                            const Perturbation& psi) {
  sampler.space().check(F);
  sampler.space().check(psi);
  return sampler.chemical().bilinear(F.coeffs, psi.coeffs);
}

GalerkinMatrix assemble_galerkin(const CollisionFormSampler& sampler, const BasisSet& basis,
                                 FormPart part) {
  const int k = static_cast<int>(basis.size());
  if (k == 0) throw ParameterError("assemble_galerkin: empty basis");
  Eigen::MatrixXd B(sampler.space().dimension(), k);
  for (int a = 0; a < k; ++a) {
    sampler.space().check(basis.vectors[a]);
    B.col(a) = basis.vectors[a].coeffs;
  }
  const auto& form = sampler.form(part);
  // Polarization on matched samples reduces to B^T M B.
  const Eigen::MatrixXd raw = B.transpose() * form.mean() * B;
  GalerkinMatrix g;
  g.part = part;
  g.max_asymmetry = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  g.entries = 0.5 * (raw + raw.transpose());
  g.stderr_ = form.projected_stderr(B);
  g.labels = basis.labels;
  return g;
}

}  // namespace rgap
