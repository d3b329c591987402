#include "dpprig/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>

#include "dpprig/errors.hpp"
#include "dpprig/parallel.hpp"
#include "dpprig/quadrature.hpp"

namespace dpprig {
namespace {

constexpr double kClipTolerance = 1e-6;
constexpr int kNodesPerPanel = 20;
constexpr Eigen::Index kMaxBruteForceSites = 12;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void fill_matrix(const KernelSpec& spec, DiscretizedOperator& op) {
  const std::vector<double> pts(op.nodes.data(), op.nodes.data() + op.nodes.size());
  const KernelSamples s(spec, pts);
  const Eigen::Index n = s.size();
  const Eigen::VectorXd root = op.weights.cwiseSqrt();
  op.matrix.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = root(i) * root(j) * s(i, j);
      op.matrix(i, j) = v;
      op.matrix(j, i) = v;
    }
  }
}

void put_f64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  unsigned char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

KernelSamples lattice_sites(const KernelSpec& spec, Interval window) {
  if (!spec.is_lattice()) throw DomainError("LatticeSampler: " + spec.name() + " is not a lattice kernel");
  const auto pts = spec.phase_space.lattice_points(window);
  if (pts.empty()) throw DomainError("LatticeSampler: window contains no lattice points");
  return KernelSamples(spec, pts);
}

double get_f64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ConfigError("spectral cache: truncated file");
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return std::bit_cast<double>(bits);
}

}  // namespace

DiscretizedOperator discretize(const KernelSpec& spec, Interval window, int n) {
  if (!std::isfinite(window.lower) || !std::isfinite(window.upper) || !(window.upper > window.lower)) {
    throw DomainError("discretize: window must be a bounded nonempty interval");
  }
  if (window.lower < spec.phase_space.bounds.lower || window.upper > spec.phase_space.bounds.upper) {
    throw DomainError("discretize: window leaves the phase space of " + spec.name());
  }
  DiscretizedOperator op;
  op.window = window;
  op.lattice = spec.is_lattice();
  if (op.lattice) {
    const auto pts = spec.phase_space.lattice_points(window);
    if (pts.empty()) throw DomainError("discretize: window contains no lattice points");
    op.nodes = Eigen::Map<const Eigen::VectorXd>(pts.data(), static_cast<Eigen::Index>(pts.size()));
    op.weights = Eigen::VectorXd::Ones(op.nodes.size());
  } else {
    if (n < 2) throw ParameterError("discretize: need at least two nodes");
    const int panels = (n + kNodesPerPanel - 1) / kNodesPerPanel;
    const auto bp = uniform_breakpoints(window.lower, window.upper, panels);
    op.nodes.resize(n);
    op.weights.resize(n);
    Eigen::Index at = 0;
    for (int p = 0; p < panels; ++p) {
      const int order = n / panels + (p < n % panels ? 1 : 0);
      const std::vector<double> panel{bp[static_cast<std::size_t>(p)], bp[static_cast<std::size_t>(p) + 1]};
      const auto rule = composite_gauss_legendre(panel, order);
      op.nodes.segment(at, order) = rule.nodes;
      op.weights.segment(at, order) = rule.weights;
      at += order;
    }
  }
  fill_matrix(spec, op);
  return op;
}

DiscretizedOperator finite_operator(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw ParameterError("finite_operator: need a square matrix");
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ParameterError("finite_operator: matrix is not symmetric");
  }
  DiscretizedOperator op;
  const Eigen::Index n = matrix.rows();
  op.nodes = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
  op.weights = Eigen::VectorXd::Ones(n);
  op.matrix = matrix;
  op.window = {0.0, static_cast<double>(n - 1)};
  op.lattice = true;
  return op;
}

SpectralData eigendecompose(const DiscretizedOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op.matrix);
  if (solver.info() != Eigen::Success) throw DiscretizationError("eigendecompose: eigensolver failed");
  SpectralData sd;
  sd.eigenvalues = solver.eigenvalues();
  sd.eigenvectors = solver.eigenvectors();
  for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
    double& l = sd.eigenvalues(i);
    sd.clip_amount = std::max({sd.clip_amount, -l, l - 1.0});
    l = std::clamp(l, 0.0, 1.0);
  }
  if (sd.clip_amount > kClipTolerance) {
    throw DiscretizationError("eigendecompose: eigenvalues leave [0, 1] by " + std::to_string(sd.clip_amount) +
                              "; refine the discretization");
  }
  sd.source = op;
  return sd;
}

std::size_t Configuration::count(Interval set) const {
  const auto lo = std::lower_bound(points.begin(), points.end(), set.lower);
  const auto hi = std::upper_bound(points.begin(), points.end(), set.upper);
  return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Configuration sample(const SpectralData& sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index n = sd.eigenvalues.size();
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (uniform01(rng) < sd.eigenvalues(i)) kept.push_back(i);
  }
  Eigen::MatrixXd Y(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) Y.col(static_cast<Eigen::Index>(c)) = sd.eigenvectors.col(kept[c]);

  Configuration conf;
  conf.window = sd.source.window;
  conf.seed = seed;
  while (Y.cols() > 0) {
    const Eigen::VectorXd p = Y.rowwise().squaredNorm();
    const double total = p.sum();
    const auto k = static_cast<double>(Y.cols());
    if (std::abs(total - k) > 1e-9 * n * k) {
      throw SamplerError("sample: conditional density does not integrate to the remaining count");
    }
    const double target = uniform01(rng) * total;
    Eigen::Index j = 0;
    double acc = p(0);
    while (acc <= target && j + 1 < n) acc += p(++j);
    while (p(j) <= 0.0 && j > 0) --j;  // never land on a zero-probability node
    conf.points.push_back(sd.source.nodes(j));

    // Householder reflection H with (Y H) e_j-row = alpha e_1; dropping the
    // first column leaves an orthonormal basis of the span orthogonal to e_j.
    Eigen::VectorXd u = Y.row(j).transpose();
    const double alpha = (u(0) >= 0.0 ? -1.0 : 1.0) * u.norm();
    u(0) -= alpha;
    const double uu = u.squaredNorm();
    if (uu > 0.0) Y -= (2.0 / uu) * (Y * u) * u.transpose();
    Y = Y.rightCols(Y.cols() - 1).eval();
  }
  std::sort(conf.points.begin(), conf.points.end());
  return conf;
}

std::vector<Configuration> sample_many(const SpectralData& sd, std::uint64_t master, std::size_t count) {
  std::vector<Configuration> out(count);
  parallel_blocks(count, [&](std::size_t i) { out[i] = sample(sd, derive_seed(master, i)); });
  return out;
}

LatticeSampler::LatticeSampler(const KernelSpec& spec, Interval window)
    : sites_(lattice_sites(spec, window)), window_(window) {}

Configuration LatticeSampler::sample(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const Eigen::Index n = sites_.size();
  const Eigen::VectorXd& x = sites_.points();
  // Off-diagonal K_ij = (g1_i h1_j + g2_i h2_j) / (x_i - x_j); d holds the diagonal.
  Eigen::VectorXd g1 = sites_.prefactor() * sites_.a(), g2 = sites_.prefactor() * sites_.b();
  Eigen::VectorXd h1 = sites_.b(), h2 = -sites_.a();
  Eigen::VectorXd d = sites_.diagonal();

  Configuration conf;
  conf.window = window_;
  conf.seed = seed;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = std::clamp(d(i), 0.0, 1.0);
    const bool keep = uniform01(rng) < p;
    if (keep) conf.points.push_back(x(i));
    // Condition on the decision: Schur complement with pivot K_ii (kept) or
    // K_ii - 1 (not kept). A diagonal shift leaves the generators valid.
    const double pivot = keep ? d(i) : d(i) - 1.0;
    if (std::abs(pivot) < 1e-300) continue;
    const double inv = 1.0 / pivot;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double l = (g1(j) * h1(i) + g2(j) * h2(i)) / (x(j) - x(i));
      const double t = l * inv;
      d(j) -= t * l;
      g1(j) -= t * g1(i);
      g2(j) -= t * g2(i);
      h1(j) -= t * h1(i);
      h2(j) -= t * h2(i);
    }
  }
  return conf;
}

std::vector<Configuration> LatticeSampler::sample_many(std::uint64_t master, std::size_t count) const {
  std::vector<Configuration> out(count);
  parallel_blocks(count, [&](std::size_t i) { out[i] = sample(derive_seed(master, i)); });
  return out;
}

double fredholm_det(const SpectralData& sd, const std::function<double(double)>& g) {
  const auto& nodes = sd.source.nodes;
  Eigen::VectorXd h(nodes.size());
  for (Eigen::Index i = 0; i < nodes.size(); ++i) h(i) = g(nodes(i)) - 1.0;
  if (h.isZero(0.0)) return 1.0;
  // K^(1/2) diag(h) K^(1/2) has the nonzero spectrum of L = Lambda^(1/2) V^T diag(h) V Lambda^(1/2)
  const Eigen::MatrixXd B = sd.eigenvectors * sd.eigenvalues.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd L = B.transpose() * h.asDiagonal() * B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L, Eigen::EigenvaluesOnly);
  double det = 1.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) det *= 1.0 + solver.eigenvalues()(i);
  return det;
}

double generating_function(const SpectralData& sd, std::span<const Interval> sets, std::span<const double> z) {
  if (sets.size() != z.size()) throw ConfigError("generating_function: one z per set required");
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = a + 1; b < sets.size(); ++b) {
      if (sets[a].lower <= sets[b].upper && sets[b].lower <= sets[a].upper) {
        throw ConfigError("generating_function: sets must be disjoint");
      }
    }
  }
  return fredholm_det(sd, [&](double x) {
    for (std::size_t a = 0; a < sets.size(); ++a) {
      if (sets[a].contains(x)) return z[a];
    }
    return 1.0;
  });
}

std::vector<double> brute_force_law(const DiscretizedOperator& op) {
  if (!op.lattice) throw DomainError("brute_force_law: needs a lattice window");
  const Eigen::Index k = op.matrix.rows();
  if (k > kMaxBruteForceSites) throw SizeError("brute_force_law: at most 12 sites");
  const std::size_t subsets = std::size_t{1} << k;
  std::vector<double> law(subsets);
  double total = 0.0;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    // P(S) = (-1)^{|S^c|} det(K - I_{S^c})
    Eigen::MatrixXd M = op.matrix;
    int outside = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!(mask >> i & 1U)) {
        M(i, i) -= 1.0;
        ++outside;
      }
    }
    const double det = k == 0 ? 1.0 : M.partialPivLu().determinant();
    const double p = (outside % 2 == 0) ? det : -det;
    if (p < -1e-12) throw ConsistencyError("brute_force_law: negative subset probability; kernel is not a DPP kernel");
    law[mask] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ConsistencyError("brute_force_law: probabilities do not sum to one");
  return law;
}

void write_spectral_cache(const std::string& path, const SpectralData& sd) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("spectral cache: cannot open " + path);
  const Eigen::Index n = sd.eigenvalues.size();
  put_f64(out, static_cast<double>(n));
  put_f64(out, sd.source.window.lower);
  put_f64(out, sd.source.window.upper);
  for (Eigen::Index i = 0; i < n; ++i) put_f64(out, sd.source.nodes(i));
  for (Eigen::Index i = 0; i < n; ++i) put_f64(out, sd.source.weights(i));
  for (Eigen::Index i = 0; i < n; ++i) put_f64(out, sd.eigenvalues(i));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) put_f64(out, sd.eigenvectors(i, j));
  }
  if (!out) throw ConfigError("spectral cache: write failed for " + path);
}

SpectralData read_spectral_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("spectral cache: cannot open " + path);
  const double nd = get_f64(in);
  if (!(nd >= 1.0 && nd < 1e5) || nd != std::floor(nd)) throw ConfigError("spectral cache: bad header");
  const auto n = static_cast<Eigen::Index>(nd);
  SpectralData sd;
  sd.source.window.lower = get_f64(in);
  sd.source.window.upper = get_f64(in);
  sd.source.nodes.resize(n);
  sd.source.weights.resize(n);
  sd.eigenvalues.resize(n);
  sd.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) sd.source.nodes(i) = get_f64(in);
  for (Eigen::Index i = 0; i < n; ++i) sd.source.weights(i) = get_f64(in);
  for (Eigen::Index i = 0; i < n; ++i) sd.eigenvalues(i) = get_f64(in);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sd.eigenvectors(i, j) = get_f64(in);
  }
  sd.source.lattice = sd.source.weights.isOnes(0.0);
  sd.source.matrix = sd.eigenvectors * sd.eigenvalues.asDiagonal() * sd.eigenvectors.transpose();
  return sd;
}

void write_configurations(std::ostream& out, std::span<const Configuration> samples) {
  out << "seed,count,points\n";
  char buf[32];
  for (const auto& c : samples) {
    out << c.seed << ',' << c.points.size() << ',';
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", c.points[k]);
      out << (k ? ";" : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace dpprig
