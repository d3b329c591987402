#ifndef DPPRIG_SPECTRAL_HPP
#define DPPRIG_SPECTRAL_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dpprig/kernels.hpp"

namespace dpprig {

/// Nystrom discretization of Pi restricted to a window:
/// matrix(i, j) = sqrt(w_i w_j) Pi(x_i, x_j).
struct DiscretizedOperator {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  Eigen::MatrixXd matrix;
  Interval window;
  bool lattice = false;
};

/// Continuous windows: n Gauss-Legendre nodes on uniform panels of about 20
/// nodes each. Lattice windows: every lattice point of the window, unit
/// weights (n is ignored).
DiscretizedOperator discretize(const KernelSpec& spec, Interval window, int n);

/// Operator from an explicit symmetric matrix on sites 0, 1, ..., size - 1.
DiscretizedOperator finite_operator(const Eigen::MatrixXd& matrix);

struct SpectralData {
  Eigen::VectorXd eigenvalues;   // ascending, clipped to [0, 1]
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
  double clip_amount = 0.0;      // largest distance of a raw eigenvalue from [0, 1]
  DiscretizedOperator source;
};

/// Full symmetric eigendecomposition. A clip above 1e-6 raises DiscretizationError.
SpectralData eigendecompose(const DiscretizedOperator& op);

/// One sample of the finite DPP: sorted points of the window.
struct Configuration {
  std::vector<double> points;
  Interval window;
  std::uint64_t seed = 0;

  /// Number of points in the closed interval `set`.
  [[nodiscard]] std::size_t count(Interval set) const;
};

/// Spectral sampler: eigenvector i is kept with probability lambda_i, then
/// points are drawn one at a time from the projection onto the kept span.
Configuration sample(const SpectralData& sd, std::uint64_t seed);

/// Seed of sample `index` under master seed `master` (SplitMix64 of a counter).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// count samples with seeds derive_seed(master, 0 .. count-1); the result does
/// not depend on the worker count.
std::vector<Configuration> sample_many(const SpectralData& sd, std::uint64_t master, std::size_t count);

/// Exact sampler for an integrable kernel restricted to lattice sites.
///
/// Sites are visited in increasing order and kept with their conditional
/// probability given the decisions so far. Conditioning keeps the
/// off-diagonal part in the form (g_i . h_j) / (x_i - x_j), so only two
/// generators and the diagonal are updated: O(n^2) per sample instead of
/// O(n k^2) for the spectral sampler, with the same law.
class LatticeSampler {
 public:
  LatticeSampler(const KernelSpec& spec, Interval window);

  [[nodiscard]] Configuration sample(std::uint64_t seed) const;
  /// Seeds derive_seed(master, 0 .. count-1), as in sample_many.
  [[nodiscard]] std::vector<Configuration> sample_many(std::uint64_t master, std::size_t count) const;
  [[nodiscard]] const KernelSamples& sites() const { return sites_; }
  [[nodiscard]] Interval window() const { return window_; }

 private:
  KernelSamples sites_;
  Interval window_;
};

/// det(1 + (g - 1) Pi) on the discretized window, as the product of
/// 1 + eigenvalues of K^(1/2) diag(g(x_i) - 1) K^(1/2).
double fredholm_det(const SpectralData& sd, const std::function<double(double)>& g);

/// E prod_j z_j^{#B_j} = fredholm_det with g = z_j on B_j and 1 elsewhere.
/// Overlapping sets raise ConfigError.
double generating_function(const SpectralData& sd, std::span<const Interval> sets, std::span<const double> z);

/// Exact law of the finite DPP on <= 12 sites: entry `mask` is the
/// probability of the subset {i : bit i of mask set}.
std::vector<double> brute_force_law(const DiscretizedOperator& op);

/// Spectral cache: little-endian float64 [n, window.lower, window.upper],
/// nodes, weights, eigenvalues, eigenvectors (row-major).
void write_spectral_cache(const std::string& path, const SpectralData& sd);
SpectralData read_spectral_cache(const std::string& path);

/// One row per sample: seed,count,p1;p2;...
void write_configurations(std::ostream& out, std::span<const Configuration> samples);

}  // namespace dpprig

#endif  // DPPRIG_SPECTRAL_HPP
