#ifndef DPPRIG_VARIANCE_HPP
#define DPPRIG_VARIANCE_HPP

#include <Eigen/Core>
#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpprig/errors.hpp"
#include "dpprig/kernels.hpp"
#include "dpprig/rigidity.hpp"

namespace dpprig {

/// Additive statistic S_f = sum over particles of f.
///
/// f equals `outside_value` off `support`, and `core_value` on `core` when a
/// core is given. Only differences of f enter the variance, so f and f - c
/// give the same result.
struct AdditiveStatistic {
  std::function<double(double)> f;
  Interval support;
  double outside_value = 0.0;
  std::optional<Interval> core;
  double core_value = 1.0;
  /// Points where f is not smooth; used as quadrature panel boundaries.
  std::vector<double> breakpoints;
  std::string description;
};

/// Statistic of a taper: support [-T, T] (airy: [-T, +inf)), core |x| <= R
/// (airy: x >= -R), outside value 0.
AdditiveStatistic taper_statistic(const Taper& taper);
/// Indicator of [lower, upper].
AdditiveStatistic indicator_statistic(Interval set);

struct VarianceOptions {
  /// Stop once the error estimate is below accuracy * |value| (or 1e-14).
  double accuracy = 1e-6;
  int order = 12;
  /// Largest node count of the continuous rule; beyond it BudgetError.
  Eigen::Index max_nodes = 80000;
};

/// region_breakdown:
///   [0] both points in the transition zone (taper: R < |x|, |y| < T),
///   [1] transition zone against the outside (|x| < T <= |y|, x outside the core),
///   [2] core against everything outside it (|x| <= R < |y|).
/// Pairs inside the core or both outside contribute nothing.
struct VarianceResult {
  double value = 0.0;
  double quadrature_error = 0.0;
  std::array<double, 3> region_breakdown{};
  /// Largest |x| of the integration window; pairs beyond it enter through the
  /// reproducing identity, except above `negligible_above` (Airy upper tail).
  double truncation_radius = 0.0;
  Eigen::Index nodes = 0;
};

class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::optional<VarianceResult> partial)
      : Error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const std::optional<VarianceResult>& partial() const { return partial_; }

 private:
  std::optional<VarianceResult> partial_;
};

/// Var S_f = 1/2 sum/integral of (f(x) - f(y))^2 Pi(x, y)^2 for a projection kernel.
///
/// Pairs with one point outside the support use Pi(x, x) - integral over the
/// support of Pi(x, y)^2 dy, so the outside region is never truncated. On a
/// lattice the sums are exact; on continuous spaces a tensor Gauss-Legendre
/// rule is refined until two successive rules agree to `accuracy`.
VarianceResult variance_additive(const KernelSpec& spec, const AdditiveStatistic& f, VarianceOptions options = {});

/// Same as variance_additive with the taper statistic; the breakdown is the
/// three-region split documented on VarianceResult.
VarianceResult variance_regions(const KernelSpec& spec, const Taper& taper, VarianceOptions options = {});

/// Variance for a finite projection matrix: 1/2 sum (f_i - f_j)^2 K_ij^2.
double variance_finite(const Eigen::MatrixXd& projection, const Eigen::VectorXd& f);

struct DecayRow {
  double T = 0.0;
  VarianceResult result;
};

struct DecayScan {
  std::string kernel;
  double R = 0.0;
  std::vector<DecayRow> rows;
  /// Least-squares c in value ~ c / log T, and value * log T / c - 1 per row.
  double c_fit = 0.0;
  std::vector<double> residuals;
  /// Rows i with value[i+1] > value[i] beyond the combined error bars.
  std::vector<std::size_t> non_monotone;
};

/// Variances of the taper statistic along T_list (increasing, all > R + 1).
DecayScan decay_scan(const KernelSpec& spec, TaperKind kind, double R, const std::vector<double>& T_list,
                     VarianceOptions options = {});

/// CSV kernel,R,T,variance,region1,region2,region3,quad_error,c_fit.
void write_decay_csv(std::ostream& out, const DecayScan& scan);

}  // namespace dpprig

#endif  // DPPRIG_VARIANCE_HPP
