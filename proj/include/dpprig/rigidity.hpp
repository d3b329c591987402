#ifndef DPPRIG_RIGIDITY_HPP
#define DPPRIG_RIGIDITY_HPP

#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpprig/kernels.hpp"

namespace dpprig {

enum class TaperKind { symmetric, airy_one_sided };

/// Logarithmic taper with cutoffs R < T.
///   symmetric:       1 - log+(|x| - R) / log(T - R) on |x| <= T, 0 beyond
///   airy_one_sided:  1 for x >= -R, the same log profile on (-T, -R), 0 below -T
struct Taper {
  TaperKind kind = TaperKind::symmetric;
  double R = 1.0;
  double T = 100.0;
};

/// Validated constructor; T <= R + 1 raises ParameterError.
Taper make_taper(TaperKind kind, double R, double T);

double taper_eval(const Taper& taper, double x);

std::string to_string(TaperKind kind);
TaperKind taper_kind_from_string(const std::string& name);

enum class BoundVerdict { bounded, growing };

/// Result of a grid-sup check. Fields that do not apply to a check are empty.
struct BoundCheckReport {
  std::string check;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  double R = 0.0;
  double estimated_C = 0.0;
  std::string grid;
  std::pair<double, std::optional<double>> worst_pair{0.0, std::nullopt};
  BoundVerdict verdict = BoundVerdict::bounded;
  /// Sup at each nested grid level; the verdict compares the last two.
  std::vector<double> level_sups;
  /// Growth check only: largest epsilon the fitted envelope exponents allow.
  std::optional<double> largest_admissible_epsilon;
  /// Local L2 check only: max over y in [-R, R] of LHS(y) - Pi(y, y).
  std::optional<double> max_row_excess;
};

/// Grid settings shared by the checks. Level l uses points_per_decade * 2^l
/// and an outer radius extent * 2^(l - levels + 1), so the last level reaches
/// `extent` and every grid contains the previous one.
struct BoundGrid {
  int points_per_decade = 40;
  int levels = 3;
  double extent = 0.0;  // 0: check-specific default
};

/// sup over R <= |x|, |y| <= Lambda of |Pi(x, y)| |x - y| / ((|x|/|y|)^a + (|y|/|x|)^a).
/// Default Lambda = 1e4 R.
BoundCheckReport check_offdiag_bound(const KernelSpec& spec, double R, double alpha, BoundGrid grid = {});

/// sup over y (|y| up to 1e5 by default) of (1 + |y|^(1+eps)) * integral over |x| <= R of Pi(x, y)^2.
BoundCheckReport check_local_l2_bound(const KernelSpec& spec, double R, double epsilon, BoundGrid grid = {});

/// Envelope check |A|, |B| <= C |x|^(1/2-eps) for |x| > R and, on continuous
/// spaces, <= C |x|^(-1/2+eps) for |x| < R. C <= 0 means "any finite C".
BoundCheckReport check_integrable_growth(const KernelSpec& spec, double R, double C, double epsilon,
                                         BoundGrid grid = {});

/// Shipped defaults: alpha = 0.3 (gamma complementary: max(0.3, |z - z'|/2 + 0.05)),
/// epsilon = 0.5 for the L2 check and 0.25 for the growth check (gamma: 0.25 for both).
double default_alpha(const KernelSpec& spec);
double default_l2_epsilon(const KernelSpec& spec);
double default_growth_epsilon(const KernelSpec& spec);

nlohmann::json to_json(const BoundCheckReport& report);
std::string to_string(BoundVerdict verdict);

}  // namespace dpprig

#endif  // DPPRIG_RIGIDITY_HPP
