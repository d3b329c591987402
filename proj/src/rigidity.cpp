#include "dpprig/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpprig/errors.hpp"
#include "dpprig/parallel.hpp"
#include "dpprig/quadrature.hpp"

namespace dpprig {
namespace {

constexpr double kStabilization = 1.05;
constexpr double kEpsilonSlack = 0.02;

struct Arg {
  double value = -1.0;
  double x = 0.0;
  std::optional<double> y;
};

// Block-wise max with ties resolved by block order, so the result does not
// depend on the worker count.
Arg reduce_max(const std::vector<Arg>& parts) {
  Arg best;
  for (const auto& p : parts) {
    if (p.value > best.value) best = p;
  }
  return best;
}

double level_extent(const BoundGrid& grid, int level) {
  return grid.extent * std::ldexp(1.0, level - grid.levels + 1);
}

int level_density(const BoundGrid& grid, int level) { return grid.points_per_decade << level; }

// R 10^(k/ppd) for k = 0, 1, ... up to `hi`.
std::vector<double> geometric_magnitudes(double lo, double hi, int ppd) {
  std::vector<double> out;
  const auto last = static_cast<long>(std::floor(ppd * std::log10(hi / lo) + 1e-9));
  for (long k = 0; k <= last; ++k) out.push_back(lo * std::pow(10.0, static_cast<double>(k) / ppd));
  return out;
}

double snap_to_lattice(const KernelSpec& spec, double x) {
  const double off = spec.phase_space.kind == PhaseKind::half_integer_lattice ? 0.5 : 0.0;
  return off + std::round(x - off);
}

bool usable(const KernelSpec& spec, double x) {
  return spec.phase_space.contains(x) && x <= spec.negligible_above;
}

// Signed points with magnitudes in [lo, hi]; lattice points are snapped and
// kept at magnitude >= lo.
std::vector<double> signed_grid(const KernelSpec& spec, const std::vector<double>& magnitudes, double lo) {
  std::vector<double> out;
  for (double m : magnitudes) {
    for (double x : {m, -m}) {
      if (spec.is_lattice()) {
        x = snap_to_lattice(spec, x);
        if (std::abs(x) < lo) x += x < 0 ? -1.0 : 1.0;
      }
      if (usable(spec, x)) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BoundVerdict stabilization_verdict(const std::vector<double>& sups) {
  if (sups.size() < 2) return BoundVerdict::bounded;
  const double prev = sups[sups.size() - 2];
  return sups.back() > kStabilization * prev ? BoundVerdict::growing : BoundVerdict::bounded;
}

std::string grid_description(const char* what, const BoundGrid& grid) {
  std::ostringstream out;
  out << what << ": " << grid.levels << " nested levels, " << grid.points_per_decade
      << " points/decade doubling per level, outer radius " << grid.extent << " at the last level";
  return out.str();
}

void validate_grid(const BoundGrid& grid) {
  if (grid.points_per_decade < 1 || grid.levels < 1 || grid.levels > 8) {
    throw ParameterError("bound grid: need points_per_decade >= 1 and 1 <= levels <= 8");
  }
}

// Quadrature (or lattice points) on {|x| <= R} intersected with the phase space.
QuadratureRule core_rule(const KernelSpec& spec, double R) {
  if (spec.is_lattice()) {
    const auto pts = spec.phase_space.lattice_points({-R, R});
    QuadratureRule rule;
    rule.nodes = Eigen::Map<const Eigen::VectorXd>(pts.data(), static_cast<Eigen::Index>(pts.size()));
    rule.weights = Eigen::VectorXd::Ones(rule.nodes.size());
    return rule;
  }
  const double lo = std::max(-R, spec.phase_space.bounds.lower);
  const double hi = std::min({R, spec.phase_space.bounds.upper, spec.negligible_above});
  const double shortest = std::min(spec.oscillation_length(lo), spec.oscillation_length(hi));
  const int panels = std::max(4, static_cast<int>(std::ceil((hi - lo) / (0.25 * shortest))));
  const auto bp = uniform_breakpoints(lo, hi, panels);
  return composite_gauss_legendre(bp, 12);
}

}  // namespace

Taper make_taper(TaperKind kind, double R, double T) {
  if (!(R > 0.0) || !std::isfinite(T)) throw ParameterError("taper: R must be positive and T finite");
  if (!(T > R + 1.0)) throw ParameterError("taper: T must exceed R + 1 so that log(T - R) > 0");
  return Taper{kind, R, T};
}

double taper_eval(const Taper& taper, double x) {
  const double logT = std::log(taper.T - taper.R);
  const auto profile = [&](double u) {
    const double lp = u > 1.0 ? std::log(u) : 0.0;
    return std::clamp(1.0 - lp / logT, 0.0, 1.0);
  };
  if (taper.kind == TaperKind::symmetric) {
    const double m = std::abs(x);
    return m < taper.T ? profile(m - taper.R) : 0.0;
  }
  if (x >= -taper.R) return 1.0;
  if (x <= -taper.T) return 0.0;
  return profile(-x - taper.R);
}

std::string to_string(TaperKind kind) { return kind == TaperKind::symmetric ? "symmetric" : "airy"; }

TaperKind taper_kind_from_string(const std::string& name) {
  if (name == "symmetric") return TaperKind::symmetric;
  if (name == "airy" || name == "airy-one-sided") return TaperKind::airy_one_sided;
  throw ConfigError("unknown taper '" + name + "'");
}

std::string to_string(BoundVerdict verdict) { return verdict == BoundVerdict::bounded ? "bounded" : "growing"; }

BoundCheckReport check_offdiag_bound(const KernelSpec& spec, double R, double alpha, BoundGrid grid) {
  if (!(alpha > 0.0 && alpha < 0.5) || !(R > 0.0)) throw ParameterError("offdiag bound: need 0 < alpha < 1/2, R > 0");
  if (grid.extent <= 0.0) grid.extent = 1e4 * R;
  validate_grid(grid);

  BoundCheckReport report;
  report.check = "offdiag";
  report.alpha = alpha;
  report.R = R;
  report.grid = grid_description("pairs R <= |x|, |y| <= Lambda", grid);

  Arg best;
  for (int level = 0; level < grid.levels; ++level) {
    const auto mags = geometric_magnitudes(R, level_extent(grid, level), level_density(grid, level));
    const auto pts = signed_grid(spec, mags, R);
    const KernelSamples s(spec, pts);
    const auto n = s.size();
    const std::size_t rows_per_block = 64;
    const std::size_t blocks = (static_cast<std::size_t>(n) + rows_per_block - 1) / rows_per_block;
    std::vector<Arg> parts(blocks);
    parallel_blocks(blocks, [&](std::size_t b) {
      Arg local;
      const auto i0 = static_cast<Eigen::Index>(b * rows_per_block);
      const auto i1 = std::min<Eigen::Index>(n, i0 + static_cast<Eigen::Index>(rows_per_block));
      for (Eigen::Index i = i0; i < i1; ++i) {
        const double xi = std::abs(s.points()(i));
        for (Eigen::Index j = i + 1; j < n; ++j) {
          const double r = std::pow(xi / std::abs(s.points()(j)), alpha);
          const double ratio = s.numerator(i, j) / (r + 1.0 / r);
          if (ratio > local.value) local = {ratio, s.points()(i), s.points()(j)};
        }
      }
      parts[b] = local;
    });
    best = reduce_max(parts);
    report.level_sups.push_back(std::max(best.value, 0.0));
  }
  report.estimated_C = report.level_sups.back();
  report.worst_pair = {best.x, best.y};
  report.verdict = stabilization_verdict(report.level_sups);
  return report;
}

BoundCheckReport check_local_l2_bound(const KernelSpec& spec, double R, double epsilon, BoundGrid grid) {
  if (!(epsilon > 0.0) || !(R > 0.0)) throw ParameterError("local L2 bound: need epsilon > 0, R > 0");
  if (grid.extent <= 0.0) grid.extent = 1e5;
  validate_grid(grid);

  BoundCheckReport report;
  report.check = "local_l2";
  report.epsilon = epsilon;
  report.R = R;
  report.grid = grid_description("y on [-R, R] and R <= |y| <= y_max", grid);

  const auto rule = core_rule(spec, R);
  const std::vector<double> xs(rule.nodes.data(), rule.nodes.data() + rule.nodes.size());
  const KernelSamples sx(spec, xs);

  Arg best;
  double excess = -HUGE_VAL;
  for (int level = 0; level < grid.levels; ++level) {
    const int ppd = level_density(grid, level);
    std::vector<double> ys;
    if (spec.is_lattice()) {
      ys = spec.phase_space.lattice_points({-R, R});
    } else {
      const int inner = 2 * ppd;
      for (int k = 0; k <= inner; ++k) {
        const double y = -R + 2.0 * R * k / inner;
        if (usable(spec, y)) ys.push_back(y);
      }
    }
    const std::size_t n_inner = ys.size();
    const auto outer = signed_grid(spec, geometric_magnitudes(R, level_extent(grid, level), ppd), R);
    for (double y : outer) {
      if (std::abs(y) > R) ys.push_back(y);
    }
    const KernelSamples sy(spec, ys);
    const auto ny = static_cast<std::size_t>(sy.size());
    std::vector<double> lhs(ny);
    std::vector<double> argx(ny);
    parallel_blocks(ny, [&](std::size_t j) {
      double sum = 0.0, peak = -1.0;
      for (Eigen::Index i = 0; i < sx.size(); ++i) {
        const double v = kernel_between(sx, i, sy, static_cast<Eigen::Index>(j));
        const double term = rule.weights(i) * v * v;
        sum += term;
        if (term > peak) {
          peak = term;
          argx[j] = sx.points()(i);
        }
      }
      lhs[j] = sum;
    });
    Arg level_best;
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = ys[j];
      const double ratio = lhs[j] * (1.0 + std::pow(std::abs(y), 1.0 + epsilon));
      if (ratio > level_best.value) level_best = {ratio, argx[j], y};
      if (j < n_inner) excess = std::max(excess, lhs[j] - sy.diagonal()(static_cast<Eigen::Index>(j)));
    }
    best = level_best;
    report.level_sups.push_back(std::max(best.value, 0.0));
  }
  report.estimated_C = report.level_sups.back();
  report.worst_pair = {best.x, best.y};
  report.max_row_excess = excess;
  report.verdict = stabilization_verdict(report.level_sups);
  return report;
}

BoundCheckReport check_integrable_growth(const KernelSpec& spec, double R, double C, double epsilon,
                                         BoundGrid grid) {
  if (!(epsilon > 0.0) || !(R > 0.0)) throw ParameterError("growth check: need epsilon > 0, R > 0");
  if (grid.extent <= 0.0) grid.extent = 1e5;
  validate_grid(grid);
  const bool discrete = spec.is_lattice();
  constexpr double kInnerDepth = 1e-6;

  BoundCheckReport report;
  report.check = "integrable_growth";
  report.epsilon = epsilon;
  report.R = R;
  report.grid = grid_description(discrete ? "|x| >= R" : "|x| >= R and 1e-6 R <= |x| < R", grid);

  struct Envelope {
    std::vector<double> x, m;
  };
  Envelope outer, inner;
  Arg best;
  for (int level = 0; level < grid.levels; ++level) {
    const int ppd = level_density(grid, level);
    outer = {};
    inner = {};
    for (double x : signed_grid(spec, geometric_magnitudes(R, level_extent(grid, level), ppd), R)) {
      const auto r = spec.representation(x);
      outer.x.push_back(x);
      outer.m.push_back(std::max(std::abs(r.a), std::abs(r.b)));
    }
    if (!discrete) {
      for (double x : signed_grid(spec, geometric_magnitudes(kInnerDepth * R, R, ppd), 0.0)) {
        if (std::abs(x) >= R) continue;
        const auto r = spec.representation(x);
        inner.x.push_back(x);
        inner.m.push_back(std::max(std::abs(r.a), std::abs(r.b)));
      }
    }
    Arg level_best;
    for (std::size_t k = 0; k < outer.x.size(); ++k) {
      const double ratio = outer.m[k] / std::pow(std::abs(outer.x[k]), 0.5 - epsilon);
      if (ratio > level_best.value) level_best = {ratio, outer.x[k], std::nullopt};
    }
    for (std::size_t k = 0; k < inner.x.size(); ++k) {
      const double ratio = inner.m[k] / std::pow(std::abs(inner.x[k]), -0.5 + epsilon);
      if (ratio > level_best.value) level_best = {ratio, inner.x[k], std::nullopt};
    }
    best = level_best;
    report.level_sups.push_back(std::max(best.value, 0.0));
  }

  // Envelope exponents from per-decade maxima on the finest grid: slope of
  // log max|A|,|B| against log|x| over the outermost / innermost decades.
  const auto decade_slope = [](const Envelope& env, bool outermost) {
    std::vector<std::pair<double, double>> maxima;
    for (std::size_t k = 0; k < env.x.size(); ++k) {
      const double d = std::floor(std::log10(std::abs(env.x[k])));
      const double lm = std::log10(std::max(env.m[k], 1e-300));
      auto it = std::find_if(maxima.begin(), maxima.end(), [&](const auto& p) { return p.first == d; });
      if (it == maxima.end()) maxima.emplace_back(d, lm);
      else it->second = std::max(it->second, lm);
    }
    std::sort(maxima.begin(), maxima.end());
    if (maxima.size() < 3) return 0.0;
    // drop the partial decades at both ends of the grid
    maxima.erase(maxima.begin());
    maxima.pop_back();
    const std::size_t use = std::min<std::size_t>(3, maxima.size());
    const auto first = outermost ? maxima.end() - static_cast<long>(use) : maxima.begin();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto it = first; it != first + static_cast<long>(use); ++it) {
      sx += it->first;
      sy += it->second;
      sxx += it->first * it->first;
      sxy += it->first * it->second;
    }
    const double u = static_cast<double>(use);
    const double den = u * sxx - sx * sx;
    return den > 0.0 ? (u * sxy - sx * sy) / den : 0.0;
  };
  const double p_inf = decade_slope(outer, true);
  double eps_max = 0.5 - p_inf;
  if (!discrete && !inner.x.empty()) eps_max = std::min(eps_max, 0.5 + decade_slope(inner, false));

  report.estimated_C = report.level_sups.back();
  report.worst_pair = {best.x, best.y};
  report.largest_admissible_epsilon = eps_max;
  const bool ok = stabilization_verdict(report.level_sups) == BoundVerdict::bounded &&
                  epsilon <= eps_max + kEpsilonSlack && (C <= 0.0 || report.estimated_C <= C);
  report.verdict = ok ? BoundVerdict::bounded : BoundVerdict::growing;
  return report;
}

double default_alpha(const KernelSpec& spec) {
  if (spec.family == KernelFamily::gamma && spec.series == GammaSeries::complementary) {
    const double gap = std::abs(spec.params.z.real() - spec.params.zp.real());
    return std::min(0.49, std::max(0.3, 0.5 * gap + 0.05));
  }
  return 0.3;
}

double default_l2_epsilon(const KernelSpec& spec) { return spec.family == KernelFamily::gamma ? 0.25 : 0.5; }

double default_growth_epsilon(const KernelSpec&) { return 0.25; }

nlohmann::json to_json(const BoundCheckReport& report) {
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["check"] = report.check;
  j["alpha"] = opt(report.alpha);
  j["epsilon"] = opt(report.epsilon);
  j["R"] = report.R;
  j["estimated_C"] = report.estimated_C;
  j["grid"] = report.grid;
  j["worst_pair"] = {report.worst_pair.first, opt(report.worst_pair.second)};
  j["verdict"] = to_string(report.verdict);
  j["level_sups"] = report.level_sups;
  j["largest_admissible_epsilon"] = opt(report.largest_admissible_epsilon);
  j["max_row_excess"] = opt(report.max_row_excess);
  return j;
}

}  // namespace dpprig
