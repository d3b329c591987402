#include "dpprig/variance.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>

#include "dpprig/parallel.hpp"
#include "dpprig/quadrature.hpp"

namespace dpprig {
namespace {

enum Zone : unsigned char { core_zone, transition_zone };

struct Window {
  double lower = 0.0;
  double upper = 0.0;
};

Window integration_window(const KernelSpec& spec, const AdditiveStatistic& f) {
  Window w;
  w.lower = std::max(f.support.lower, spec.phase_space.bounds.lower);
  w.upper = std::min({f.support.upper, spec.phase_space.bounds.upper, spec.negligible_above});
  if (!std::isfinite(w.lower) || !std::isfinite(w.upper)) {
    throw DomainError("variance: statistic support must be bounded inside the phase space");
  }
  if (!(w.upper > w.lower)) throw DomainError("variance: statistic support misses the phase space");
  return w;
}

// Upper bound for pairs with a point above negligible_above, where f is held
// at its value there: (max |f - f(top)|)^2 * integral of Pi(y, y) above the cut.
double upper_tail_bound(const KernelSpec& spec, const AdditiveStatistic& f, double swing) {
  if (!(f.support.upper > spec.negligible_above)) return 0.0;
  const double lo = spec.negligible_above;
  const std::vector<double> bp{lo, lo + 20.0};
  const auto rule = composite_gauss_legendre(bp, 40);
  double mass = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
    mass += rule.weights(k) * evaluate_diagonal(spec, rule.nodes(k)).value;
  }
  return swing * swing * mass;
}

struct Nodes {
  std::vector<double> x;
  Eigen::VectorXd w;
};

Nodes lattice_nodes(const KernelSpec& spec, const Window& win) {
  Nodes n;
  n.x = spec.phase_space.lattice_points({win.lower, win.upper});
  n.w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n.x.size()));
  return n;
}

// Panel boundaries on the window: statistic breakpoints, then panels no wider
// than kappa times the local oscillation length.
std::vector<double> panel_breakpoints(const KernelSpec& spec, const AdditiveStatistic& f, const Window& win,
                                      double kappa) {
  std::vector<double> cuts{win.lower, win.upper};
  for (double b : f.breakpoints) {
    if (b > win.lower && b < win.upper) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> bp{cuts.front()};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const double shortest =
        std::min({spec.oscillation_length(a), spec.oscillation_length(b), spec.oscillation_length(0.5 * (a + b))});
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) / (kappa * shortest))));
    for (int p = 1; p <= m; ++p) bp.push_back(p == m ? b : a + (b - a) * p / m);
  }
  return bp;
}

Nodes continuous_nodes(std::span<const double> breakpoints, int order) {
  const auto rule = composite_gauss_legendre(breakpoints, order);
  Nodes n;
  n.x.assign(rule.nodes.data(), rule.nodes.data() + rule.nodes.size());
  n.w = rule.weights;
  return n;
}

// Region sums over a fixed node set: [zone-zone, zone-outside, core-rest].
struct Sums {
  std::array<double, 3> region{};
  double magnitude = 0.0;  // sum of |terms|, for the rounding estimate
};

Sums node_sums(const KernelSpec& spec, const AdditiveStatistic& f, const Nodes& nodes) {
  const KernelSamples s(spec, nodes.x);
  const Eigen::Index n = s.size();
  Eigen::VectorXd g(n);
  std::vector<Zone> zone(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = nodes.x[static_cast<std::size_t>(i)];
    const bool in_core = f.core && f.core->contains(x);
    zone[static_cast<std::size_t>(i)] = in_core ? core_zone : transition_zone;
    g(i) = (in_core ? f.core_value : f.f(x)) - f.outside_value;
  }
  const Eigen::VectorXd& w = nodes.w;

  // per row: zone-zone pairs, core-zone pairs, tail against the outside
  std::vector<std::array<double, 4>> rows(static_cast<std::size_t>(n));
  parallel_blocks(static_cast<std::size_t>(n), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    const Zone zi = zone[row];
    double row_mass = 0.0, zz = 0.0, cz = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = s(i, j);
      const double v2 = v * v;
      row_mass += w(j) * v2;
      const Zone zj = zone[static_cast<std::size_t>(j)];
      if (zi == core_zone && zj == core_zone) continue;
      const double d = g(i) - g(j);
      const double term = w(j) * d * d * v2;
      if (zi == transition_zone && zj == transition_zone) zz += term;
      else cz += term;
    }
    const double tail = s.diagonal()(i) - row_mass;
    rows[row] = {0.5 * w(i) * zz, 0.5 * w(i) * cz, w(i) * g(i) * g(i) * tail, static_cast<double>(zi)};
  });

  Sums out;
  for (const auto& r : rows) {
    out.region[0] += r[0];
    out.region[2] += r[1];
    if (r[3] == static_cast<double>(core_zone)) out.region[2] += r[2];
    else out.region[1] += r[2];
    out.magnitude += std::abs(r[0]) + std::abs(r[1]) + std::abs(r[2]);
  }
  return out;
}

VarianceResult to_result(const Sums& sums, double error, double radius, Eigen::Index nodes) {
  VarianceResult r;
  r.value = sums.region[0] + sums.region[1] + sums.region[2];
  r.quadrature_error = error;
  for (int k = 0; k < 3; ++k) r.region_breakdown[static_cast<std::size_t>(k)] = std::max(0.0, sums.region[k]);
  r.truncation_radius = radius;
  r.nodes = nodes;
  return r;
}

}  // namespace

AdditiveStatistic taper_statistic(const Taper& taper) {
  AdditiveStatistic s;
  s.f = [taper](double x) { return taper_eval(taper, x); };
  s.outside_value = 0.0;
  s.core_value = 1.0;
  const double R = taper.R, T = taper.T;
  std::vector<double> cuts{R, R + 1.0, T};
  for (double u = 2.0; u < T - R; u *= 2.0) cuts.push_back(R + u);
  if (taper.kind == TaperKind::symmetric) {
    s.support = {-T, T};
    s.core = Interval{-R, R};
    for (double c : cuts) {
      s.breakpoints.push_back(c);
      s.breakpoints.push_back(-c);
    }
    s.description = "symmetric taper";
  } else {
    s.support = {-T, HUGE_VAL};
    s.core = Interval{-R, HUGE_VAL};
    for (double c : cuts) s.breakpoints.push_back(-c);
    s.description = "airy one-sided taper";
  }
  return s;
}

AdditiveStatistic indicator_statistic(Interval set) {
  AdditiveStatistic s;
  s.f = [set](double x) { return set.contains(x) ? 1.0 : 0.0; };
  s.support = set;
  s.outside_value = 0.0;
  s.breakpoints = {set.lower, set.upper};
  s.description = "indicator";
  return s;
}

VarianceResult variance_additive(const KernelSpec& spec, const AdditiveStatistic& f, VarianceOptions options) {
  if (!f.f) throw ParameterError("variance: statistic has no function");
  const Window win = integration_window(spec, f);
  const double radius = std::max(std::abs(win.lower), std::abs(win.upper));

  if (spec.is_lattice()) {
    const auto nodes = lattice_nodes(spec, win);
    const auto sums = node_sums(spec, f, nodes);
    const double rounding = 4.0 * DBL_EPSILON * static_cast<double>(nodes.x.size()) * sums.magnitude;
    return to_result(sums, rounding, radius, static_cast<Eigen::Index>(nodes.x.size()));
  }

  double swing = std::abs(f.core_value - f.outside_value);
  if (!f.core) {
    for (double x : {win.lower, 0.5 * (win.lower + win.upper), win.upper}) swing = std::max(swing, std::abs(f.f(x)));
  }
  const double truncation = upper_tail_bound(spec, f, swing);

  std::optional<VarianceResult> previous;
  for (double kappa = 2.0;; kappa *= 0.5) {
    const auto bp = panel_breakpoints(spec, f, win, kappa);
    if (static_cast<Eigen::Index>(bp.size() - 1) * options.order > options.max_nodes) {
      throw BudgetError("variance: accuracy not reached within the node budget", previous);
    }
    const auto nodes = continuous_nodes(bp, options.order);
    const auto sums = node_sums(spec, f, nodes);
    const double rounding = 4.0 * DBL_EPSILON * std::sqrt(static_cast<double>(nodes.x.size())) * sums.magnitude;
    auto current = to_result(sums, rounding + truncation, radius, static_cast<Eigen::Index>(nodes.x.size()));
    if (previous) {
      const double change = std::abs(current.value - previous->value);
      current.quadrature_error += change;
      if (change <= options.accuracy * std::abs(current.value) || change <= 1e-14) return current;
    }
    previous = current;
  }
}

VarianceResult variance_regions(const KernelSpec& spec, const Taper& taper, VarianceOptions options) {
  return variance_additive(spec, taper_statistic(taper), options);
}

double variance_finite(const Eigen::MatrixXd& projection, const Eigen::VectorXd& f) {
  if (projection.rows() != projection.cols() || projection.rows() != f.size()) {
    throw ParameterError("variance_finite: dimension mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const double d = f(i) - f(j);
      sum += d * d * projection(i, j) * projection(i, j);
    }
  }
  return 0.5 * sum;
}

DecayScan decay_scan(const KernelSpec& spec, TaperKind kind, double R, const std::vector<double>& T_list,
                     VarianceOptions options) {
  if (T_list.empty()) throw ParameterError("decay_scan: empty T list");
  for (std::size_t k = 0; k < T_list.size(); ++k) {
    if (!(T_list[k] > R + 1.0)) throw ParameterError("decay_scan: every T must exceed R + 1");
    if (k > 0 && !(T_list[k] > T_list[k - 1])) throw ParameterError("decay_scan: T list must be increasing");
  }
  DecayScan scan;
  scan.kernel = spec.name();
  scan.R = R;
  for (double T : T_list) scan.rows.push_back({T, variance_regions(spec, make_taper(kind, R, T), options)});

  double num = 0.0, den = 0.0;
  for (const auto& row : scan.rows) {
    const double l = std::log(row.T);
    num += row.result.value / l;
    den += 1.0 / (l * l);
  }
  scan.c_fit = num / den;
  for (const auto& row : scan.rows) scan.residuals.push_back(row.result.value * std::log(row.T) / scan.c_fit - 1.0);
  for (std::size_t k = 0; k + 1 < scan.rows.size(); ++k) {
    const auto& a = scan.rows[k].result;
    const auto& b = scan.rows[k + 1].result;
    if (b.value > a.value + a.quadrature_error + b.quadrature_error) scan.non_monotone.push_back(k);
  }
  return scan;
}

void write_decay_csv(std::ostream& out, const DecayScan& scan) {
  out << "kernel,R,T,variance,region1,region2,region3,quad_error,c_fit\n";
  char buf[512];
  for (const auto& row : scan.rows) {
    const auto& r = row.result;
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", scan.kernel.c_str(),
                  scan.R, row.T, r.value, r.region_breakdown[0], r.region_breakdown[1], r.region_breakdown[2],
                  r.quadrature_error, scan.c_fit);
    out << buf;
  }
}

}  // namespace dpprig
