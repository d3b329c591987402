#include "dpprig/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "dpprig/errors.hpp"

namespace dpprig {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ParameterError("gauss_legendre: need at least one node");
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2) = 0.0;
  return rule;
}

QuadratureRule composite_gauss_legendre(std::span<const double> breakpoints, int order) {
  if (breakpoints.size() < 2) throw ParameterError("composite_gauss_legendre: need two breakpoints");
  const QuadratureRule base = gauss_legendre(order);
  const auto panels = static_cast<Eigen::Index>(breakpoints.size() - 1);
  QuadratureRule rule{Eigen::VectorXd(panels * order), Eigen::VectorXd(panels * order)};
  for (Eigen::Index p = 0; p < panels; ++p) {
    const double a = breakpoints[p], b = breakpoints[p + 1];
    if (!(b > a)) throw ParameterError("composite_gauss_legendre: breakpoints must increase");
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    rule.nodes.segment(p * order, order) = (mid + half * base.nodes.array()).matrix();
    rule.weights.segment(p * order, order) = half * base.weights;
  }
  return rule;
}

std::vector<double> uniform_breakpoints(double lower, double upper, int panels) {
  std::vector<double> out(panels + 1);
  for (int k = 0; k <= panels; ++k) out[k] = lower + (upper - lower) * k / panels;
  out.back() = upper;
  return out;
}

}  // namespace dpprig
