#ifndef DPPRIG_QUADRATURE_HPP
#define DPPRIG_QUADRATURE_HPP

#include <Eigen/Core>
#include <span>
#include <vector>

namespace dpprig {

/// Nodes and weights of a quadrature rule.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// Composite Gauss-Legendre rule: `order` nodes on each panel
/// [breakpoints[k], breakpoints[k+1]]. Breakpoints must be increasing.
QuadratureRule composite_gauss_legendre(std::span<const double> breakpoints, int order);

/// Splits [lower, upper] into `panels` equal panels and returns the breakpoints.
std::vector<double> uniform_breakpoints(double lower, double upper, int panels);

}  // namespace dpprig

#endif  // DPPRIG_QUADRATURE_HPP
