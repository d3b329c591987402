#ifndef DPPRIG_KERNELS_HPP
#define DPPRIG_KERNELS_HPP

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <functional>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dpprig {

/// Closed interval [lower, upper]; infinite endpoints allowed.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] double width() const { return upper - lower; }
  [[nodiscard]] bool contains(double x) const { return x >= lower && x <= upper; }
};

enum class PhaseKind { continuous, integer_lattice, half_integer_lattice };

/// Phase space of a kernel: an open interval of the line with Lebesgue
/// measure, or a lattice (Z or 1/2 + Z) with counting measure, possibly
/// restricted to [bounds.lower, bounds.upper].
struct PhaseSpace {
  PhaseKind kind = PhaseKind::continuous;
  Interval bounds{-HUGE_VAL, HUGE_VAL};

  [[nodiscard]] bool is_lattice() const { return kind != PhaseKind::continuous; }
  [[nodiscard]] bool contains(double x) const;
  /// Lattice points of this phase space inside `window` (ascending).
  [[nodiscard]] std::vector<double> lattice_points(Interval window) const;
};

enum class KernelFamily { sine, bessel, airy, gamma, custom };

enum class GammaSeries { none, principal, complementary };

/// A(x), B(x) of the integrable form and their derivatives.
struct IntegrableValues {
  double a = 0.0;
  double b = 0.0;
  double da = 0.0;
  double db = 0.0;
};

/// Parameters of the shipped families. Fields not used by a family are ignored.
struct KernelParams {
  double s = 0.0;                    // Bessel order, > -1
  std::complex<double> z{0.0, 0.0};  // Gamma kernel z
  std::complex<double> zp{0.0, 0.0};  // Gamma kernel z'
  double c = 1.0;                    // custom linear kernel: A(x) = c x, B(x) = 1
};

/// An integrable projection kernel
///   Pi(x, y) = prefactor * (A(x) B(y) - B(x) A(y)) / (x - y).
/// Immutable after construction; safe to share between threads.
struct KernelSpec {
  KernelFamily family = KernelFamily::custom;
  KernelParams params;
  GammaSeries series = GammaSeries::none;
  PhaseSpace phase_space;
  double prefactor = 1.0;
  std::function<IntegrableValues(double)> representation;
  /// Beyond this point the kernel is below double precision (Airy: upper tail).
  double negligible_above = HUGE_VAL;
  /// Default experiment window carried through JSON configs.
  std::optional<Interval> window;

  [[nodiscard]] std::string name() const;
  [[nodiscard]] bool is_lattice() const { return phase_space.is_lattice(); }
  /// Local oscillation length of the kernel near x (one period of the
  /// sine-kernel approximation 2 / density). Used to size quadrature panels.
  [[nodiscard]] double oscillation_length(double x) const;
  /// Half-width of the band |x - y| < delta(x) evaluated by the near-diagonal rule.
  [[nodiscard]] double near_diagonal_threshold(double x) const;
};

KernelSpec sine_kernel();
KernelSpec bessel_kernel(double s);
KernelSpec airy_kernel();
/// Gamma kernel on 1/2 + Z. Requires the principal series (zp = conj z,
/// z not real) or the complementary series (z, zp real, distinct, in a
/// common open interval (m, m+1)); anything else raises ParameterError.
KernelSpec gamma_kernel(std::complex<double> z, std::complex<double> zp);
/// Pi(x, y) = c everywhere: A(x) = c x, B(x) = 1.
KernelSpec linear_kernel(double c, PhaseSpace phase);
/// Arbitrary integrable kernel from user-supplied handles.
KernelSpec custom_kernel(std::function<IntegrableValues(double)> representation, double prefactor,
                         PhaseSpace phase);

/// Builds one of the shipped families. Parameters are validated as above.
KernelSpec build_kernel(KernelFamily family, const KernelParams& params);

enum class KernelRegime { generic, near_diagonal, diagonal };

struct KernelValue {
  double value = 0.0;
  KernelRegime regime = KernelRegime::generic;
};

/// Pi(x, y). Points closer than near_diagonal_threshold use the first-order
/// Taylor expansion about the midpoint, which is the diagonal formula there.
KernelValue evaluate(const KernelSpec& spec, double x, double y);

/// Pi(x, x) = prefactor * (A'(x) B(x) - A(x) B'(x)). Raises ConsistencyError
/// when the result is below -1e-10.
KernelValue evaluate_diagonal(const KernelSpec& spec, double x);

/// Diagonal as the symmetric h -> 0 limit of the off-diagonal formula with
/// one Richardson step. Independent of A', B'; for lattice kernels the
/// representation is continued off the lattice.
double diagonal_limit(const KernelSpec& spec, double x, double h = 1e-5);

/// Gamma kernel straight from the Gamma-function formula in complex
/// arithmetic, without the real reformulation used by `evaluate`.
std::complex<double> gamma_kernel_complex(const KernelSpec& spec, double x, double y);

/// Kernel representation cached at a fixed set of points; pairs are then
/// evaluated without further special-function calls.
class KernelSamples {
 public:
  KernelSamples(const KernelSpec& spec, std::span<const double> points);

  [[nodiscard]] Eigen::Index size() const { return x_.size(); }
  [[nodiscard]] const Eigen::VectorXd& points() const { return x_; }
  [[nodiscard]] const Eigen::VectorXd& a() const { return a_; }
  [[nodiscard]] const Eigen::VectorXd& b() const { return b_; }
  [[nodiscard]] const Eigen::VectorXd& diagonal() const { return diag_; }
  [[nodiscard]] const Eigen::VectorXd& delta() const { return delta_; }
  [[nodiscard]] double prefactor() const { return prefactor_; }

  /// Pi(x_i, x_j); inside the near-diagonal band the mean of the two
  /// diagonal values (same O(|x - y|^2) accuracy as the midpoint rule).
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const {
    if (i == j) return diag_(i);
    const double d = x_(i) - x_(j);
    if (std::abs(d) < delta_(i)) return 0.5 * (diag_(i) + diag_(j));
    return prefactor_ * (a_(i) * b_(j) - b_(i) * a_(j)) / d;
  }

  /// |Pi(x_i, x_j)| * |x_i - x_j|, free of the division.
  [[nodiscard]] double numerator(Eigen::Index i, Eigen::Index j) const {
    return std::abs(prefactor_ * (a_(i) * b_(j) - b_(i) * a_(j)));
  }

 private:
  Eigen::VectorXd x_, a_, b_, diag_, delta_;
  double prefactor_ = 1.0;
};

/// Pi(s.points()(i), t.points()(j)) for points cached in two different sample sets.
inline double kernel_between(const KernelSamples& s, Eigen::Index i, const KernelSamples& t, Eigen::Index j) {
  const double d = s.points()(i) - t.points()(j);
  if (d == 0.0 || std::abs(d) < s.delta()(i)) return 0.5 * (s.diagonal()(i) + t.diagonal()(j));
  return s.prefactor() * (s.a()(i) * t.b()(j) - s.b()(i) * t.a()(j)) / d;
}

/// JSON object {family, s?, z_re?, z_im?, zp_re?, zp_im?, c?, lattice?, window?}.
KernelSpec kernel_from_json(const nlohmann::json& j);
nlohmann::json kernel_to_json(const KernelSpec& spec);

std::string to_string(KernelFamily family);
KernelFamily family_from_string(const std::string& name);
std::string to_string(KernelRegime regime);

}  // namespace dpprig

#endif  // DPPRIG_KERNELS_HPP
