#ifndef DPPRIG_SPECFUN_HPP
#define DPPRIG_SPECFUN_HPP

#include <complex>

namespace dpprig {

/// A special-function value together with an a-posteriori bound on its
/// absolute error (rounding in the summation plus the first neglected term).
template <typename Scalar>
struct SpecialValue {
  Scalar value{};
  double abs_error_bound = 0.0;
};

struct AiryValues {
  SpecialValue<double> ai;
  SpecialValue<double> ai_prime;
};

/// Ai(x) and Ai'(x).
///
/// Maclaurin series on [-7, 5], the oscillatory asymptotic expansion below
/// -7 and the exponentially decaying one above 5. Throws RangeError when
/// x > 104 (Ai underflows) or x < -1e5 (phase of the oscillation no longer
/// resolved in double precision).
AiryValues airy(double x);

/// Largest Bessel order accepted by bessel_j.
inline constexpr double kMaxBesselOrder = 6.0;

/// J_order(x) for -1 < order <= kMaxBesselOrder and x >= 0.
///
/// Ascending series below x = 12, Hankel's large-argument expansion above.
/// J_order(0) is singular for negative order and raises RangeError.
SpecialValue<double> bessel_j(double order, double x);

/// Principal branch of log Gamma(w): analytic on the plane slit along the
/// negative real axis and real on the positive axis. On the negative real
/// axis the imaginary part is -pi * ceil(-w).
SpecialValue<std::complex<double>> log_gamma(std::complex<double> w);

/// log|Gamma(w)| and the sign of Gamma(w) for real w.
struct SignedLogGamma {
  double log_abs = 0.0;
  int sign = 1;
};
SignedLogGamma log_gamma_real(double w);

/// Digamma psi = Gamma'/Gamma.
double digamma(double w);
std::complex<double> digamma(std::complex<double> w);

}  // namespace dpprig

#endif  // DPPRIG_SPECFUN_HPP
