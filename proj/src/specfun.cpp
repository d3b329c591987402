#include "dpprig/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpprig/errors.hpp"

namespace dpprig {
namespace {

using cplx = std::complex<double>;

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kLogPi = 1.14472988584940017414;

// Ai(0) and -Ai'(0).
constexpr double kAiryC1 = 0.355028053887817239260;
constexpr double kAiryC2 = 0.258819403792806798405;

constexpr double kAirySeriesUpper = 5.0;
constexpr double kAirySeriesLower = -7.0;
constexpr double kAiryUnderflow = 104.0;
constexpr double kAiryOscillationLimit = -1e5;

constexpr double kBesselSeriesUpper = 12.0;

// B_{2k} for k = 1..10.
constexpr std::array<double, 10> kBernoulli = {
    1.0 / 6.0,         -1.0 / 30.0,     1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0,        -691.0 / 2730.0, 7.0 / 6.0,  -3617.0 / 510.0,
    43867.0 / 798.0,   -174611.0 / 330.0};

// Below this modulus the Stirling and digamma series are not used directly.
constexpr double kAsymptoticModulus = 10.0;

AiryValues airy_series(double x) {
  const double x3 = x * x * x;
  double tf = 1.0, tg = x, tfp = 0.5 * x * x, tgp = 1.0;
  double f = tf, g = tg, fp = tfp, gp = tgp;
  double af = 1.0, ag = std::abs(x), afp = std::abs(tfp), agp = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double k3 = 3.0 * k;
    tf *= x3 / ((k3 - 1.0) * k3);
    tg *= x3 / (k3 * (k3 + 1.0));
    tgp *= x3 / (k3 * (k3 - 2.0));
    f += tf;
    g += tg;
    gp += tgp;
    af += std::abs(tf);
    ag += std::abs(tg);
    agp += std::abs(tgp);
    if (k >= 2) {
      tfp *= x3 / ((k3 - 1.0) * (k3 - 3.0));
      fp += tfp;
      afp += std::abs(tfp);
    }
    const double last = std::max({std::abs(tf), std::abs(tg), std::abs(tfp), std::abs(tgp)});
    if (k > 2 && last < 1e-18 * std::max(1.0, std::min(af, ag))) break;
  }
  AiryValues out;
  out.ai.value = kAiryC1 * f - kAiryC2 * g;
  out.ai_prime.value = kAiryC1 * fp - kAiryC2 * gp;
  out.ai.abs_error_bound = 4.0 * kEps * (kAiryC1 * af + kAiryC2 * ag) + 1e-18;
  out.ai_prime.abs_error_bound = 4.0 * kEps * (kAiryC1 * afp + kAiryC2 * agp) + 1e-18;
  return out;
}

// Terms u_k / zeta^k and v_k / zeta^k of the Airy asymptotic expansions,
// truncated at the smallest term.
struct AiryAsymptoticTerms {
  std::array<double, 64> u{};
  std::array<double, 64> v{};
  int count = 0;
  double tail = 0.0;  // magnitude of the first neglected term
};

AiryAsymptoticTerms airy_asymptotic_terms(double zeta) {
  AiryAsymptoticTerms t;
  double uk = 1.0;
  t.u[0] = 1.0;
  t.v[0] = 1.0;
  t.count = 1;
  double prev = 1.0;
  for (int k = 1; k < 64; ++k) {
    const double kk = k;
    uk *= (6.0 * kk - 5.0) * (6.0 * kk - 3.0) * (6.0 * kk - 1.0) / ((2.0 * kk - 1.0) * 216.0 * kk) / zeta;
    const double vk = -(6.0 * kk + 1.0) / (6.0 * kk - 1.0) * uk;
    const double mag = std::max(std::abs(uk), std::abs(vk));
    if (mag > prev) {
      t.tail = prev;
      return t;
    }
    t.u[k] = uk;
    t.v[k] = vk;
    t.count = k + 1;
    prev = mag;
    if (mag < 1e-17) {
      t.tail = mag;
      return t;
    }
  }
  t.tail = prev;
  return t;
}

AiryValues airy_decaying(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const auto t = airy_asymptotic_terms(zeta);
  double su = 0.0, sv = 0.0;
  for (int k = t.count - 1; k >= 0; --k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    su += sign * t.u[k];
    sv += sign * t.v[k];
  }
  const double quarter = std::pow(x, 0.25);
  const double decay = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
  AiryValues out;
  out.ai.value = decay / quarter * su;
  out.ai_prime.value = -decay * quarter * sv;
  out.ai.abs_error_bound = decay / quarter * (t.tail + 8.0 * kEps);
  out.ai_prime.abs_error_bound = decay * quarter * (t.tail + 8.0 * kEps);
  return out;
}

AiryValues airy_oscillatory(double x) {
  const double z = -x;
  const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
  const auto t = airy_asymptotic_terms(zeta);
  double p = 0.0, q = 0.0, pv = 0.0, qv = 0.0;
  for (int k = t.count - 1; k >= 0; --k) {
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * t.u[k];
      pv += sign * t.v[k];
    } else {
      q += sign * t.u[k];
      qv += sign * t.v[k];
    }
  }
  const double s = std::sin(zeta);
  const double c = std::cos(zeta);
  const double sin_shift = (s + c) / std::numbers::sqrt2;
  const double cos_shift = (c - s) / std::numbers::sqrt2;
  const double quarter = std::pow(z, 0.25);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  // rounding of zeta itself perturbs the phase by about zeta * eps
  const double phase_err = 2.0 * zeta * kEps;
  AiryValues out;
  out.ai.value = inv_sqrt_pi / quarter * (p * sin_shift - q * cos_shift);
  out.ai_prime.value = -inv_sqrt_pi * quarter * (pv * cos_shift + qv * sin_shift);
  out.ai.abs_error_bound = inv_sqrt_pi / quarter * (2.0 * t.tail + 8.0 * kEps + phase_err);
  out.ai_prime.abs_error_bound = inv_sqrt_pi * quarter * (2.0 * t.tail + 8.0 * kEps + phase_err);
  return out;
}

SpecialValue<double> bessel_series(double order, double x) {
  const double lead = std::exp(order * std::log(0.5 * x) - log_gamma_real(order + 1.0).log_abs);
  const double q = -0.25 * x * x;
  double term = lead, sum = lead, abs_sum = std::abs(lead);
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (order + k));
    sum += term;
    abs_sum += std::abs(term);
    if (std::abs(term) < 1e-18 * abs_sum) break;
  }
  return {sum, 4.0 * kEps * abs_sum + 1e-300};
}

SpecialValue<double> bessel_hankel(double order, double x) {
  const double mu = 4.0 * order * order;
  double p = 1.0, q = 0.0;
  double term = 1.0, tail = 0.0, abs_sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (k * 8.0 * x);
    if (next == 0.0) {
      tail = 0.0;
      break;
    }
    if (odd * odd > mu && std::abs(next) > std::abs(term)) {
      tail = std::abs(term);
      break;
    }
    term = next;
    const double sign = (((k - (k % 2)) / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q += sign * term;
    }
    abs_sum += std::abs(term);
    tail = std::abs(term);
    if (std::abs(term) < 1e-17) break;
  }
  const double phase = (0.5 * order + 0.25) * kPi;
  const double cx = std::cos(x), sx = std::sin(x);
  const double cp = std::cos(phase), sp = std::sin(phase);
  const double cos_chi = cx * cp + sx * sp;
  const double sin_chi = sx * cp - cx * sp;
  const double amp = std::sqrt(2.0 / (kPi * x));
  return {amp * (p * cos_chi - q * sin_chi), amp * (tail + 4.0 * kEps * (abs_sum + x))};
}

// sin(pi * w) with exact reduction of the argument modulo 2.
double sin_pi(double w) {
  const double r = w - 2.0 * std::floor(0.5 * w);
  return std::sin(kPi * r);
}

bool is_nonpositive_integer(double w) { return w <= 0.0 && w == std::floor(w); }

cplx stirling(cplx w, double& err) {
  const cplx inv = 1.0 / w;
  const cplx inv2 = inv * inv;
  cplx series = 0.0;
  cplx power = inv;
  double last = 0.0;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    const double kk = static_cast<double>(k);
    const cplx term = kBernoulli[k - 1] / (2.0 * kk * (2.0 * kk - 1.0)) * power;
    series += term;
    last = std::abs(term);
    power *= inv2;
  }
  const cplx lw = std::log(w);
  const cplx main = (w - 0.5) * lw - w + kHalfLog2Pi;
  err = last + 4.0 * kEps * (std::abs((w - 0.5) * lw) + std::abs(w) + 1.0);
  return main + series;
}

cplx digamma_asymptotic(cplx w) {
  const cplx inv = 1.0 / w;
  const cplx inv2 = inv * inv;
  cplx series = 0.0;
  cplx power = inv2;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    series += kBernoulli[k - 1] / (2.0 * static_cast<double>(k)) * power;
    power *= inv2;
  }
  return std::log(w) - 0.5 * inv - series;
}

// cot(pi w), stable for large |Im w|.
cplx cot_pi(cplx w) {
  if (w.imag() < 0.0) return std::conj(cot_pi(std::conj(w)));
  const cplx e = std::exp(cplx(0.0, 2.0 * kPi) * w);
  return cplx(0.0, 1.0) * (e + 1.0) / (e - 1.0);
}

}  // namespace

AiryValues airy(double x) {
  if (!std::isfinite(x)) throw RangeError("airy: non-finite argument");
  if (x > kAiryUnderflow) throw RangeError("airy: Ai(x) underflows for x = " + std::to_string(x));
  if (x < kAiryOscillationLimit) throw RangeError("airy: oscillation phase unresolved for x = " + std::to_string(x));
  if (x > kAirySeriesUpper) return airy_decaying(x);
  if (x < kAirySeriesLower) return airy_oscillatory(x);
  return airy_series(x);
}

SpecialValue<double> bessel_j(double order, double x) {
  if (!(order > -1.0)) throw ParameterError("bessel_j: order must exceed -1, got " + std::to_string(order));
  if (order > kMaxBesselOrder) throw ParameterError("bessel_j: order above supported maximum");
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("bessel_j: argument must be finite and >= 0");
  if (x == 0.0) {
    if (order == 0.0) return {1.0, 0.0};
    if (order > 0.0) return {0.0, 0.0};
    throw RangeError("bessel_j: J_order(0) is infinite for negative order");
  }
  if (x < kBesselSeriesUpper) return bessel_series(order, x);
  return bessel_hankel(order, x);
}

SignedLogGamma log_gamma_real(double w) {
  if (std::isnan(w)) throw DomainError("log_gamma: NaN argument");
  if (is_nonpositive_integer(w)) throw PoleError("log_gamma: pole at " + std::to_string(w));
  if (w < 0.5) {
    const double s = sin_pi(w);
    const auto reflected = log_gamma_real(1.0 - w);
    return {kLogPi - std::log(std::abs(s)) - reflected.log_abs, s > 0.0 ? 1 : -1};
  }
  if (w < kAsymptoticModulus) {
    const double shift = std::ceil(kAsymptoticModulus - w);
    double log_prod = 0.0;
    for (int k = 0; k < static_cast<int>(shift); ++k) log_prod += std::log(w + k);
    return {log_gamma_real(w + shift).log_abs - log_prod, 1};
  }
  double err = 0.0;
  return {stirling(cplx(w, 0.0), err).real(), 1};
}

SpecialValue<cplx> log_gamma(cplx w) {
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) throw DomainError("log_gamma: non-finite argument");
  if (w.imag() == 0.0) {
    const double x = w.real();
    const auto r = log_gamma_real(x);
    const double im = x < 0.0 ? -kPi * std::ceil(-x) : 0.0;
    return {cplx(r.log_abs, im), 8.0 * kEps * (std::abs(r.log_abs) + 1.0)};
  }
  if (w.real() < 0.5) {
    if (w.imag() < 0.0) {
      const auto r = log_gamma(std::conj(w));
      return {std::conj(r.value), r.abs_error_bound};
    }
    // log sin(pi w) on the upper half-plane, continuous branch
    const cplx e = std::exp(cplx(0.0, 2.0 * kPi) * w);
    const cplx log_sin = cplx(-std::numbers::ln2, 0.5 * kPi) - cplx(0.0, kPi) * w + std::log(1.0 - e);
    const auto reflected = log_gamma(1.0 - w);
    return {kLogPi - log_sin - reflected.value,
            reflected.abs_error_bound + 4.0 * kEps * (std::abs(log_sin) + kLogPi)};
  }
  if (std::abs(w) < kAsymptoticModulus) {
    const double shift = std::ceil(kAsymptoticModulus - w.real());
    cplx log_prod = 0.0;
    for (int k = 0; k < static_cast<int>(shift); ++k) log_prod += std::log(w + static_cast<double>(k));
    const auto shifted = log_gamma(w + shift);
    return {shifted.value - log_prod, shifted.abs_error_bound + 4.0 * kEps * shift * (std::abs(log_prod) + 1.0)};
  }
  double err = 0.0;
  const cplx v = stirling(w, err);
  return {v, err};
}

double digamma(double w) {
  if (is_nonpositive_integer(w)) throw PoleError("digamma: pole at " + std::to_string(w));
  if (w < 0.5) {
    const double r = w - std::round(w);
    return digamma(1.0 - w) - kPi * std::cos(kPi * r) / std::sin(kPi * r);
  }
  double acc = 0.0;
  while (w < kAsymptoticModulus) {
    acc -= 1.0 / w;
    w += 1.0;
  }
  return acc + digamma_asymptotic(cplx(w, 0.0)).real();
}

cplx digamma(cplx w) {
  if (w.imag() == 0.0) return digamma(w.real());
  if (w.real() < 0.5) return digamma(1.0 - w) - kPi * cot_pi(w);
  cplx acc = 0.0;
  while (std::abs(w) < kAsymptoticModulus) {
    acc -= 1.0 / w;
    w += 1.0;
  }
  return acc + digamma_asymptotic(w);
}

}  // namespace dpprig
