#include "dpprig/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dpprig/errors.hpp"
#include "dpprig/specfun.hpp"

namespace dpprig {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Relative width of the near-diagonal band, in units of the oscillation length.
constexpr double kNearDiagonalFraction = 1e-5;

// Ai and Ai' are below 1e-17 past this point, so the Airy kernel is zero in
// double precision there.
constexpr double kAiryNegligible = 12.0;

double lattice_offset(PhaseKind kind) { return kind == PhaseKind::half_integer_lattice ? 0.5 : 0.0; }

bool on_lattice(PhaseKind kind, double x) {
  const double shifted = x - lattice_offset(kind);
  return shifted == std::floor(shifted);
}

void require_domain(const KernelSpec& spec, double x) {
  if (!spec.phase_space.contains(x)) {
    std::ostringstream msg;
    msg << spec.name() << ": point " << x << " outside the phase space";
    throw DomainError(msg.str());
  }
}

double generic_value(const KernelSpec& spec, const IntegrableValues& rx, const IntegrableValues& ry, double d) {
  return spec.prefactor * (rx.a * ry.b - rx.b * ry.a) / d;
}

double diagonal_value(const KernelSpec& spec, const IntegrableValues& r) {
  return spec.prefactor * (r.da * r.b - r.a * r.db);
}

void validate_gamma(cplx z, cplx zp, GammaSeries& series) {
  const bool real_pair = z.imag() == 0.0 && zp.imag() == 0.0;
  if (real_pair) {
    const double a = z.real(), b = zp.real();
    const bool integer_endpoint = a == std::floor(a) || b == std::floor(b);
    if (a == b || integer_endpoint || std::floor(a) != std::floor(b)) {
      throw ParameterError("gamma kernel: real z, z' must be distinct and lie in a common interval (m, m+1)");
    }
    series = GammaSeries::complementary;
    return;
  }
  const double tol = 1e-14 * std::max(1.0, std::abs(z));
  if (z.imag() == 0.0 || std::abs(zp - std::conj(z)) > tol) {
    throw ParameterError("gamma kernel: complex parameters require z' = conj(z) with z not real");
  }
  series = GammaSeries::principal;
}

}  // namespace

bool PhaseSpace::contains(double x) const {
  if (!std::isfinite(x)) return false;
  if (kind == PhaseKind::continuous) return x > bounds.lower && x < bounds.upper;
  return on_lattice(kind, x) && x >= bounds.lower && x <= bounds.upper;
}

std::vector<double> PhaseSpace::lattice_points(Interval window) const {
  if (!is_lattice()) throw DomainError("lattice_points: continuous phase space");
  const double lo = std::max(window.lower, bounds.lower);
  const double hi = std::min(window.upper, bounds.upper);
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("lattice_points: unbounded window");
  const double off = lattice_offset(kind);
  std::vector<double> out;
  for (double k = std::ceil(lo - off); k + off <= hi; k += 1.0) out.push_back(k + off);
  return out;
}

std::string KernelSpec::name() const {
  std::ostringstream out;
  out.precision(6);
  switch (family) {
    case KernelFamily::sine: out << "sine"; break;
    case KernelFamily::bessel: out << "bessel(s=" << params.s << ")"; break;
    case KernelFamily::airy: out << "airy"; break;
    case KernelFamily::gamma:
      out << "gamma(z=" << params.z.real();
      if (params.z.imag() != 0.0) out << (params.z.imag() > 0 ? "+" : "") << params.z.imag() << "i";
      out << " z'=" << params.zp.real();
      if (params.zp.imag() != 0.0) out << (params.zp.imag() > 0 ? "+" : "") << params.zp.imag() << "i";
      out << ")";
      break;
    case KernelFamily::custom: out << "custom"; break;
  }
  return out.str();
}

double KernelSpec::oscillation_length(double x) const {
  switch (family) {
    case KernelFamily::sine: return 2.0;
    case KernelFamily::bessel: return std::max(2.0, 4.0 * kPi * std::sqrt(std::max(x, 0.0)));
    case KernelFamily::airy: return x < -1.0 ? 2.0 * kPi / std::sqrt(-x) : 2.0;
    case KernelFamily::gamma: return 1.0;
    case KernelFamily::custom: return is_lattice() ? 1.0 : 2.0;
  }
  return 1.0;
}

double KernelSpec::near_diagonal_threshold(double x) const {
  return is_lattice() ? 0.0 : kNearDiagonalFraction * oscillation_length(x);
}

KernelSpec sine_kernel() {
  KernelSpec spec;
  spec.family = KernelFamily::sine;
  spec.prefactor = 1.0 / kPi;
  spec.representation = [](double x) {
    const double s = std::sin(kPi * x), c = std::cos(kPi * x);
    return IntegrableValues{s, c, kPi * c, -kPi * s};
  };
  return spec;
}

KernelSpec bessel_kernel(double s) {
  if (!(s > -1.0)) throw ParameterError("bessel kernel: order s must exceed -1");
  if (s + 1.0 > kMaxBesselOrder) throw ParameterError("bessel kernel: order s above supported maximum");
  KernelSpec spec;
  spec.family = KernelFamily::bessel;
  spec.params.s = s;
  spec.phase_space.bounds = {0.0, HUGE_VAL};
  spec.prefactor = 0.5;
  spec.representation = [s](double x) {
    const double u = std::sqrt(x);
    const double js = bessel_j(s, u).value;
    const double js1 = bessel_j(s + 1.0, u).value;
    IntegrableValues r;
    r.a = u * js1;
    r.b = js;
    r.da = (u * js - s * js1) / (2.0 * u);
    r.db = (s * js / u - js1) / (2.0 * u);
    return r;
  };
  return spec;
}

KernelSpec airy_kernel() {
  KernelSpec spec;
  spec.family = KernelFamily::airy;
  // A = Ai', B = Ai; the prefactor -1 restores (Ai(x)Ai'(y) - Ai(y)Ai'(x)) / (x - y).
  spec.prefactor = -1.0;
  spec.negligible_above = kAiryNegligible;
  spec.representation = [](double x) {
    const auto v = airy(x);
    return IntegrableValues{v.ai_prime.value, v.ai.value, x * v.ai.value, v.ai_prime.value};
  };
  return spec;
}

KernelSpec gamma_kernel(cplx z, cplx zp) {
  KernelSpec spec;
  spec.family = KernelFamily::gamma;
  validate_gamma(z, zp, spec.series);
  spec.params.z = z;
  spec.params.zp = zp;
  spec.phase_space.kind = PhaseKind::half_integer_lattice;
  if (spec.series == GammaSeries::complementary) {
    const double a = z.real(), b = zp.real();
    spec.prefactor = std::sin(kPi * a) * std::sin(kPi * b) / (kPi * std::sin(kPi * (a - b)));
    spec.representation = [a, b](double x) {
      const auto la = log_gamma_real(x + a + 0.5);
      const auto lb = log_gamma_real(x + b + 0.5);
      if (la.sign != lb.sign) throw DomainError("gamma kernel: continuation separates the Gamma arguments by a pole");
      const double sigma = la.sign;
      const double half = 0.5 * (la.log_abs - lb.log_abs);
      const double d = digamma(x + a + 0.5) - digamma(x + b + 0.5);
      IntegrableValues r;
      r.a = sigma * std::exp(half);
      r.b = sigma * std::exp(-half);
      r.da = 0.5 * d * r.a;
      r.db = -0.5 * d * r.b;
      return r;
    };
  } else {
    const double re = z.real(), im = z.imag();
    const double sin_abs2 = std::pow(std::sin(kPi * re), 2) + std::pow(std::sinh(kPi * im), 2);
    spec.prefactor = 2.0 * sin_abs2 / (kPi * std::sinh(2.0 * kPi * im));
    spec.representation = [z](double x) {
      const cplx w = x + z + 0.5;
      const double theta = log_gamma(w).value.imag();
      const double dtheta = digamma(w).imag();
      const double s = std::sin(theta), c = std::cos(theta);
      return IntegrableValues{s, c, dtheta * c, -dtheta * s};
    };
  }
  return spec;
}

KernelSpec linear_kernel(double c, PhaseSpace phase) {
  KernelSpec spec;
  spec.family = KernelFamily::custom;
  spec.params.c = c;
  spec.phase_space = phase;
  spec.prefactor = 1.0;
  spec.representation = [c](double x) { return IntegrableValues{c * x, 1.0, c, 0.0}; };
  return spec;
}

KernelSpec custom_kernel(std::function<IntegrableValues(double)> representation, double prefactor,
                         PhaseSpace phase) {
  KernelSpec spec;
  spec.family = KernelFamily::custom;
  spec.phase_space = phase;
  spec.prefactor = prefactor;
  spec.representation = std::move(representation);
  return spec;
}

KernelSpec build_kernel(KernelFamily family, const KernelParams& params) {
  switch (family) {
    case KernelFamily::sine: return sine_kernel();
    case KernelFamily::bessel: return bessel_kernel(params.s);
    case KernelFamily::airy: return airy_kernel();
    case KernelFamily::gamma: return gamma_kernel(params.z, params.zp);
    case KernelFamily::custom: return linear_kernel(params.c, PhaseSpace{});
  }
  throw ParameterError("build_kernel: unknown family");
}

KernelValue evaluate(const KernelSpec& spec, double x, double y) {
  require_domain(spec, x);
  require_domain(spec, y);
  if (x == y) return evaluate_diagonal(spec, x);
  const double d = x - y;
  if (!spec.is_lattice()) {
    const double delta = std::min(spec.near_diagonal_threshold(x), spec.near_diagonal_threshold(y));
    if (std::abs(d) < delta) {
      const auto mid = spec.representation(0.5 * (x + y));
      return {diagonal_value(spec, mid), KernelRegime::near_diagonal};
    }
  }
  return {generic_value(spec, spec.representation(x), spec.representation(y), d), KernelRegime::generic};
}

KernelValue evaluate_diagonal(const KernelSpec& spec, double x) {
  require_domain(spec, x);
  const double v = diagonal_value(spec, spec.representation(x));
  if (v < -1e-10) {
    std::ostringstream msg;
    msg << spec.name() << ": negative diagonal value " << v << " at x = " << x;
    throw ConsistencyError(msg.str());
  }
  return {v, KernelRegime::diagonal};
}

double diagonal_limit(const KernelSpec& spec, double x, double h) {
  require_domain(spec, x);
  const auto rx = spec.representation(x);
  const auto sym = [&](double step) {
    const double up = generic_value(spec, rx, spec.representation(x + step), -step);
    const double down = generic_value(spec, rx, spec.representation(x - step), step);
    return 0.5 * (up + down);
  };
  return (4.0 * sym(0.5 * h) - sym(h)) / 3.0;
}

cplx gamma_kernel_complex(const KernelSpec& spec, double x, double y) {
  if (spec.family != KernelFamily::gamma) throw ParameterError("gamma_kernel_complex: not a gamma kernel");
  require_domain(spec, x);
  require_domain(spec, y);
  if (x == y) throw DomainError("gamma_kernel_complex: requires distinct lattice points");
  const cplx z = spec.params.z, zp = spec.params.zp;
  const cplx ax = log_gamma(x + z + 0.5).value, bx = log_gamma(x + zp + 0.5).value;
  const cplx ay = log_gamma(y + z + 0.5).value, by = log_gamma(y + zp + 0.5).value;
  // principal square root of Gamma(a)Gamma(b): halve the log with Im in (-pi, pi]
  const auto half_log_root = [](cplx l) {
    l.imag(l.imag() - 2.0 * kPi * std::round(l.imag() / (2.0 * kPi)));
    return 0.5 * l;
  };
  const cplx norm = half_log_root(ax + bx) + half_log_root(ay + by);
  const cplx t1 = std::exp(ax + by - norm);
  const cplx t2 = std::exp(bx + ay - norm);
  const cplx pref = std::sin(kPi * z) * std::sin(kPi * zp) / (kPi * std::sin(kPi * (z - zp)));
  return pref * (t1 - t2) / (x - y);
}

KernelSamples::KernelSamples(const KernelSpec& spec, std::span<const double> points)
    : x_(static_cast<Eigen::Index>(points.size())),
      a_(x_.size()),
      b_(x_.size()),
      diag_(x_.size()),
      delta_(x_.size()),
      prefactor_(spec.prefactor) {
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    const double x = points[static_cast<std::size_t>(i)];
    require_domain(spec, x);
    const auto r = spec.representation(x);
    x_(i) = x;
    a_(i) = r.a;
    b_(i) = r.b;
    diag_(i) = diagonal_value(spec, r);
    delta_(i) = spec.near_diagonal_threshold(x);
  }
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::sine: return "sine";
    case KernelFamily::bessel: return "bessel";
    case KernelFamily::airy: return "airy";
    case KernelFamily::gamma: return "gamma";
    case KernelFamily::custom: return "custom";
  }
  return "custom";
}

KernelFamily family_from_string(const std::string& name) {
  if (name == "sine") return KernelFamily::sine;
  if (name == "bessel") return KernelFamily::bessel;
  if (name == "airy") return KernelFamily::airy;
  if (name == "gamma") return KernelFamily::gamma;
  if (name == "custom") return KernelFamily::custom;
  throw ConfigError("unknown kernel family '" + name + "'");
}

std::string to_string(KernelRegime regime) {
  switch (regime) {
    case KernelRegime::generic: return "generic";
    case KernelRegime::near_diagonal: return "near-diagonal";
    case KernelRegime::diagonal: return "diagonal";
  }
  return "generic";
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) throw ConfigError("kernel: expected an object with a 'family' key");
  const auto family = family_from_string(j.at("family").get<std::string>());
  KernelSpec spec;
  try {
    switch (family) {
      case KernelFamily::bessel: spec = bessel_kernel(j.value("s", 0.0)); break;
      case KernelFamily::gamma: {
        if (!j.contains("z_re") || !j.contains("zp_re")) throw ConfigError("gamma kernel: z_re and zp_re are required");
        const cplx z(j.at("z_re").get<double>(), j.value("z_im", 0.0));
        const cplx zp(j.at("zp_re").get<double>(), j.value("zp_im", 0.0));
        spec = gamma_kernel(z, zp);
        break;
      }
      case KernelFamily::custom: {
        const auto kind = j.value("custom", std::string("linear"));
        if (kind != "linear") throw ConfigError("custom kernel: only 'linear' is available from JSON");
        PhaseSpace phase;
        const auto lattice = j.value("lattice", std::string());
        if (lattice == "integer") phase.kind = PhaseKind::integer_lattice;
        else if (lattice == "half-integer") phase.kind = PhaseKind::half_integer_lattice;
        else if (!lattice.empty()) throw ConfigError("custom kernel: lattice must be 'integer' or 'half-integer'");
        spec = linear_kernel(j.value("c", 1.0), phase);
        break;
      }
      default: spec = build_kernel(family, KernelParams{}); break;
    }
    if (j.contains("window")) {
      const auto& w = j.at("window");
      if (!w.is_array() || w.size() != 2) throw ConfigError("kernel: window must be [lower, upper]");
      spec.window = Interval{w[0].get<double>(), w[1].get<double>()};
      if (!(spec.window->upper > spec.window->lower)) throw ConfigError("kernel: empty window");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  return spec;
}

nlohmann::json kernel_to_json(const KernelSpec& spec) {
  nlohmann::json j;
  j["family"] = to_string(spec.family);
  switch (spec.family) {
    case KernelFamily::bessel: j["s"] = spec.params.s; break;
    case KernelFamily::gamma:
      j["z_re"] = spec.params.z.real();
      j["z_im"] = spec.params.z.imag();
      j["zp_re"] = spec.params.zp.real();
      j["zp_im"] = spec.params.zp.imag();
      break;
    case KernelFamily::custom:
      j["custom"] = "linear";
      j["c"] = spec.params.c;
      if (spec.phase_space.kind == PhaseKind::integer_lattice) j["lattice"] = "integer";
      if (spec.phase_space.kind == PhaseKind::half_integer_lattice) j["lattice"] = "half-integer";
      break;
    default: break;
  }
  if (spec.window) j["window"] = {spec.window->lower, spec.window->upper};
  return j;
}

}  // namespace dpprig
