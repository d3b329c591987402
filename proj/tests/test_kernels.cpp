#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dpprig/errors.hpp"
#include "dpprig/kernels.hpp"
#include "dpprig/quadrature.hpp"
#include "dpprig/specfun.hpp"
#include "oracles.hpp"

using namespace dpprig;
using std::numbers::pi;

namespace {

std::vector<KernelSpec> sample_kernels() {
  return {sine_kernel(), bessel_kernel(0.0), bessel_kernel(1.5), airy_kernel(), gamma_kernel(0.2, 0.7),
          gamma_kernel({0.3, 0.4}, {0.3, -0.4})};
}

double random_point(const KernelSpec& spec, std::mt19937_64& rng) {
  if (spec.is_lattice()) return std::uniform_int_distribution<int>(-60, 60)(rng) + 0.5;
  const double lo = spec.phase_space.bounds.lower > -1e300 ? spec.phase_space.bounds.lower : -30.0;
  return std::uniform_real_distribution<double>(lo, lo + 60.0)(rng);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("bessel value from the closed form") {
    const auto spec = build_kernel(KernelFamily::bessel, {.s = 0.0});
    const double r2 = std::sqrt(2.0);
    const double expected = (1.0 * bessel_j(1, 1).value * bessel_j(0, r2).value -
                             r2 * bessel_j(1, r2).value * bessel_j(0, 1).value) /
                            (2.0 * (1.0 - 2.0));
    const auto v = evaluate(spec, 1.0, 2.0);
    CHECK(v.regime == KernelRegime::generic);
    CHECK(std::abs(v.value - expected) <= 1e-15);
  }

  TEST_CASE("sine kernel closed form") {
    const auto spec = sine_kernel();
    for (double d : {0.1, 0.77, 3.5, 40.25}) {
      CHECK(std::abs(evaluate(spec, 1.3, 1.3 + d).value - std::sin(pi * d) / (pi * d)) <= 1e-13);
    }
    for (double x : {-50.0, 0.0, 3.3, 1e3}) CHECK(std::abs(evaluate_diagonal(spec, x).value - 1.0) <= 1e-14);
  }

  TEST_CASE("airy closed form and diagonal") {
    const auto spec = airy_kernel();
    const auto a = airy(-1.0), b = airy(0.5);
    const double expected =
        (a.ai.value * b.ai_prime.value - b.ai.value * a.ai_prime.value) / (-1.0 - 0.5);
    CHECK(std::abs(evaluate(spec, -1.0, 0.5).value - expected) <= 1e-14);
    const double diag = a.ai_prime.value * a.ai_prime.value + a.ai.value * a.ai.value;
    CHECK(std::abs(evaluate_diagonal(spec, -1.0).value - diag) <= 1e-14);
  }

  TEST_CASE("bessel order -1/2 reduces to the even sine kernel") {
    // In u = sqrt(x) the density is 1/pi + sin(2u)/(2 pi u).
    const auto spec = bessel_kernel(-0.5);
    for (double x : {1e-6, 0.01, 0.3, 2.0, 17.0, 250.0}) {
      const double u = std::sqrt(x);
      const double expected = (1 / pi + std::sin(2 * u) / (2 * pi * u)) / (2 * u);
      CAPTURE(x);
      CHECK(std::abs(evaluate_diagonal(spec, x).value - expected) <= 1e-10 * std::max(1.0, expected));
    }
    // Integrable at the hard edge: the mass of [0, 1] is 1/pi + Si(2)/(2 pi).
    const auto rule = gauss_legendre(40);
    double mass = 0;
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      const double u = 0.5 * (rule.nodes(k) + 1);
      mass += 0.5 * rule.weights(k) * 2 * u * evaluate_diagonal(spec, u * u).value;
    }
    const double si2 = 1.6054129768026948;
    CHECK(std::abs(mass - (1 / pi + si2 / (2 * pi))) <= 1e-10);
  }

  TEST_CASE("symmetry on random pairs") {
    std::mt19937_64 rng(7);
    for (const auto& spec : sample_kernels()) {
      CAPTURE(spec.name());
      for (int k = 0; k < 100; ++k) {
        const double x = random_point(spec, rng), y = random_point(spec, rng);
        CHECK(evaluate(spec, x, y).value == evaluate(spec, y, x).value);
      }
    }
  }

  TEST_CASE("near-diagonal error is linear in h") {
    const auto spec = bessel_kernel(0.0);
    const double diag = evaluate_diagonal(spec, 2.0).value;
    const double C = 0.05;
    for (double h : {1e-3, 1e-4, 1e-5}) {
      CAPTURE(h);
      CHECK(std::abs(evaluate(spec, 2.0, 2.0 + h).value - diag) <= C * h);
    }
  }

  TEST_CASE("diagonal formula matches the limit of the off-diagonal formula") {
    const auto spec = bessel_kernel(0.0);
    const auto off = [&](double h) {
      const auto rx = spec.representation(1.0), ry = spec.representation(1.0 + h);
      return spec.prefactor * (rx.a * ry.b - rx.b * ry.a) / -h;
    };
    CHECK(std::abs(oracle::richardson_limit(off, 1e-2) - evaluate_diagonal(spec, 1.0).value) <= 1e-8);
    for (const auto& k : sample_kernels()) {
      CAPTURE(k.name());
      const double x = k.is_lattice() ? 3.5 : (k.family == KernelFamily::bessel ? 4.0 : -2.0);
      CHECK(std::abs(diagonal_limit(k, x) - evaluate_diagonal(k, x).value) <= 1e-8);
    }
  }

  TEST_CASE("regimes meet continuously at the threshold") {
    for (const auto& spec : {bessel_kernel(0.0), airy_kernel(), sine_kernel()}) {
      const double x = spec.family == KernelFamily::bessel ? 5.0 : -3.0;
      const double delta = spec.near_diagonal_threshold(x);
      const auto inside = evaluate(spec, x, x + 0.999 * delta);
      const auto outside = evaluate(spec, x, x + 1.001 * delta);
      CAPTURE(spec.name());
      CHECK(inside.regime == KernelRegime::near_diagonal);
      CHECK(outside.regime == KernelRegime::generic);
      CHECK(std::abs(inside.value - outside.value) <= 1e-6);
    }
  }

  TEST_CASE("gamma kernel parameter validation") {
    CHECK(build_kernel(KernelFamily::gamma, {.z = {0.3, 0.4}, .zp = {0.3, -0.4}}).series == GammaSeries::principal);
    CHECK(build_kernel(KernelFamily::gamma, {.z = 0.2, .zp = 0.7}).series == GammaSeries::complementary);
    CHECK_THROWS_AS(gamma_kernel(0.2, 1.3), ParameterError);
    CHECK_THROWS_AS(gamma_kernel(0.2, 0.2), ParameterError);
    CHECK_THROWS_AS(gamma_kernel(1.0, 1.5), ParameterError);
    CHECK_THROWS_AS(gamma_kernel({0.3, 0.4}, {0.3, 0.4}), ParameterError);
    CHECK_THROWS_AS(gamma_kernel({0.3, 0.0}, {0.3, 0.0}), ParameterError);
    CHECK(gamma_kernel(-1.8, -1.1).series == GammaSeries::complementary);
  }

  TEST_CASE("principal series: complex formula is real and matches") {
    const auto spec = gamma_kernel({0.3, 0.4}, {0.3, -0.4});
    std::mt19937_64 rng(11);
    for (int k = 0; k < 100; ++k) {
      const double x = random_point(spec, rng);
      double y = random_point(spec, rng);
      if (y == x) y += 1;
      const auto c = gamma_kernel_complex(spec, x, y);
      CAPTURE(x);
      CAPTURE(y);
      CHECK(std::abs(c.imag()) <= 1e-10);
      CHECK(std::abs(c.real() - evaluate(spec, x, y).value) <= 1e-10);
    }
  }

  TEST_CASE("complementary series matches the complex formula") {
    const auto spec = gamma_kernel(0.2, 0.7);
    for (auto [x, y] : {std::pair{0.5, 1.5}, {-3.5, 7.5}, {-40.5, 22.5}, {100.5, -99.5}}) {
      const auto c = gamma_kernel_complex(spec, x, y);
      CHECK(std::abs(c.imag()) <= 1e-10);
      CHECK(std::abs(c.real() - evaluate(spec, x, y).value) <= 1e-10);
    }
  }

  TEST_CASE("gamma kernels reproduce their diagonal") {
    // Projection: the row sum of Pi(x, y)^2 over the lattice is Pi(x, x).
    const auto deficit = [](const KernelSpec& spec, double N) {
      const KernelSamples s(spec, spec.phase_space.lattice_points({-N, N}));
      Eigen::Index ix = 0;
      while (s.points()(ix) != 2.5) ++ix;
      double row = 0;
      for (Eigen::Index j = 0; j < s.size(); ++j) row += s(ix, j) * s(ix, j);
      CHECK(s.diagonal()(ix) > 0.0);
      CHECK(s.diagonal()(ix) < 1.0);
      return s.diagonal()(ix) - row;
    };
    // Complementary series: |A|, |B| grow like |y|^(|z - z'|/2), so the
    // missing tail is c N^-(1 - |z - z'|) = c N^-1/2 and one extrapolation
    // step removes it.
    const auto comp = gamma_kernel(0.2, 0.7);
    const double d1 = deficit(comp, 5000), d4 = deficit(comp, 20000);
    CHECK(d4 > 0.0);
    CHECK(std::abs(2 * d4 - d1) <= 1e-5);
    // Principal series: A, B bounded, tail O(1/N).
    CHECK(std::abs(deficit(gamma_kernel({0.3, 0.4}, {0.3, -0.4}), 20000)) <= 1e-5);
  }

  TEST_CASE("sampled kernel agrees with evaluate") {
    const auto spec = bessel_kernel(0.0);
    const std::vector<double> pts{0.5, 1.0, 1.0 + 1e-7, 3.0, 40.0};
    const KernelSamples s(spec, pts);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      for (Eigen::Index j = 0; j < s.size(); ++j) {
        CHECK(std::abs(s(i, j) - evaluate(spec, pts[i], pts[j]).value) <= 1e-9);
        CHECK(kernel_between(s, i, s, j) == doctest::Approx(s(i, j)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("domain errors") {
    CHECK_THROWS_AS(evaluate(bessel_kernel(0.0), -1.0, 2.0), DomainError);
    CHECK_THROWS_AS(evaluate(gamma_kernel(0.2, 0.7), 1.0, 2.5), DomainError);
    CHECK_THROWS_AS(evaluate_diagonal(gamma_kernel(0.2, 0.7), 0.0), DomainError);
    CHECK_THROWS_AS((void)PhaseSpace{}.lattice_points({0, 1}), DomainError);
    CHECK_THROWS_AS(bessel_kernel(-1.0), ParameterError);
    CHECK_NOTHROW(evaluate(airy_kernel(), -50.0, 3.0));
  }

  TEST_CASE("negative diagonal is reported") {
    const auto bad = custom_kernel([](double x) { return IntegrableValues{x, 1.0, -1.0, 0.0}; }, 1.0, PhaseSpace{});
    CHECK_THROWS_AS(evaluate_diagonal(bad, 0.0), ConsistencyError);
  }

  TEST_CASE("lattice points") {
    PhaseSpace half{PhaseKind::half_integer_lattice, {-HUGE_VAL, HUGE_VAL}};
    CHECK(half.lattice_points({-2.0, 1.0}) == std::vector<double>{-1.5, -0.5, 0.5});
    PhaseSpace integer{PhaseKind::integer_lattice, {0.0, 3.0}};
    CHECK(integer.lattice_points({-5.0, 10.0}) == std::vector<double>{0.0, 1.0, 2.0, 3.0});
    CHECK(half.contains(0.5));
    CHECK_FALSE(half.contains(1.0));
  }

  TEST_CASE("json round trip") {
    for (const auto& spec : sample_kernels()) {
      auto copy = spec;
      copy.window = Interval{-3.0, 4.0};
      const auto j = kernel_to_json(copy);
      const auto back = kernel_from_json(nlohmann::json::parse(j.dump()));
      CAPTURE(j.dump());
      CHECK(kernel_to_json(back) == j);
      CHECK(back.name() == spec.name());
      const double x = spec.is_lattice() ? 1.5 : 2.0, y = spec.is_lattice() ? 4.5 : 3.0;
      CHECK(evaluate(back, x, y).value == evaluate(spec, x, y).value);
    }
    const auto lin = linear_kernel(0.5, {PhaseKind::integer_lattice, {-HUGE_VAL, HUGE_VAL}});
    CHECK(kernel_from_json(kernel_to_json(lin)).phase_space.kind == PhaseKind::integer_lattice);
  }

  TEST_CASE("malformed kernel json") {
    using nlohmann::json;
    CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"s": 0})")), ConfigError);
    CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"family": "hermite"})")), ConfigError);
    CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"family": "gamma", "z_re": 0.2})")), ConfigError);
    CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"family": "bessel", "s": "zero"})")), ConfigError);
    CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"family": "bessel", "window": [2, 1]})")), ConfigError);
    CHECK_THROWS_AS(kernel_from_json(json::parse(R"({"family": "gamma", "z_re": 0.2, "zp_re": 1.3})")),
                    ParameterError);
  }
}
