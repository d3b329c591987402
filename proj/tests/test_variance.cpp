#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dpprig/errors.hpp"
#include "dpprig/quadrature.hpp"
#include "dpprig/spectral.hpp"
#include "dpprig/variance.hpp"
#include "oracles.hpp"

using namespace dpprig;

namespace {

// Var S_f = sum f^2 Pi(x, x) - sum sum f(x) f(y) Pi(x, y)^2 over the support
// of f (f = 0 outside), with the given nodes and weights.
double direct_variance(const KernelSpec& spec, const std::function<double(double)>& f, const std::vector<double>& x,
                       const Eigen::VectorXd& w) {
  const KernelSamples s(spec, x);
  double diag = 0, cross = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double fi = f(x[i]) * w(i);
    diag += fi * f(x[i]) * s.diagonal()(i);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      const double k = s(i, j);
      cross += fi * f(x[j]) * w(j) * k * k;
    }
  }
  return diag - cross;
}

}  // namespace

TEST_SUITE("variance") {
  TEST_CASE("constant statistic has zero variance") {
    AdditiveStatistic c;
    c.f = [](double) { return 2.5; };
    c.support = {0.0, 50.0};
    c.outside_value = 2.5;
    CHECK(variance_additive(bessel_kernel(0.0), c).value == 0.0);
    c.support = {-20.0, 20.0};
    CHECK(variance_additive(gamma_kernel(0.2, 0.7), c).value == 0.0);
  }

  TEST_CASE("two-site rank-one projection") {
    Eigen::MatrixXd K(2, 2);
    K << 0.5, 0.5, 0.5, 0.5;
    CHECK(variance_finite(K, Eigen::Vector2d(1.0, 0.0)) == 0.25);
    CHECK_THROWS_AS(variance_finite(K, Eigen::Vector3d(1, 0, 0)), ParameterError);
  }

  TEST_CASE("lattice variance equals the unsymmetrized direct sum") {
    for (const auto& spec : {gamma_kernel(0.2, 0.7), gamma_kernel({0.3, 0.4}, {0.3, -0.4})}) {
      const auto taper = make_taper(TaperKind::symmetric, 2.0, 60.0);
      const auto st = taper_statistic(taper);
      const auto pts = spec.phase_space.lattice_points({-60.0, 60.0});
      const double oracle = direct_variance(spec, st.f, pts, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pts.size())));
      const auto v = variance_regions(spec, taper);
      CAPTURE(spec.name());
      CHECK(std::abs(v.value - oracle) <= 1e-12);
      CHECK(v.value > 0.0);
    }
  }

  TEST_CASE("continuous variance equals a fine direct quadrature") {
    const auto spec = bessel_kernel(0.0);
    const auto taper = make_taper(TaperKind::symmetric, 1.0, 100.0);
    const auto st = taper_statistic(taper);
    std::vector<double> bp{0.0, 1.0, 2.0};
    for (double a = 2.0; a < 100.0;) bp.push_back(a = std::min(100.0, a + 0.5));
    const auto rule = composite_gauss_legendre(bp, 16);
    const std::vector<double> x(rule.nodes.data(), rule.nodes.data() + rule.nodes.size());
    const double oracle = direct_variance(spec, st.f, x, rule.weights);
    const auto v = variance_regions(spec, taper, {.accuracy = 1e-9});
    CHECK(std::abs(v.value - oracle) <= 1e-7);
  }

  TEST_CASE("bessel taper variance matches Monte Carlo") {
    const auto spec = bessel_kernel(0.0);
    const auto taper = make_taper(TaperKind::symmetric, 1.0, 100.0);
    const double formula = variance_regions(spec, taper).value;
    const auto sd = eigendecompose(discretize(spec, {0.0, 100.0}, 200));
    const auto samples = sample_many(sd, 20240611, 10000);
    std::vector<double> stats;
    for (const auto& c : samples) {
      double s = 0;
      for (double p : c.points) s += taper_eval(taper, p);
      stats.push_back(s);
    }
    const auto m = oracle::moments(stats);
    CAPTURE(formula);
    CAPTURE(m.variance);
    CAPTURE(m.variance_se);
    CHECK(std::abs(m.variance - formula) <= 3 * m.variance_se);
  }

  TEST_CASE("regions add up to the total") {
    const auto r = variance_regions(bessel_kernel(0.0), make_taper(TaperKind::symmetric, 1.0, 1000.0));
    const double sum = r.region_breakdown[0] + r.region_breakdown[1] + r.region_breakdown[2];
    CHECK(std::abs(sum - r.value) <= std::max(r.quadrature_error, 1e-12));
    for (double part : r.region_breakdown) CHECK(part >= 0.0);
  }

  TEST_CASE("just above R + 1 the core region dominates") {
    const auto r = variance_regions(bessel_kernel(0.0), make_taper(TaperKind::symmetric, 1.0, 2.05));
    CHECK(r.region_breakdown[0] < 0.01 * r.value);
    CHECK(r.region_breakdown[2] > r.region_breakdown[1]);
    CHECK(r.region_breakdown[2] > 0.5 * r.value);
  }

  TEST_CASE("shift invariance and quadratic scaling") {
    const auto spec = gamma_kernel(0.2, 0.7);
    const auto base = taper_statistic(make_taper(TaperKind::symmetric, 3.0, 40.0));
    const double v = variance_additive(spec, base).value;
    auto shifted = base;
    shifted.f = [f = base.f](double x) { return f(x) - 7.0; };
    shifted.outside_value = -7.0;
    shifted.core_value = base.core_value - 7.0;
    CHECK(std::abs(variance_additive(spec, shifted).value - v) <= 1e-12);
    for (double a : {2.0, -3.0}) {
      auto scaled = base;
      scaled.f = [f = base.f, a](double x) { return a * f(x); };
      scaled.core_value = a;
      CHECK(std::abs(variance_additive(spec, scaled).value - a * a * v) <= 1e-12);
    }
  }

  TEST_CASE("finite formula matches subset enumeration") {
    std::mt19937_64 rng(3);
    for (int n : {3, 6, 9}) {
      const auto K = oracle::random_projection(n, n / 2, rng);
      Eigen::VectorXd f = Eigen::VectorXd::Random(n);
      const auto law = oracle::enumerate_law(K);
      CHECK(std::abs(variance_finite(K, f) - oracle::statistic_moments(law, f).second) <= 1e-12);
    }
  }

  TEST_CASE("indicator statistic on the lattice") {
    // Var #B = sum_{i in B} K_ii - sum_{i,j in B} K_ij^2.
    const auto spec = gamma_kernel(0.2, 0.7);
    const auto st = indicator_statistic({-4.5, 4.5});
    const auto pts = spec.phase_space.lattice_points({-4.5, 4.5});
    const double oracle = direct_variance(spec, st.f, pts, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pts.size())));
    CHECK(std::abs(variance_additive(spec, st).value - oracle) <= 1e-12);
  }

  TEST_CASE("node budget") {
    const auto spec = bessel_kernel(0.0);
    const auto taper = make_taper(TaperKind::symmetric, 1.0, 1000.0);
    try {
      (void)variance_regions(spec, taper, {.accuracy = 1e-13, .max_nodes = 1000});
      FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
      REQUIRE(e.partial().has_value());
      CHECK(std::abs(e.partial()->value - variance_regions(spec, taper).value) <= 1e-6);
    }
    try {
      (void)variance_regions(spec, taper, {.max_nodes = 50});
      FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
      CHECK_FALSE(e.partial().has_value());
    }
  }

  TEST_CASE("decay scan preconditions and csv") {
    const auto spec = bessel_kernel(0.0);
    CHECK_THROWS_AS(decay_scan(spec, TaperKind::symmetric, 1.0, {100.0, 50.0}), ParameterError);
    CHECK_THROWS_AS(decay_scan(spec, TaperKind::symmetric, 1.0, {1.5}), ParameterError);
    CHECK_THROWS_AS(decay_scan(spec, TaperKind::symmetric, 1.0, {}), ParameterError);
    const auto scan = decay_scan(spec, TaperKind::symmetric, 1.0, {20.0, 100.0});
    CHECK(scan.non_monotone.empty());
    CHECK(scan.rows[1].result.value < scan.rows[0].result.value);
    std::ostringstream out;
    write_decay_csv(out, scan);
    const std::string csv = out.str();
    CHECK(csv.substr(0, csv.find('\n')) == "kernel,R,T,variance,region1,region2,region3,quad_error,c_fit");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  }

  TEST_CASE("support outside the phase space") {
    CHECK_THROWS_AS(variance_additive(bessel_kernel(0.0), indicator_statistic({-5.0, -1.0})), DomainError);
    CHECK_THROWS_AS(variance_additive(sine_kernel(), indicator_statistic({0.0, HUGE_VAL})), DomainError);
  }
}
