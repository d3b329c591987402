// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance [--only=N,M] [--known-unattainable=N,M]
//
// Exits 0 when every failing criterion is listed in --known-unattainable.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dpprig/experiments.hpp"
#include "dpprig/rigidity.hpp"
#include "dpprig/specfun.hpp"
#include "dpprig/spectral.hpp"
#include "dpprig/variance.hpp"
#include "oracles.hpp"

using namespace dpprig;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

// 1. Special functions against the checked-in high-precision table.
Verdict special_functions() {
  const auto rows = oracle::read_reference_table(std::string(DPPRIG_TEST_DATA) + "/specfun_reference.csv");
  double worst = 0;
  std::string where;
  for (const auto& r : rows) {
    double err = 0;
    const double x = r.arg.real();
    if (r.function == "airy_ai") err = std::abs(airy(x).ai.value - r.value.real());
    else if (r.function == "airy_ai_prime") err = std::abs(airy(x).ai_prime.value - r.value.real());
    else if (r.function == "log_gamma") err = std::abs(log_gamma(r.arg).value - r.value);
    else err = std::abs(bessel_j(std::stod(r.function.substr(9)), x).value - r.value.real());
    if (err > worst) {
      worst = err;
      where = r.function + fmt("(%g%+gi)", r.arg.real(), r.arg.imag());
    }
  }
  return {rows.size() == 200 && worst <= 1e-9,
          fmt("%zu arguments, max abs error %.2e at %s (tolerance 1e-9)", rows.size(), worst, where.c_str())};
}

// 2. Variance formula and Fredholm determinant against subset enumeration.
Verdict brute_force() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(3, 10), offset(-50, 40);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::vector<std::pair<double, double>> complementary{{0.2, 0.7}, {-0.6, -0.1}, {1.1, 1.8}, {0.05, 0.95}};
  const std::vector<std::complex<double>> principal{{0.3, 0.4}, {-0.2, 1.1}, {1.7, 0.25}};
  double var_err = 0, det_err = 0;
  int windows = 0;
  for (int w = 0; w < 20; ++w) {
    const int n = size(rng);
    DiscretizedOperator op;
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f(i) = unit(rng);
    double formula = 0;
    if (w % 5 == 4) {
      op = finite_operator(oracle::random_projection(n, 1 + w % n, rng));
      formula = variance_finite(op.matrix, f);
    } else {
      const KernelSpec spec = w % 5 < 2 ? gamma_kernel(complementary[w % 4].first, complementary[w % 4].second)
                                        : gamma_kernel(principal[w % 3], std::conj(principal[w % 3]));
      const double lo = offset(rng);
      op = discretize(spec, {lo, lo + n}, 0);
      // f at the sites of the window, 0 elsewhere on the full lattice.
      AdditiveStatistic st;
      const auto nodes = op.nodes;
      st.f = [nodes, f](double x) {
        for (Eigen::Index i = 0; i < nodes.size(); ++i) {
          if (nodes(i) == x) return f(i);
        }
        return 0.0;
      };
      st.support = {lo, lo + n};
      formula = variance_additive(spec, st).value;
    }
    const auto law = oracle::enumerate_law(op.matrix);
    var_err = std::max(var_err, std::abs(formula - oracle::statistic_moments(law, f).second));
    const auto sd = eigendecompose(op);
    const std::vector<bool> all(static_cast<std::size_t>(n), true);
    for (double z : {0.3, 0.7, 1.5}) {
      const double det = fredholm_det(sd, [z](double) { return z; });
      det_err = std::max(det_err, std::abs(det - oracle::generating_function(law, all, z)));
    }
    ++windows;
  }
  return {var_err <= 1e-10 && det_err <= 1e-10,
          fmt("%d windows: max variance error %.2e, max generating-function error %.2e (tolerance 1e-10)", windows,
              var_err, det_err)};
}

// 3. Spectra of discretized projections.
Verdict projection_spectrum() {
  struct Case {
    std::string name;
    KernelSpec spec;
    Interval window;
    int n;
  };
  const std::vector<Case> cases{{"bessel [0,50] n=400", bessel_kernel(0.0), {0, 50}, 400},
                                {"airy [-20,0] n=400", airy_kernel(), {-20, 0}, 400},
                                {"gamma(0.2,0.7) 400 sites", gamma_kernel(0.2, 0.7), {-200, 200}, 0},
                                {"gamma(0.3+-0.4i) 400 sites", gamma_kernel({0.3, 0.4}, {0.3, -0.4}), {-200, 200}, 0}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto sd = eigendecompose(discretize(c.spec, c.window, c.n));
    ok = ok && sd.clip_amount <= 1e-8;
    detail += fmt("%s%s: excess %.1e", detail.empty() ? "" : "; ", c.name.c_str(), sd.clip_amount);
  }
  return {ok, detail + " (tolerance 1e-8)"};
}

// 4. Sampler law.
Verdict sampler_law() {
  Eigen::MatrixXd K(2, 2);
  K << 0.5, 0.5, 0.5, 0.5;
  const auto two = eigendecompose(finite_operator(K));
  const std::size_t n2 = 100000;
  std::vector<double> freq(4, 0);
  for (const auto& c : sample_many(two, 31, n2)) {
    std::size_t mask = 0;
    for (double p : c.points) mask |= std::size_t{1} << static_cast<int>(p);
    freq[mask] += 1;
  }
  const std::vector<double> law{0, 0.5, 0.5, 0};
  double worst_z = 0;
  bool ok = true;
  for (std::size_t m = 0; m < 4; ++m) {
    const double p = freq[m] / n2;
    if (law[m] == 0) {
      ok = ok && freq[m] == 0;
      continue;
    }
    worst_z = std::max(worst_z, std::abs(p - law[m]) / std::sqrt(law[m] * (1 - law[m]) / n2));
  }
  ok = ok && worst_z <= 4;

  const auto sd = eigendecompose(discretize(bessel_kernel(0.0), {0, 20}, 200));
  const double trace = sd.eigenvalues.sum();
  const double var = (sd.eigenvalues.array() * (1 - sd.eigenvalues.array())).sum();
  std::vector<double> counts;
  for (const auto& c : sample_many(sd, 32, 10000)) counts.push_back(static_cast<double>(c.points.size()));
  const auto m = oracle::moments(counts);
  const double z_mean = std::abs(m.mean - trace) / m.mean_se, z_var = std::abs(m.variance - var) / m.variance_se;
  ok = ok && z_mean <= 3 && z_var <= 3;
  return {ok, fmt("two-site subsets: max |z| %.2f (limit 4), impossible subsets %s; bessel [0,20]: mean %.4f vs trace "
                  "%.4f (z %.2f), variance %.4f vs %.4f (z %.2f)",
                  worst_z, freq[0] + freq[3] == 0 ? "never drawn" : "drawn", m.mean, trace, z_mean, m.variance, var,
                  z_var)};
}

DecayScan bessel_scan;  // shared by criteria 5 and 6

const DecayScan& bessel_decay() {
  if (bessel_scan.rows.empty()) bessel_scan = decay_scan(bessel_kernel(0.0), TaperKind::symmetric, 1.0, {1e2, 1e3, 1e4});
  return bessel_scan;
}

bool strictly_decreasing(const DecayScan& s) {
  for (std::size_t k = 0; k + 1 < s.rows.size(); ++k) {
    const auto& a = s.rows[k].result;
    const auto& b = s.rows[k + 1].result;
    if (!(b.value + b.quadrature_error < a.value - a.quadrature_error)) return false;
  }
  return true;
}

std::string values(const DecayScan& s) {
  std::string out;
  for (const auto& r : s.rows) out += fmt("%s%.4g", out.empty() ? "" : ", ", r.result.value);
  return out;
}

// 5. Variance decay.
Verdict variance_decay() {
  const auto& b = bessel_decay();
  std::vector<double> products;
  for (const auto& r : b.rows) products.push_back(r.result.value * std::log(r.T));
  auto sorted = products;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  double spread = 0;
  for (double p : products) spread = std::max(spread, std::abs(p / median - 1));
  const auto airy = decay_scan(airy_kernel(), TaperKind::airy_one_sided, 1.0, {1e2, 1e3});
  const auto gamma = decay_scan(gamma_kernel(0.2, 0.7), TaperKind::symmetric, 1.0, {1e2, 1e3});
  const bool ok = strictly_decreasing(b) && spread <= 0.25 && strictly_decreasing(airy) && strictly_decreasing(gamma);
  return {ok, fmt("bessel: %s, value*log T within %.1f%% of median (limit 25%%); airy one-sided: %s; gamma(0.2,0.7): %s",
                  values(b).c_str(), 100 * spread, values(airy).c_str(), values(gamma).c_str())};
}

// 6. Region shares in the bessel scan.
Verdict region_dominance() {
  const auto& b = bessel_decay();
  std::string shares;
  bool decreasing = true;
  double prev2 = 2, prev3 = 2;
  for (const auto& r : b.rows) {
    const double s2 = r.result.region_breakdown[1] / r.result.value, s3 = r.result.region_breakdown[2] / r.result.value;
    decreasing = decreasing && s2 < prev2 && s3 < prev3;
    prev2 = s2;
    prev3 = s3;
    shares += fmt("%sT=%g: %.1f%%/%.1f%%", shares.empty() ? "" : ", ", r.T, 100 * s2, 100 * s3);
  }
  const bool small = prev2 < 0.2 && prev3 < 0.2;
  return {small && decreasing, fmt("region 2/3 shares %s; decreasing %s; both < 20%% at T=1e4: %s", shares.c_str(),
                                   decreasing ? "yes" : "no", small ? "yes" : "no")};
}

// 7. Bound checks.
Verdict bounds() {
  struct Case {
    std::string name;
    KernelSpec spec;
    bool expect_bounded;
  };
  const std::vector<Case> cases{{"bessel(0)", bessel_kernel(0.0), true},
                                {"gamma(0.2,0.7)", gamma_kernel(0.2, 0.7), true},
                                {"gamma(0.3+-0.4i)", gamma_kernel({0.3, 0.4}, {0.3, -0.4}), true},
                                {"A(x)=x", linear_kernel(1.0, PhaseSpace{}), false}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const std::vector<BoundCheckReport> reports{
        check_offdiag_bound(c.spec, 1.0, default_alpha(c.spec)),
        check_local_l2_bound(c.spec, 1.0, default_l2_epsilon(c.spec)),
        check_integrable_growth(c.spec, 1.0, 0.0, default_growth_epsilon(c.spec))};
    std::string verdicts;
    bool all_bounded = true;
    for (const auto& r : reports) {
      all_bounded = all_bounded && r.verdict == BoundVerdict::bounded;
      verdicts += (verdicts.empty() ? "" : "/") + to_string(r.verdict);
    }
    // The counterexample must be caught by the off-diagonal and growth checks.
    const bool as_expected = c.expect_bounded ? all_bounded
                                              : reports[0].verdict == BoundVerdict::growing &&
                                                    reports[2].verdict == BoundVerdict::growing;
    ok = ok && as_expected;
    detail += fmt("%s%s: %s", detail.empty() ? "" : "; ", c.name.c_str(), verdicts.c_str());
  }
  return {ok, detail + " (offdiag/local_l2/growth)"};
}

// 8. Reconstruction demo.
Verdict demo() {
  DemoParams p;
  p.B = {-4.5, 4.5};
  p.R = 3.5;
  p.T_list = {50, 200, 800};
  p.samples = 10000;
  p.seed = 8;
  const auto report = run_demo(gamma_kernel(0.2, 0.7), p);
  const auto& s200 = report.summaries[1];
  std::string rates;
  for (const auto& s : report.summaries) rates += fmt("%s%.4f", rates.empty() ? "" : ", ", s.recovery_rate);
  return {s200.variance_agrees && report.recovery_non_decreasing,
          fmt("T=200: empirical variance %.5f vs formula %.5f (3 se = %.5f); recovery at T=50,200,800: %s", s200.empirical_variance,
              s200.variance_formula, 3 * s200.variance_standard_error, rates.c_str())};
}

// 9. Byte-identical output files from the command-line runner.
Verdict determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "dpprig_acceptance";
  fs::create_directories(dir);
  using nlohmann::json;
  const json bessel = {{"family", "bessel"}, {"s", 0.0}};
  const json gamma = {{"family", "gamma"}, {"z_re", 0.2}, {"zp_re", 0.7}};
  const std::vector<std::pair<std::string, json>> configs{
      {"eval", {{"kind", "eval"}, {"kernel", bessel}, {"points", {{1.0, 2.0}, {3.0, 3.0000001}}}}},
      {"bounds", {{"kind", "bounds"}, {"kernel", gamma}, {"points_per_decade", 20}}},
      {"variance-scan", {{"kind", "variance-scan"}, {"kernel", bessel}, {"T", {1e2, 1e3}}}},
      {"sample", {{"kind", "sample"}, {"kernel", bessel}, {"window", {0.0, 20.0}}, {"samples", 500}}},
      {"demo", {{"kind", "demo"}, {"kernel", gamma}, {"T", {50.0, 100.0}}, {"samples", 500}}},
      {"fredholm-check",
       {{"kind", "fredholm-check"}, {"kernel", bessel}, {"window", {0.0, 10.0}}, {"regions", {{0.0, 3.0}, {5.0, 8.0}}},
        {"z", {0.6, 1.3}}, {"samples", 500}}}};
  const auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool ok = true;
  std::string detail;
  for (const auto& [kind, cfg] : configs) {
    const auto cfg_path = dir / (kind + ".json");
    std::ofstream(cfg_path) << cfg.dump(2);
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "3"}) {
      const auto out = dir / (kind + "_" + std::to_string(outputs.size()) + ".out");
      const std::string cmd = std::string(DPPRIG_CLI) + " " + kind + " --config " + cfg_path.string() +
                              " --seed 1234 --threads " + threads + " --out " + out.string() + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      if (code != 0 && code != 2) ok = false;
      outputs.push_back(read(out));
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    ok = ok && same;
    detail += fmt("%s%s %s", detail.empty() ? "" : ", ", kind.c_str(), same ? "identical" : "DIFFERENT");
  }
  return {ok, detail + " (2 runs at 1 thread, 1 at 3 threads)"};
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  std::set<int> only, known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--only=", 0) == 0) only = parse_list(a.substr(7));
    else if (a.rfind("--known-unattainable=", 0) == 0) known = parse_list(a.substr(21));
    else {
      std::fprintf(stderr, "usage: acceptance [--only=N,...] [--known-unattainable=N,...]\n");
      return 1;
    }
  }
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"special-function accuracy", special_functions},
      {"brute-force equivalence", brute_force},
      {"projection spectrum", projection_spectrum},
      {"sampler law", sampler_law},
      {"variance decay", variance_decay},
      {"region dominance", region_dominance},
      {"bounds verification", bounds},
      {"rigidity demo", demo},
      {"determinism", determinism}};
  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool excused = !v.pass && known.contains(id);
    if (!v.pass && !excused) ++unexpected;
    std::printf("[%s] %d %s: %s (%.1f s)%s\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), v.detail.c_str(),
                secs, excused ? " [known unattainable, see README]" : "");
  }
  return unexpected == 0 ? 0 : 1;
}
