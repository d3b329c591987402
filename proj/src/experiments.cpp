#include "dpprig/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpprig/errors.hpp"
#include "dpprig/spectral.hpp"
#include "dpprig/variance.hpp"

namespace dpprig {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const json& need(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config: missing '") + key + "'");
  return j.at(key);
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return need(j, key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: '") + key + "' has the wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

Interval get_interval(const json& j, const char* key) {
  const auto v = get<std::vector<double>>(j, key);
  if (v.size() != 2) throw ConfigError(std::string("config: '") + key + "' must be [lower, upper]");
  return {v[0], v[1]};
}

std::uint64_t require_seed(const ExperimentConfig& config) {
  if (!config.seed) throw ConfigError("config: this experiment needs an explicit seed (config 'seed' or --seed)");
  return *config.seed;
}

KernelSpec kernel_of(const ExperimentConfig& config) { return kernel_from_json(need(config.raw, "kernel")); }

Interval window_of(const ExperimentConfig& config, const KernelSpec& spec) {
  if (config.raw.contains("window")) return get_interval(config.raw, "window");
  if (spec.window) return *spec.window;
  throw ConfigError("config: missing 'window'");
}

void hash_line(std::ostream& out, const ExperimentConfig& config) {
  out << "# config_hash: " << config_hash(config.raw, config.seed) << '\n';
}

RunOutcome run_eval(const ExperimentConfig& config, std::ostream& out) {
  const auto spec = kernel_of(config);
  const auto& pts = need(config.raw, "points");
  if (!pts.is_array()) throw ConfigError("config: 'points' must be a list of [x, y] pairs");
  hash_line(out, config);
  out << "x,y,value,regime\n";
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != 2) throw ConfigError("config: 'points' must be a list of [x, y] pairs");
    const double x = p[0].get<double>(), y = p[1].get<double>();
    const auto v = evaluate(spec, x, y);
    out << fmt(x) << ',' << fmt(y) << ',' << fmt(v.value) << ',' << to_string(v.regime) << '\n';
  }
  return {kExitOk, {"evaluated " + std::to_string(pts.size()) + " pairs of " + spec.name()}};
}

RunOutcome run_bounds(const ExperimentConfig& config, std::ostream& out) {
  const auto spec = kernel_of(config);
  const double R = get_or(config.raw, "R", 1.0);
  std::vector<std::string> conditions{"offdiag", "local_l2", "growth"};
  if (config.raw.contains("conditions")) conditions = get<std::vector<std::string>>(config.raw, "conditions");
  BoundGrid grid;
  grid.levels = get_or(config.raw, "levels", grid.levels);
  grid.points_per_decade = get_or(config.raw, "points_per_decade", grid.points_per_decade);

  RunOutcome outcome;
  json reports = json::array();
  bool all_bounded = true;
  for (const auto& c : conditions) {
    BoundCheckReport r;
    if (c == "offdiag") {
      r = check_offdiag_bound(spec, R, get_or(config.raw, "alpha", default_alpha(spec)), grid);
    } else if (c == "local_l2") {
      r = check_local_l2_bound(spec, R, get_or(config.raw, "epsilon", default_l2_epsilon(spec)), grid);
    } else if (c == "growth") {
      r = check_integrable_growth(spec, R, get_or(config.raw, "C", 0.0),
                                  get_or(config.raw, "epsilon", default_growth_epsilon(spec)), grid);
    } else {
      throw ConfigError("config: unknown condition '" + c + "'");
    }
    all_bounded = all_bounded && r.verdict == BoundVerdict::bounded;
    outcome.summary.push_back(spec.name() + " " + c + ": " + to_string(r.verdict) + " (estimated_C " +
                              fmt(r.estimated_C) + ")");
    reports.push_back(to_json(r));
  }
  json doc;
  doc["config_hash"] = config_hash(config.raw, config.seed);
  doc["kernel"] = spec.name();
  doc["reports"] = reports;
  doc["all_bounded"] = all_bounded;
  out << doc.dump(2) << '\n';
  outcome.exit_code = all_bounded ? kExitOk : kExitFlagged;
  return outcome;
}

RunOutcome run_variance_scan(const ExperimentConfig& config, std::ostream& out) {
  const auto spec = kernel_of(config);
  const auto T = get<std::vector<double>>(config.raw, "T");
  const double R = get_or(config.raw, "R", 1.0);
  const auto kind = taper_kind_from_string(get_or(config.raw, "taper", std::string("symmetric")));
  VarianceOptions options;
  options.accuracy = get_or(config.raw, "accuracy", options.accuracy);
  const auto scan = decay_scan(spec, kind, R, T, options);
  hash_line(out, config);
  write_decay_csv(out, scan);
  RunOutcome outcome;
  outcome.summary.push_back(spec.name() + ": c_fit " + fmt(scan.c_fit));
  if (!scan.non_monotone.empty()) {
    outcome.exit_code = kExitFlagged;
    outcome.summary.push_back("variance not decreasing beyond error bars after T = " +
                              fmt(scan.rows[scan.non_monotone.front()].T));
  }
  return outcome;
}

RunOutcome run_sample(const ExperimentConfig& config, std::ostream& out) {
  const auto spec = kernel_of(config);
  const auto seed = require_seed(config);
  const auto op = discretize(spec, window_of(config, spec), get_or(config.raw, "nodes", 200));
  const auto sd = eigendecompose(op);
  if (config.raw.contains("cache")) write_spectral_cache(get<std::string>(config.raw, "cache"), sd);
  const auto samples = sample_many(sd, seed, get<std::size_t>(config.raw, "samples"));
  hash_line(out, config);
  write_configurations(out, samples);
  return {kExitOk,
          {std::to_string(samples.size()) + " samples of " + spec.name() + ", trace " + fmt(sd.eigenvalues.sum())}};
}

RunOutcome run_demo_experiment(const ExperimentConfig& config, std::ostream& out) {
  const auto spec = kernel_of(config);
  DemoParams p;
  p.seed = require_seed(config);
  if (config.raw.contains("B")) {
    const auto& b = config.raw.at("B");
    p.B = b.is_null() || b.empty() ? Interval{1.0, 0.0} : get_interval(config.raw, "B");
  }
  p.R = get_or(config.raw, "R", p.R);
  p.taper = taper_kind_from_string(get_or(config.raw, "taper", std::string("symmetric")));
  p.T_list = get<std::vector<double>>(config.raw, "T");
  p.samples = get_or(config.raw, "samples", p.samples);
  p.nodes = get_or(config.raw, "nodes", p.nodes);
  const auto report = run_demo(spec, p);

  hash_line(out, config);
  out << "# T,sites,expected_statistic,variance_formula,empirical_variance,variance_se,mse,recovery_rate\n";
  RunOutcome outcome;
  bool agree = true;
  for (const auto& s : report.summaries) {
    out << "# " << fmt(s.T) << ',' << s.sites << ',' << fmt(s.expected_statistic) << ',' << fmt(s.variance_formula) << ','
        << fmt(s.empirical_variance) << ',' << fmt(s.variance_standard_error) << ',' << fmt(s.mse) << ','
        << fmt(s.recovery_rate) << '\n';
    outcome.summary.push_back("T " + fmt(s.T) + ": recovery " + fmt(s.recovery_rate) + ", variance " +
                              fmt(s.empirical_variance) + " vs formula " + fmt(s.variance_formula) +
                              (s.variance_agrees ? " (agrees)" : " (outside 3 sigma)"));
    agree = agree && s.variance_agrees;
  }
  out << "T,seed,true_count,estimate,rounded\n";
  for (const auto& r : report.rows) {
    out << fmt(r.T) << ',' << r.seed << ',' << r.true_count << ',' << fmt(r.estimate) << ',' << r.rounded << '\n';
  }
  if (!report.recovery_non_decreasing) outcome.summary.push_back("recovery rate decreased along T");
  outcome.exit_code = agree && report.recovery_non_decreasing ? kExitOk : kExitFlagged;
  return outcome;
}

RunOutcome run_fredholm_check(const ExperimentConfig& config, std::ostream& out) {
  const auto spec = kernel_of(config);
  const auto seed = require_seed(config);
  const auto window = window_of(config, spec);
  std::vector<Interval> sets;
  for (const auto& r : need(config.raw, "regions")) {
    const auto v = r.get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("config: each region must be [lower, upper]");
    if (v[0] < window.lower || v[1] > window.upper) throw ConfigError("config: regions must lie in the window");
    sets.push_back({v[0], v[1]});
  }
  const auto z = get<std::vector<double>>(config.raw, "z");
  if (sets.size() < 2) throw ConfigError("config: fredholm-check needs at least two regions");
  if (z.size() != sets.size()) throw ConfigError("config: one z per region required");

  const auto sd = eigendecompose(discretize(spec, window, get_or(config.raw, "nodes", 200)));
  const double det = generating_function(sd, sets, z);
  const auto samples = sample_many(sd, seed, get<std::size_t>(config.raw, "samples"));
  double sum = 0.0, sum2 = 0.0;
  for (const auto& c : samples) {
    double v = 1.0;
    for (std::size_t k = 0; k < sets.size(); ++k) v *= std::pow(z[k], static_cast<double>(c.count(sets[k])));
    sum += v;
    sum2 += v * v;
  }
  const auto n = static_cast<double>(samples.size());
  const double mean = sum / n;
  const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / n);
  const bool agrees = std::abs(mean - det) <= 3.0 * se || std::abs(mean - det) <= 1e-12;

  json doc;
  doc["config_hash"] = config_hash(config.raw, config.seed);
  doc["kernel"] = spec.name();
  doc["determinant"] = det;
  doc["empirical"] = mean;
  doc["standard_error"] = se;
  doc["samples"] = samples.size();
  doc["agrees"] = agrees;
  out << doc.dump(2) << '\n';
  return {agrees ? kExitOk : kExitFlagged,
          {"det " + fmt(det) + " vs empirical " + fmt(mean) + " +- " + fmt(se) + (agrees ? " (agrees)" : " (disagrees)")}};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::eval: return "eval";
    case ExperimentKind::bounds: return "bounds";
    case ExperimentKind::variance_scan: return "variance-scan";
    case ExperimentKind::sample: return "sample";
    case ExperimentKind::demo: return "demo";
    case ExperimentKind::fredholm_check: return "fredholm-check";
  }
  return "eval";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (auto k : {ExperimentKind::eval, ExperimentKind::bounds, ExperimentKind::variance_scan, ExperimentKind::sample,
                 ExperimentKind::demo, ExperimentKind::fredholm_check}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig config;
  config.raw = j;
  config.kind = experiment_kind_from_string(get<std::string>(j, "kind"));
  if (j.contains("seed")) config.seed = get<std::uint64_t>(j, "seed");
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
}

std::string config_hash(const json& raw, std::optional<std::uint64_t> seed) {
  const std::string text = raw.dump() + "|seed=" + (seed ? std::to_string(*seed) : std::string("none"));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunOutcome run_experiment(const ExperimentConfig& config, std::ostream& out) {
  switch (config.kind) {
    case ExperimentKind::eval: return run_eval(config, out);
    case ExperimentKind::bounds: return run_bounds(config, out);
    case ExperimentKind::variance_scan: return run_variance_scan(config, out);
    case ExperimentKind::sample: return run_sample(config, out);
    case ExperimentKind::demo: return run_demo_experiment(config, out);
    case ExperimentKind::fredholm_check: return run_fredholm_check(config, out);
  }
  throw ConfigError("unknown experiment kind");
}

DemoReport run_demo(const KernelSpec& spec, const DemoParams& params) {
  const bool empty_B = !(params.B.upper >= params.B.lower);
  if (!empty_B) {
    const bool inside = params.taper == TaperKind::symmetric
                            ? params.B.lower >= -params.R - 1.0 && params.B.upper <= params.R + 1.0
                            : params.B.lower >= -params.R - 1.0;
    if (!inside) throw ConfigError("demo: the taper is not identically 1 on B; increase R");
  }
  if (params.samples < 2) throw ConfigError("demo: need at least two samples");
  if (params.T_list.empty()) throw ConfigError("demo: missing T list");

  DemoReport report;
  for (std::size_t t = 0; t < params.T_list.size(); ++t) {
    const double T = params.T_list[t];
    const Taper taper = make_taper(params.taper, params.R, T);
    const auto stat = taper_statistic(taper);
    // f = 0 when B is empty: the estimator is then identically 0 = #_B
    const auto f = [&](double x) { return empty_B ? 0.0 : taper_eval(taper, x); };
    Interval window{std::max(stat.support.lower, spec.phase_space.bounds.lower),
                    std::min({stat.support.upper, spec.phase_space.bounds.upper, spec.negligible_above})};
    DemoSummary s;
    s.T = T;
    s.variance_formula = empty_B ? 0.0 : variance_additive(spec, stat).value;
    std::vector<Configuration> samples;
    const auto seed = derive_seed(params.seed, t);
    if (spec.is_lattice()) {
      const LatticeSampler sampler(spec, window);
      const auto& sites = sampler.sites();
      s.sites = static_cast<std::size_t>(sites.size());
      for (Eigen::Index i = 0; i < sites.size(); ++i) s.expected_statistic += f(sites.points()(i)) * sites.diagonal()(i);
      samples = sampler.sample_many(seed, params.samples);
    } else {
      const auto sd = eigendecompose(discretize(spec, window, params.nodes));
      const auto& op = sd.source;
      s.sites = static_cast<std::size_t>(op.nodes.size());
      for (Eigen::Index i = 0; i < op.nodes.size(); ++i) s.expected_statistic += f(op.nodes(i)) * op.matrix(i, i);
      samples = sample_many(sd, seed, params.samples);
    }
    std::vector<double> errors;
    errors.reserve(samples.size());
    std::size_t recovered = 0;
    for (const auto& c : samples) {
      const std::size_t count = empty_B ? 0 : c.count(params.B);
      double outside = 0.0;
      for (double x : c.points) {
        if (!params.B.contains(x)) outside += f(x);
      }
      const double estimate = s.expected_statistic - outside;
      const double error = estimate - static_cast<double>(count);
      errors.push_back(error);
      if (std::abs(error) < 0.5) ++recovered;
      report.rows.push_back({T, c.seed, count, estimate, std::llround(estimate)});
    }
    const auto n = static_cast<double>(errors.size());
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= n;
    double m2 = 0.0, m4 = 0.0, sq = 0.0;
    for (double e : errors) {
      const double d = e - mean;
      m2 += d * d;
      m4 += d * d * d * d;
      sq += e * e;
    }
    s.empirical_variance = m2 / (n - 1.0);
    const double m2n = m2 / n;
    s.variance_standard_error = std::sqrt(std::max(0.0, m4 / n - m2n * m2n) / n);
    s.mse = sq / n;
    s.recovery_rate = static_cast<double>(recovered) / n;
    s.variance_agrees = std::abs(s.empirical_variance - s.variance_formula) <= 3.0 * s.variance_standard_error + 1e-12;
    if (!report.summaries.empty() && s.recovery_rate < report.summaries.back().recovery_rate) {
      report.recovery_non_decreasing = false;
    }
    report.summaries.push_back(s);
  }
  return report;
}

}  // namespace dpprig
