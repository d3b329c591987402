#ifndef DPPRIG_EXPERIMENTS_HPP
#define DPPRIG_EXPERIMENTS_HPP

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpprig/kernels.hpp"
#include "dpprig/rigidity.hpp"

namespace dpprig {

enum class ExperimentKind { eval, bounds, variance_scan, sample, demo, fredholm_check };

/// A parsed experiment configuration. `raw` is the JSON the run was built
/// from; together with the seed it determines every output byte.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::eval;
  nlohmann::json raw;
  std::optional<std::uint64_t> seed;
};

/// Exit codes of the runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFlagged = 2;

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// FNV-1a 64 of the compact config dump and the seed, as 16 hex digits.
std::string config_hash(const nlohmann::json& raw, std::optional<std::uint64_t> seed);

struct RunOutcome {
  int exit_code = kExitOk;
  /// One line per reported item (verdicts, agreement checks).
  std::vector<std::string> summary;
};

/// Runs the experiment and writes its single output file to `out`. A seed
/// passed here overrides the one in the config.
RunOutcome run_experiment(const ExperimentConfig& config, std::ostream& out);

struct DemoParams {
  Interval B{-4.5, 4.5};
  double R = 3.5;
  TaperKind taper = TaperKind::symmetric;
  std::vector<double> T_list{50.0, 200.0, 800.0};
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  /// Node count for continuous kernels (lattice kernels use every site).
  int nodes = 400;
};

struct DemoSummary {
  double T = 0.0;
  std::size_t sites = 0;
  double expected_statistic = 0.0;  // E S_f by the trace formula
  double variance_formula = 0.0;
  double empirical_variance = 0.0;  // of the unrounded estimator error
  double variance_standard_error = 0.0;
  double mse = 0.0;
  double recovery_rate = 0.0;  // |error| < 1/2, ties count as failures
  bool variance_agrees = false;
};

struct DemoRow {
  double T = 0.0;
  std::uint64_t seed = 0;
  std::size_t true_count = 0;
  double estimate = 0.0;
  long long rounded = 0;
};

struct DemoReport {
  std::vector<DemoSummary> summaries;
  std::vector<DemoRow> rows;
  bool recovery_non_decreasing = true;
};

/// Reconstruction of #_B from the configuration outside B:
/// estimate = E S_f - S_{f 1_{outside B}} with f the taper, which is 1 on B.
/// Lattice kernels are sampled with LatticeSampler, continuous ones with the
/// spectral sampler on `nodes` Gauss-Legendre nodes.
DemoReport run_demo(const KernelSpec& spec, const DemoParams& params);

}  // namespace dpprig

#endif  // DPPRIG_EXPERIMENTS_HPP
