// dpprig: batch runner for the rigidity experiments.
//
//   dpprig <eval|bounds|variance-scan|sample|demo|fredholm-check> --config run.json
//          [--seed N] [--out file] [--threads N]

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dpprig/errors.hpp"
#include "dpprig/experiments.hpp"
#include "dpprig/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on rigidity of determinantal point processes"};
  app.require_subcommand(1, 1);

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  for (const char* name : {"eval", "bounds", "variance-scan", "sample", "demo", "fredholm-check"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 256u));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? dpprig::kExitOk : dpprig::kExitError;
  }

  try {
    dpprig::set_thread_count(threads);
    auto config = dpprig::load_config(config_path);
    const std::string sub = app.get_subcommands().front()->get_name();
    if (dpprig::to_string(config.kind) != sub) {
      throw dpprig::ConfigError("config kind '" + dpprig::to_string(config.kind) + "' does not match subcommand '" +
                                sub + "'");
    }
    if (seed) config.seed = seed;

    // Buffer the output so a failed run leaves no partial file behind.
    std::ostringstream buffer;
    const auto outcome = dpprig::run_experiment(config, buffer);
    if (out_path.empty()) {
      std::cout << buffer.str();
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!(out << buffer.str())) throw dpprig::ConfigError("cannot write " + out_path);
    }
    auto& log = out_path.empty() ? std::cerr : std::cout;
    for (const auto& line : outcome.summary) log << line << '\n';
    return outcome.exit_code;
  } catch (const dpprig::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dpprig::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dpprig::kExitError;
  }
}
