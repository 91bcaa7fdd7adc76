// bdris: run, sweep and self-test BD-RIS sum-rate experiments.
//
// Exit codes: 0 success, 1 self-test failure, 2 config/usage error,
// 3 numeric failure, 4 I/O error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "bdris/channel.hpp"
#include "bdris/config.hpp"
#include "bdris/driver.hpp"
#include "bdris/selftest.hpp"
#include "bdris/sweep.hpp"

namespace {

using namespace bdris;

constexpr int kExitSelftest = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path + "' for writing");
  return out;
}

int cmd_run(const std::string &config, const std::optional<std::uint64_t> &seed,
            const std::string &trace_path) {
  ExperimentConfig cfg = load_config(config);
  Scenario s = cfg.scenario;
  if (seed)
    s.seed = *seed;
  try {
    validate_scenario(s);
  } catch (const ScenarioError &e) {
    throw ConfigError("scenario." + e.field(), e.what());
  }
  const ChannelSet cs = generate_channels(s, s.seed);
  const RunResult r = run(s, cs);
  if (!trace_path.empty()) {
    auto out = open_output(trace_path);
    write_trace_csv(out, r.trace);
  }
  std::cout << "mode=" << to_string(s.mode) << " arch=" << to_string(s.arch)
            << " seed=" << s.seed << " sum_rate=" << format_number(r.sum_rate)
            << " iterations=" << r.iterations
            << " converged=" << (r.converged ? "yes" : "no")
            << " wall_ms=" << format_number(r.wall_ms) << '\n';
  return 0;
}

int cmd_sweep(const std::string &config, const std::string &out_path,
              const std::string &record_path, bool no_timing, int workers) {
  const ExperimentConfig cfg = load_config(config);
  if (!cfg.sweep)
    throw ConfigError("sweep", "config has no [sweep] section");
  const SweepSpec &spec = *cfg.sweep;
  const auto rows = run_sweep(spec, workers > 0 ? workers : default_workers());
  {
    auto out = open_output(out_path);
    write_sweep_csv(out, spec, rows, !no_timing);
  }
  const auto summaries = summarize(spec, rows);
  for (const auto &s : summaries)
    std::cout << to_string(s.c.mode) << ',' << to_string(s.c.arch) << ','
              << to_string(spec.var) << '=' << format_number(s.value)
              << " mean=" << format_number(s.mean)
              << " se=" << format_number(s.std_error) << '\n';
  if (!record_path.empty()) {
    auto out = open_output(record_path);
    out << run_record_json(spec, summaries, {out_path}) << '\n';
  }
  return 0;
}

int cmd_selftest(std::uint64_t seed, bool flip_gradient) {
  SelftestOptions opts;
  opts.seed = seed;
  opts.flip_gradient_sign = flip_gradient;
  const auto results = run_selftest(opts);
  const SuiteResult *first_failure = nullptr;
  for (const auto &r : results) {
    std::printf("%-10s %s max_error=%.3e threshold=%.0e samples=%d\n",
                r.name.c_str(), r.passed ? "PASS" : "FAIL", r.max_error,
                r.threshold, r.samples);
    if (!r.passed && !first_failure)
      first_failure = &r;
  }
  if (first_failure) {
    std::fprintf(stderr, "selftest failed: %s suite\n",
                 first_failure->name.c_str());
    return kExitSelftest;
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"BD-RIS sum-rate experiments"};
  app.require_subcommand(1);

  std::string config, trace_path, out_path, record_path;
  std::optional<std::uint64_t> seed;
  bool no_timing = false;
  int workers = 0;
  std::uint64_t selftest_seed = SelftestOptions{}.seed;
  bool flip_gradient = false;

  auto *run_cmd = app.add_subcommand("run", "Optimize one scenario");
  run_cmd->add_option("--config", config, "Config file")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--trace", trace_path, "Write the per-iteration trace CSV");

  auto *sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep to CSV");
  sweep_cmd->add_option("--config", config, "Config file with [sweep]")->required();
  sweep_cmd->add_option("--out", out_path, "Output CSV")->required();
  sweep_cmd->add_option("--record", record_path, "Write a JSON run record");
  sweep_cmd->add_flag("--no-timing", no_timing,
                      "Write wall_ms as 0 so reruns are byte-identical");
  sweep_cmd->add_option("--workers", workers,
                        "Worker threads (default: BDRIS_WORKERS or all cores)");

  auto *self_cmd = app.add_subcommand("selftest", "Run the property suites");
  auto *grad_cmd = app.add_subcommand("gradcheck", "Alias of selftest");
  for (auto *cmd : {self_cmd, grad_cmd}) {
    cmd->add_option("--seed", selftest_seed, "Random seed");
    cmd->add_flag("--inject-gradient-sign-bug", flip_gradient)->group("");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd)
      return cmd_run(config, seed, trace_path);
    if (*sweep_cmd)
      return cmd_sweep(config, out_path, record_path, no_timing, workers);
    return cmd_selftest(selftest_seed, flip_gradient);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ScenarioError &e) {
    std::cerr << "config error: scenario." << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericFailure &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError &e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
