#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "bdris/config.hpp"
#include "bdris/driver.hpp"

namespace bdris {

struct SweepRow {
  SweepCase c;
  double value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
};

/// Ordered (case, value, trial) jobs of a sweep.
struct SweepJob {
  std::size_t case_index = 0;
  std::size_t value_index = 0;
  int trial = 0;
};
std::vector<SweepJob> sweep_jobs(const SweepSpec &spec);

/// Seed of one trial; shared by every case and value so that cases see the
/// same channel draws.
std::uint64_t trial_seed(const SweepSpec &spec, int trial);

/// Runs one job; channels come from trial_seed().
SweepRow run_job(const SweepSpec &spec, const SweepJob &job);

/// Worker count from BDRIS_WORKERS, else the hardware concurrency (>= 1).
int default_workers();

/// Runs every job on `workers` threads. Rows come back in job order whatever
/// the completion order. The first exception thrown by a job is rethrown.
std::vector<SweepRow> run_sweep(const SweepSpec &spec, int workers);

inline constexpr const char *kSweepCsvHeader =
    "mode,arch,swept_var,value,trial,seed,sum_rate,iters,wall_ms";

/// %.17g with '.' as the decimal separator whatever the locale.
std::string format_number(double v);

void write_sweep_csv(std::ostream &out, const SweepSpec &spec,
                     const std::vector<SweepRow> &rows, bool timing = true);

/// Per-iteration trace: iter,f_o,power_used,constraint_residual.
void write_trace_csv(std::ostream &out, const std::vector<TracePoint> &trace);

/// FNV-1a over a canonical text form of the sweep (scenario fields, swept
/// variable, values, trials, seed and cases).
std::uint64_t scenario_hash(const SweepSpec &spec);

struct CaseSummary {
  SweepCase c;
  double value = 0.0;
  std::vector<double> rates; // per trial
  double mean = 0.0;
  double std_error = 0.0; // sample standard deviation / sqrt(n)
};

std::vector<CaseSummary> summarize(const SweepSpec &spec,
                                   const std::vector<SweepRow> &rows);

/// JSON run record: hash, per-point summaries and artifact paths.
std::string run_record_json(const SweepSpec &spec,
                            const std::vector<CaseSummary> &summaries,
                            const std::vector<std::string> &artifacts);

} // namespace bdris
