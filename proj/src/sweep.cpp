#include "bdris/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "bdris/channel.hpp"

namespace bdris {

namespace {

std::string case_arch(const SweepCase &c) { return to_string(c.arch); }

} // namespace

std::vector<SweepJob> sweep_jobs(const SweepSpec &spec) {
  std::vector<SweepJob> jobs;
  for (std::size_t c = 0; c < spec.cases.size(); ++c)
    for (std::size_t v = 0; v < spec.values.size(); ++v)
      for (int t = 0; t < spec.trials; ++t)
        jobs.push_back({c, v, t});
  return jobs;
}

std::uint64_t trial_seed(const SweepSpec &spec, int trial) {
  return spec.base_seed + std::uint64_t(trial);
}

SweepRow run_job(const SweepSpec &spec, const SweepJob &job) {
  const SweepCase &c = spec.cases.at(job.case_index);
  const double value = spec.values.at(job.value_index);
  Scenario s = scenario_at(spec, c, value);
  s.seed = trial_seed(spec, job.trial);
  const ChannelSet cs = generate_channels(s, s.seed);
  const RunResult r = run(s, cs);
  return {c, value, job.trial, s.seed, r.sum_rate, r.iterations, r.wall_ms};
}

int default_workers() {
  if (const char *env = std::getenv("BDRIS_WORKERS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return int(v);
  }
  return int(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<SweepRow> run_sweep(const SweepSpec &spec, int workers) {
  const auto jobs = sweep_jobs(spec);
  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load())
        return;
      try {
        rows[i] = run_job(spec, jobs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error)
          error = std::current_exception();
        failed = true;
      }
    }
  };

  const int n = std::clamp(workers, 1, int(std::max<std::size_t>(1, jobs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }
  if (error)
    std::rethrow_exception(error);
  return rows;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  std::replace(s.begin(), s.end(), ',', '.');
  return s;
}

void write_sweep_csv(std::ostream &out, const SweepSpec &spec,
                     const std::vector<SweepRow> &rows, bool timing) {
  out << kSweepCsvHeader << '\n';
  for (const auto &r : rows) {
    out << to_string(r.c.mode) << ',' << case_arch(r.c) << ','
        << to_string(spec.var) << ',' << format_number(r.value) << ','
        << r.trial << ',' << r.seed << ',' << format_number(r.sum_rate) << ','
        << r.iterations << ',' << format_number(timing ? r.wall_ms : 0.0)
        << '\n';
  }
}

void write_trace_csv(std::ostream &out, const std::vector<TracePoint> &trace) {
  out << "iter,f_o,power_used,constraint_residual\n";
  for (const auto &p : trace)
    out << p.iter << ',' << format_number(p.f_o) << ','
        << format_number(p.power_used) << ','
        << format_number(p.constraint_residual) << '\n';
}

std::uint64_t scenario_hash(const SweepSpec &spec) {
  const Scenario &s = spec.base;
  std::ostringstream text;
  auto num = [&](const char *key, double v) {
    text << key << '=' << format_number(v) << ';';
  };
  num("N", s.bs_antennas);
  num("K_r", s.reflective_users);
  num("K_t", s.transmissive_users);
  num("M", s.cells);
  text << "mode=" << to_string(s.mode) << ";arch=" << to_string(s.arch)
       << ";G=" << s.arch.groups << ';';
  num("P", s.power_watts);
  num("noise", s.noise_watts);
  num("d_bi", s.geometry.d_bi);
  num("d_iu", s.geometry.d_iu);
  num("d0", s.geometry.d0);
  num("aod", s.geometry.bs_aod_deg);
  num("aoa", s.geometry.ris_aoa_deg);
  num("zeta0", s.pathloss.zeta0_db);
  num("eps_bi", s.pathloss.exponent_bi);
  num("eps_iu", s.pathloss.exponent_iu);
  num("fading", int(s.fading.kind));
  num("kappa_bi", s.fading.kappa_bi);
  num("kappa_iu", s.fading.kappa_iu);
  num("max_outer", s.max_outer);
  num("rel_tol", s.rel_tol);
  num("single_solver", int(s.single_solver));
  num("projection", int(s.projection));
  text << "var=" << to_string(spec.var) << ";values=";
  for (double v : spec.values)
    text << format_number(v) << ',';
  text << ";trials=" << spec.trials << ";base_seed=" << spec.base_seed
       << ";cases=";
  for (const auto &c : spec.cases)
    text << to_string(c.mode) << ':' << to_string(c.arch) << ':'
         << c.arch.groups << ',';

  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<CaseSummary> summarize(const SweepSpec &spec,
                                   const std::vector<SweepRow> &rows) {
  std::vector<CaseSummary> out;
  for (const auto &c : spec.cases)
    for (double v : spec.values) {
      CaseSummary s{c, v, {}, 0.0, 0.0};
      for (const auto &r : rows)
        if (r.c == c && r.value == v)
          s.rates.push_back(r.sum_rate);
      const double n = double(s.rates.size());
      if (n > 0) {
        for (double x : s.rates)
          s.mean += x;
        s.mean /= n;
      }
      if (n > 1) {
        double ss = 0.0;
        for (double x : s.rates)
          ss += (x - s.mean) * (x - s.mean);
        s.std_error = std::sqrt(ss / (n - 1)) / std::sqrt(n);
      }
      out.push_back(std::move(s));
    }
  return out;
}

std::string run_record_json(const SweepSpec &spec,
                            const std::vector<CaseSummary> &summaries,
                            const std::vector<std::string> &artifacts) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, scenario_hash(spec));
  nlohmann::json j;
  j["scenario_hash"] = hash;
  j["swept_var"] = std::string(to_string(spec.var));
  j["trials"] = spec.trials;
  j["base_seed"] = spec.base_seed;
  j["points"] = nlohmann::json::array();
  for (const auto &s : summaries)
    j["points"].push_back({{"mode", std::string(to_string(s.c.mode))},
                           {"arch", case_arch(s.c)},
                           {"value", s.value},
                           {"sum_rates", s.rates},
                           {"mean", s.mean},
                           {"std_error", s.std_error}});
  j["artifacts"] = artifacts;
  return j.dump(2);
}

} // namespace bdris
