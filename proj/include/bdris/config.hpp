#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdris/scenario.hpp"

namespace bdris {

/// Problem with a config file; `field()` is "section.key" when one key is at
/// fault.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string &message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

enum class SweptVar { kPowerDbm, kCells, kTransmissiveUsers, kReflectiveUsers };

std::string_view to_string(SweptVar v);
SweptVar parse_swept_var(std::string_view text);

struct SweepCase {
  Mode mode = Mode::kHybrid;
  Architecture arch = Architecture::single();
  friend bool operator==(const SweepCase &, const SweepCase &) = default;
};

struct SweepSpec {
  Scenario base;
  SweptVar var = SweptVar::kPowerDbm;
  std::vector<double> values;
  int trials = 1;
  std::uint64_t base_seed = 1;
  std::vector<SweepCase> cases;
};

struct ExperimentConfig {
  Scenario scenario;
  std::optional<SweepSpec> sweep; // present when the file has [sweep]
};

/// Sectioned key = value text:
///
///   [scenario]  N K_r K_t M mode arch G P_dbm noise_dbm d_bi d_iu d0
///               zeta0_db exponent_bi exponent_iu fading kappa_db
///               bs_aod_deg ris_aoa_deg seed max_outer rel_tol
///               single_solver projection
///   [sweep]     var values trials base_seed cases
///
/// Every key is optional; unknown sections or keys are errors. `cases` is a
/// comma-separated list of mode:arch pairs (e.g. "hybrid:full, hybrid:group").
ExperimentConfig parse_config(std::istream &in);
ExperimentConfig load_config(const std::filesystem::path &path);

/// Scenario for one sweep point, with the swept variable applied and
/// validated (ScenarioError on failure).
Scenario scenario_at(const SweepSpec &spec, const SweepCase &c, double value);

} // namespace bdris
