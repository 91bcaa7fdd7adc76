#include "bdris/scenario.hpp"

#include <cmath>

namespace bdris {

int Architecture::group_count(int cells) const {
  switch (kind) {
  case ArchKind::kSingle:
    return cells;
  case ArchKind::kGroup:
    return groups;
  case ArchKind::kFull:
    return 1;
  }
  return 1;
}

std::vector<Side> Scenario::user_sides() const {
  std::vector<Side> sides(users(), Side::kTransmissive);
  for (int k = 0; k < reflective_users; ++k)
    sides[k] = Side::kReflective;
  return sides;
}

void validate_scenario(const Scenario &s) {
  if (s.bs_antennas < 1)
    throw ScenarioError("N", "must be at least 1");
  if (s.reflective_users < 0)
    throw ScenarioError("K_r", "must be non-negative");
  if (s.transmissive_users < 0)
    throw ScenarioError("K_t", "must be non-negative");
  if (s.users() < 1)
    throw ScenarioError("K_r", "K_r + K_t must be at least 1");
  if (s.cells < 1)
    throw ScenarioError("M", "must be at least 1");
  if (s.arch.kind == ArchKind::kGroup) {
    if (s.arch.groups < 1)
      throw ScenarioError("G", "must be at least 1");
    if (s.cells % s.arch.groups != 0)
      throw ScenarioError("G", "group count " + std::to_string(s.arch.groups) +
                                   " does not divide M = " +
                                   std::to_string(s.cells));
  }
  if (!(s.power_watts > 0) || !std::isfinite(s.power_watts))
    throw ScenarioError("P_dbm", "transmit power must be positive and finite");
  if (!(s.noise_watts > 0) || !std::isfinite(s.noise_watts))
    throw ScenarioError("noise_dbm", "noise power must be positive");
  if (!(s.geometry.d_bi > 0))
    throw ScenarioError("d_bi", "distance must be positive");
  if (!(s.geometry.d_iu > 0))
    throw ScenarioError("d_iu", "distance must be positive");
  if (!(s.geometry.d0 > 0))
    throw ScenarioError("d0", "distance must be positive");
  if (s.fading.kappa_bi < 0 || s.fading.kappa_iu < 0)
    throw ScenarioError("kappa_db", "Rician factor must be non-negative");
  if (s.max_outer < 1)
    throw ScenarioError("max_outer", "must be at least 1");
  if (!(s.rel_tol > 0))
    throw ScenarioError("rel_tol", "must be positive");
  const int served = (s.mode == Mode::kReflective)     ? s.reflective_users
                     : (s.mode == Mode::kTransmissive) ? s.transmissive_users
                                                       : s.users();
  if (served < 1)
    throw ScenarioError("mode", "no users on the served side");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return 1e-3 * db_to_linear(dbm); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

std::string_view to_string(Mode m) {
  switch (m) {
  case Mode::kReflective:
    return "reflective";
  case Mode::kTransmissive:
    return "transmissive";
  case Mode::kHybrid:
    return "hybrid";
  }
  return "?";
}

std::string_view to_string(ArchKind a) {
  switch (a) {
  case ArchKind::kSingle:
    return "single";
  case ArchKind::kGroup:
    return "group";
  case ArchKind::kFull:
    return "full";
  }
  return "?";
}

std::string to_string(const Architecture &a) {
  return std::string(to_string(a.kind));
}

std::string_view to_string(Side s) {
  return s == Side::kReflective ? "reflective" : "transmissive";
}

Mode parse_mode(std::string_view text) {
  if (text == "reflective")
    return Mode::kReflective;
  if (text == "transmissive")
    return Mode::kTransmissive;
  if (text == "hybrid")
    return Mode::kHybrid;
  throw ScenarioError("mode", "unknown mode '" + std::string(text) + "'");
}

Architecture parse_architecture(std::string_view text, int groups) {
  if (text == "single")
    return Architecture::single();
  if (text == "group")
    return Architecture::group(groups);
  if (text == "full")
    return Architecture::full();
  throw ScenarioError("arch",
                      "unknown architecture '" + std::string(text) + "'");
}

bool serves(Mode m, Side side) {
  switch (m) {
  case Mode::kReflective:
    return side == Side::kReflective;
  case Mode::kTransmissive:
    return side == Side::kTransmissive;
  case Mode::kHybrid:
    return true;
  }
  return false;
}

} // namespace bdris
