#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bdris {

/// Which side(s) of the surface are served.
enum class Mode { kReflective, kTransmissive, kHybrid };

/// Inter-cell circuit topology.
enum class ArchKind { kSingle, kGroup, kFull };

/// Architecture with its group count. Every architecture is a uniform
/// grouping of the M cells: single = M groups of 1, full = 1 group of M.
struct Architecture {
  ArchKind kind = ArchKind::kSingle;
  int groups = 0; // only read for kGroup

  static Architecture single() { return {ArchKind::kSingle, 0}; }
  static Architecture group(int g) { return {ArchKind::kGroup, g}; }
  static Architecture full() { return {ArchKind::kFull, 0}; }

  int group_count(int cells) const;
  int group_size(int cells) const { return cells / group_count(cells); }

  friend bool operator==(const Architecture &, const Architecture &) = default;
};

/// Side of the surface a user sits on. Reflective users share the side of
/// the base station.
enum class Side : std::uint8_t { kReflective = 0, kTransmissive = 1 };

enum class FadingKind { kRayleigh, kRician };

struct FadingSpec {
  FadingKind kind = FadingKind::kRayleigh;
  double kappa_bi = 0.0; // linear Rician factor, BS-RIS
  double kappa_iu = 0.0; // linear Rician factor, RIS-user
};

struct PathlossSpec {
  double zeta0_db = -30.0;
  double exponent_bi = 2.2;
  double exponent_iu = 2.2;
};

/// Placement: the BS sits at d_bi on the reflective side, users at d_iu on
/// their own side with per-trial random azimuths.
struct Geometry {
  double d_bi = 50.0;
  double d_iu = 2.5;
  double d0 = 1.0;
  double bs_aod_deg = 0.0;   // departure angle at the BS array
  double ris_aoa_deg = 30.0; // arrival angle at the RIS array
};

/// Solver used for the single-connected architecture.
enum class SingleSolver { kClosedForm, kManifold };

/// Tangent-space projection used by the manifold conjugate gradient.
enum class TangentProjection { kOrthogonal, kDiagonal };

struct Scenario {
  int bs_antennas = 4;
  int reflective_users = 2;
  int transmissive_users = 2;
  int cells = 16;
  Mode mode = Mode::kHybrid;
  Architecture arch = Architecture::single();
  double power_watts = 1e-3 * 3.1622776601683795; // 5 dBm
  double noise_watts = 1e-11;                     // -80 dBm
  Geometry geometry;
  FadingSpec fading;
  PathlossSpec pathloss;
  std::uint64_t seed = 1;
  int max_outer = 500;
  double rel_tol = 1e-4;
  SingleSolver single_solver = SingleSolver::kClosedForm;
  TangentProjection projection = TangentProjection::kOrthogonal;

  int users() const { return reflective_users + transmissive_users; }
  /// Reflective users first, then transmissive.
  std::vector<Side> user_sides() const;
};

/// Invalid scenario field; `field()` names the offending key.
class ScenarioError : public std::invalid_argument {
public:
  ScenarioError(std::string field, const std::string &message)
      : std::invalid_argument(field + ": " + message),
        field_(std::move(field)) {}
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

void validate_scenario(const Scenario &s);

double db_to_linear(double db);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

std::string_view to_string(Mode m);
std::string_view to_string(ArchKind a);
std::string to_string(const Architecture &a);
std::string_view to_string(Side s);
Mode parse_mode(std::string_view text);
Architecture parse_architecture(std::string_view text, int groups);

/// Whether a user on `side` is served by a surface in mode `m`.
bool serves(Mode m, Side side);

} // namespace bdris
