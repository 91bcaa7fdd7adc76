#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "bdris/numerics.hpp"
#include "bdris/scenario.hpp"

namespace bdris {

/// One channel realization. Only the sector-1 BS-RIS channel exists and each
/// user only sees the sector facing it.
struct ChannelSet {
  ComplexMatrix g;                // M x N, BS -> RIS
  std::vector<ComplexVector> h;   // K vectors of length M, RIS -> user
  std::vector<Side> sides;        // reflective users first
  std::uint64_t seed = 0;

  int cells() const { return int(g.rows()); }
  int bs_antennas() const { return int(g.cols()); }
  int users() const { return int(h.size()); }

  friend bool operator==(const ChannelSet &a, const ChannelSet &b);
};

/// Large-scale gain zeta0 * (d / d0)^(-exponent), zeta0 given in dB.
double pathloss(double d, double d0, double zeta0_db, double exponent);

/// Half-wavelength ULA response exp(j pi n sin(angle)), n = 0..size-1.
ComplexVector ula_steering(int size, double angle_rad);

/// Rank-one LoS component of the BS-RIS link for the scenario geometry.
ComplexMatrix bs_ris_los(const Scenario &s);

/// Azimuth of user k (radians, within its own half-space) for a seed.
double user_azimuth(const Scenario &s, std::uint64_t seed, int user);

/// Deterministic in (scenario, seed). Sub-streams are keyed per link and per
/// (side, index-within-side) so adding users leaves existing links intact.
ChannelSet generate_channels(const Scenario &s, std::uint64_t seed);

/// Restriction to the listed users, order preserved.
ChannelSet channel_subset(const ChannelSet &cs, std::span<const int> users);

class ChannelFileError : public std::runtime_error {
public:
  enum class Kind { kIo, kMalformed };
  ChannelFileError(Kind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Binary layout (little-endian):
///   magic "BDRISCHN" | u32 version | u32 M | u32 N | u32 K | u64 seed |
///   K x u8 side | M*N x (f64 re, f64 im) row-major G | K*M x (f64, f64) h
void save_channels(const ChannelSet &cs, const std::filesystem::path &path);
ChannelSet load_channels(const std::filesystem::path &path);

} // namespace bdris
