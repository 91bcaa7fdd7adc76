#pragma once

#include <string>

#include "bdris/channel.hpp"
#include "bdris/numerics.hpp"
#include "bdris/scenario.hpp"

namespace bdris {

/// Transmissive/reflective scattering pair with its mode and architecture.
struct BdRisState {
  Mode mode = Mode::kHybrid;
  Architecture arch = Architecture::single();
  ComplexMatrix phi_t; // M x M
  ComplexMatrix phi_r; // M x M

  int cells() const { return int(phi_t.rows()); }
  const ComplexMatrix &phi(Side s) const {
    return s == Side::kReflective ? phi_r : phi_t;
  }
  ComplexMatrix &phi(Side s) { return s == Side::kReflective ? phi_r : phi_t; }
};

struct ValidationResult {
  bool ok = true;
  double residual = 0.0; // max over groups of the unitarity residual
  std::string diagnostic;

  explicit operator bool() const { return ok; }
};

inline constexpr double kConstraintTolerance = 1e-8;

/// Table-1 check for (mode, arch): exact structural zeros plus, per group,
/// ||Phi_r,g^H Phi_r,g + Phi_t,g^H Phi_t,g - I||_F <= tol.
ValidationResult validate(const BdRisState &state,
                          double tol = kConstraintTolerance);

/// Max over groups of the unitarity residual, ignoring structure.
double constraint_residual(const BdRisState &state);

/// h~_k = (h_k^H Phi_i G)^H with Phi_i picked by the side of user k.
ComplexVector effective_channel(const BdRisState &state, const ChannelSet &cs,
                                int user);

/// N x K matrix whose columns are the effective channels.
ComplexMatrix effective_channels(const BdRisState &state, const ChannelSet &cs);

/// [Phi_r; Phi_t] has orthonormal columns within tol.
bool validate_lossless_partition(const ComplexMatrix &phi_r,
                                 const ComplexMatrix &phi_t,
                                 double tol = kConstraintTolerance);

class DegenerateInputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Mask to the architecture's block pattern, zero the inactive matrix for
/// pure modes, then map each group's stacked block to its polar factor so the
/// unitarity constraint holds.
BdRisState project_to_case(const ComplexMatrix &phi_t,
                           const ComplexMatrix &phi_r, Mode mode,
                           Architecture arch);

/// Index range of group g (cells [g*size, (g+1)*size)).
IndexRange group_range(int group, int group_size);

} // namespace bdris
