#pragma once

#include <stdexcept>
#include <vector>

#include "bdris/channel.hpp"
#include "bdris/numerics.hpp"
#include "bdris/ris_model.hpp"
#include "bdris/scenario.hpp"

namespace bdris {

struct TracePoint {
  int iter = 0;
  double f_o = 0.0;        // sum-rate, bits/s/Hz
  double power_used = 0.0; // ||W||_F^2, watts
  double constraint_residual = 0.0;
};

struct RunResult {
  double sum_rate = 0.0;
  std::vector<TracePoint> trace; // entry 0 is the initial point
  ComplexMatrix w;               // N x K, zero columns for unserved users
  BdRisState state;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0.0;
};

/// Raised when the objective or an iterate stops being finite.
class NumericFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Initialization {
  BdRisState state;
  ComplexMatrix w; // N x (served users)
};

/// Indices of the users served by `mode`, in channel order.
std::vector<int> served_users(Mode mode, const std::vector<Side> &sides);

/// Diagonal pair with |phi| = 1/sqrt(2) and seeded uniform phases (pure modes
/// projected to unit modulus on the active side), plus the MMSE precoder of
/// the served users at full power.
Initialization initialize(const Scenario &s, const ChannelSet &cs);

/// Alternating iota -> tau -> W -> Phi updates until the relative change of the
/// sum-rate drops below s.rel_tol or s.max_outer iterations pass. `start`
/// replaces initialize() when given; its state may use any architecture that
/// nests inside s.arch.
RunResult run(const Scenario &s, const ChannelSet &cs,
              const Initialization *start = nullptr);

/// Sum-rate of (W, state) recomputed from the channels.
double evaluate(const ComplexMatrix &w, const BdRisState &state,
                const ChannelSet &cs, double noise);

} // namespace bdris
