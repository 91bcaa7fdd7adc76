#pragma once

#include "bdris/channel.hpp"
#include "bdris/numerics.hpp"
#include "bdris/ris_model.hpp"

namespace bdris {

struct PrecoderSolution {
  ComplexMatrix w;         // N x K
  double lambda = 0.0;     // power multiplier
  double power_used = 0.0; // ||W||_F^2
  int bisection_steps = 0;
};

/// Maximizer of sum_k 2 sqrt(1+iota_k) Re{hbar_k^H w_k} - w_k^H A w_k with
/// A = sum_p hbar_p hbar_p^H subject to ||W||_F^2 <= P.
///
/// w_k = (A + lambda I)^{-1} sqrt(1 + iota_k) hbar_k. lambda = 0 when the
/// unconstrained maximizer fits the budget; otherwise lambda is bracketed by
/// doubling from 1 and bisected until the budget is met from below.
/// `hbar` holds hbar_k = tau_k h~_k in its columns.
PrecoderSolution update_precoder(const ComplexMatrix &hbar,
                                 const RealVector &iota, double power);

/// ||W(lambda)||_F^2 for the same problem; strictly decreasing in lambda.
double precoder_power(const ComplexMatrix &hbar, const RealVector &iota,
                      double lambda);

/// Regularized MMSE precoder for the served users of `cs`, scaled to
/// ||W||_F^2 = P.
ComplexMatrix mmse_initial_precoder(const ChannelSet &cs,
                                    const BdRisState &state, double noise,
                                    double power);

} // namespace bdris
