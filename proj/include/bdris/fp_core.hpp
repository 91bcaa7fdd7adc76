#pragma once

#include <vector>

#include "bdris/numerics.hpp"

namespace bdris {

/// Precoder, effective channels and noise powers of the served users.
struct LinkContext {
  ComplexMatrix heff; // N x K, column k = h~_k
  ComplexMatrix w;    // N x K, column k = w_k
  RealVector noise;   // K noise powers (watts)

  int users() const { return int(heff.cols()); }
};

/// Lagrangian-dual (iota) and quadratic-transform (tau) auxiliaries.
struct Auxiliaries {
  RealVector iota;
  ComplexVector tau;
};

/// How the noise enters the quadratic-transform penalty. kOnce is the
/// standard transform (tight at the closed-form tau); kPerInterferer keeps the
/// noise inside the sum over p, adding (K-1)|tau_k|^2 sigma_k^2 per user.
enum class NoiseTerm { kOnce, kPerInterferer };

/// C(k, p) = h~_k^H w_p.
ComplexMatrix cross_gains(const LinkContext &ctx);

double sinr(int user, const LinkContext &ctx);
RealVector sinrs(const LinkContext &ctx);

/// Sum of log2(1 + SINR) in bits/s/Hz.
double sum_rate(const LinkContext &ctx);

/// Lagrangian-dual surrogate, in bits.
double f_iota(const LinkContext &ctx, const RealVector &iota);

/// Quadratic-transform surrogate, in bits.
double f_tau(const LinkContext &ctx, const Auxiliaries &aux,
             NoiseTerm noise = NoiseTerm::kOnce);

/// iota_k = SINR_k.
RealVector update_iota(const LinkContext &ctx);

/// tau_k = sqrt(1 + iota_k) h~_k^H w_k / (sum_p |h~_k^H w_p|^2 + sigma_k^2).
ComplexVector update_tau(const LinkContext &ctx, const RealVector &iota);

} // namespace bdris
