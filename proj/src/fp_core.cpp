#include "bdris/fp_core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bdris {

namespace {

void check(const LinkContext &ctx) {
  if (ctx.heff.cols() != ctx.w.cols() || ctx.heff.rows() != ctx.w.rows() ||
      ctx.noise.size() != ctx.heff.cols())
    throw std::invalid_argument("LinkContext: inconsistent dimensions");
}

// sum_p |C(k, p)|^2
RealVector received_power(const ComplexMatrix &c) {
  return c.cwiseAbs2().rowwise().sum();
}

} // namespace

ComplexMatrix cross_gains(const LinkContext &ctx) {
  check(ctx);
  return ctx.heff.adjoint() * ctx.w;
}

double sinr(int user, const LinkContext &ctx) {
  check(ctx);
  const ComplexVector c = ctx.w.adjoint() * ctx.heff.col(user);
  const double signal = std::norm(c(user));
  const double interference = c.squaredNorm() - signal;
  return signal / (std::max(interference, 0.0) + ctx.noise(user));
}

RealVector sinrs(const LinkContext &ctx) {
  const ComplexMatrix c = cross_gains(ctx);
  RealVector out(ctx.users());
  for (int k = 0; k < ctx.users(); ++k) {
    const double signal = std::norm(c(k, k));
    double interference = 0.0;
    for (int p = 0; p < ctx.users(); ++p)
      if (p != k)
        interference += std::norm(c(k, p));
    out(k) = signal / (interference + ctx.noise(k));
  }
  return out;
}

double sum_rate(const LinkContext &ctx) {
  const RealVector g = sinrs(ctx);
  double total = 0.0;
  for (int k = 0; k < g.size(); ++k)
    total += std::log2(1.0 + g(k));
  return total;
}

double f_iota(const LinkContext &ctx, const RealVector &iota) {
  const ComplexMatrix c = cross_gains(ctx);
  const RealVector rx = received_power(c);
  double total = 0.0;
  for (int k = 0; k < ctx.users(); ++k) {
    const double ratio = std::norm(c(k, k)) / (rx(k) + ctx.noise(k));
    total += std::log2(1.0 + iota(k)) +
             (-iota(k) + (1.0 + iota(k)) * ratio) / std::numbers::ln2;
  }
  return total;
}

double f_tau(const LinkContext &ctx, const Auxiliaries &aux, NoiseTerm noise) {
  const ComplexMatrix c = cross_gains(ctx);
  const RealVector rx = received_power(c);
  const double noise_copies =
      noise == NoiseTerm::kOnce ? 1.0 : double(ctx.users());
  double total = 0.0;
  for (int k = 0; k < ctx.users(); ++k) {
    const double root = std::sqrt(1.0 + aux.iota(k));
    const double linear =
        2.0 * root * (std::conj(aux.tau(k)) * c(k, k)).real();
    const double penalty =
        std::norm(aux.tau(k)) * (rx(k) + noise_copies * ctx.noise(k));
    total += std::log2(1.0 + aux.iota(k)) +
             (-aux.iota(k) + linear - penalty) / std::numbers::ln2;
  }
  return total;
}

RealVector update_iota(const LinkContext &ctx) { return sinrs(ctx); }

ComplexVector update_tau(const LinkContext &ctx, const RealVector &iota) {
  const ComplexMatrix c = cross_gains(ctx);
  const RealVector rx = received_power(c);
  ComplexVector tau(ctx.users());
  for (int k = 0; k < ctx.users(); ++k)
    tau(k) = std::sqrt(1.0 + iota(k)) * c(k, k) / (rx(k) + ctx.noise(k));
  return tau;
}

} // namespace bdris
