#include "bdris/precoder.hpp"

#include <cmath>
#include <stdexcept>

namespace bdris {

namespace {

constexpr int kMaxBisection = 200;
constexpr int kMaxDoubling = 2000;

// Eigen-coordinates of the Gram matrix shared by every lambda.
struct GramSpectrum {
  RealVector eigenvalues;
  ComplexMatrix basis;  // eigenvectors
  ComplexMatrix coeffs; // basis^H * B, B = hbar * diag(sqrt(1 + iota))
  double floor = 0.0;   // eigenvalues at or below this span the null space

  GramSpectrum(const ComplexMatrix &hbar, const RealVector &iota) {
    if (iota.size() != hbar.cols())
      throw std::invalid_argument("update_precoder: iota size mismatch");
    const ComplexMatrix gram = hbar * hbar.adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram);
    eigenvalues = eig.eigenvalues();
    basis = eig.eigenvectors();
    ComplexMatrix b = hbar;
    for (Index k = 0; k < b.cols(); ++k)
      b.col(k) *= std::sqrt(1.0 + iota(k));
    coeffs = basis.adjoint() * b;
    floor = 1e-12 * std::max(eigenvalues.maxCoeff(), 0.0);
  }

  // Components on the numerical null space are exactly zero in theory (the
  // right-hand side lies in the range of the Gram matrix); they are dropped
  // when lambda = 0.
  RealVector gains(double lambda) const {
    RealVector s(eigenvalues.size());
    for (Index i = 0; i < s.size(); ++i) {
      const double ev = std::max(eigenvalues(i), 0.0);
      s(i) = (lambda == 0.0 && ev <= floor) ? 0.0 : 1.0 / (ev + lambda);
    }
    return s;
  }

  double power(double lambda) const {
    const RealVector s = gains(lambda);
    double total = 0.0;
    for (Index i = 0; i < coeffs.rows(); ++i)
      total += s(i) * s(i) * coeffs.row(i).squaredNorm();
    return total;
  }

  ComplexMatrix precoder(double lambda) const {
    const RealVector s = gains(lambda);
    return basis * (s.cast<Complex>().asDiagonal() * coeffs);
  }
};

} // namespace

double precoder_power(const ComplexMatrix &hbar, const RealVector &iota,
                      double lambda) {
  return GramSpectrum(hbar, iota).power(lambda);
}

PrecoderSolution update_precoder(const ComplexMatrix &hbar,
                                 const RealVector &iota, double power) {
  if (!(power > 0))
    throw std::invalid_argument("update_precoder: power must be positive");

  PrecoderSolution sol;
  if (hbar.isZero(0.0)) {
    sol.w = ComplexMatrix::Zero(hbar.rows(), hbar.cols());
    return sol;
  }

  const GramSpectrum spec(hbar, iota);
  if (spec.power(0.0) <= power) {
    sol.w = spec.precoder(0.0);
    sol.power_used = sol.w.squaredNorm();
    return sol;
  }

  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < kMaxDoubling && spec.power(hi) >= power; ++i) {
    lo = hi;
    hi *= 2.0;
  }

  // Keep the upper end feasible; stop once the budget is met to 1e-12 or the
  // bracket no longer shrinks in floating point.
  double p_hi = spec.power(hi);
  for (int i = 0; i < kMaxBisection; ++i) {
    if (power - p_hi <= 1e-12 * power)
      break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    const double p_mid = spec.power(mid);
    if (p_mid > power) {
      lo = mid;
    } else {
      hi = mid;
      p_hi = p_mid;
    }
    ++sol.bisection_steps;
  }

  sol.lambda = hi;
  sol.w = spec.precoder(hi);
  sol.power_used = sol.w.squaredNorm();
  if (sol.power_used > power) {
    // Rounding in the reconstruction; rescale onto the budget.
    sol.w *= std::sqrt(power / sol.power_used);
    sol.power_used = sol.w.squaredNorm();
  }
  return sol;
}

ComplexMatrix mmse_initial_precoder(const ChannelSet &cs,
                                    const BdRisState &state, double noise,
                                    double power) {
  const ComplexMatrix e = effective_channels(state, cs);
  ComplexMatrix w = regularized_hermitian_solve(e * e.adjoint(), noise, e);
  const double norm = w.norm();
  if (!(norm > 0))
    throw std::invalid_argument("mmse_initial_precoder: all effective "
                                "channels are zero");
  return (std::sqrt(power) / norm) * w;
}

} // namespace bdris
