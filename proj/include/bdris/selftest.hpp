#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdris/fp_core.hpp"
#include "bdris/manifold_solver.hpp"
#include "bdris/rng.hpp"

namespace bdris {

struct SuiteResult {
  std::string name;
  double max_error = 0.0;
  double threshold = 0.0;
  bool passed = false;
  int samples = 0;
};

struct SelftestOptions {
  std::uint64_t seed = 20240611;
  /// Negative control: flips the sign of the analytic gradient.
  bool flip_gradient_sign = false;
};

/// Random point with orthonormal columns (QR of a Gaussian matrix).
ComplexMatrix random_stiefel(GaussianSource &src, int rows, int cols);
ComplexMatrix random_gaussian(GaussianSource &src, int rows, int cols);
/// G^H G + eps I style Hermitian positive definite matrix.
ComplexMatrix random_hermitian_psd(GaussianSource &src, int size);

/// Group problem with random PSD Y, Z and random X~.
GroupProblem random_group_problem(GaussianSource &src, int group_size,
                                  Mode mode);

/// Random effective channels, precoders and noise powers.
LinkContext random_link_context(GaussianSource &src, int antennas, int users);

/// Central differences (step 1e-6) of f~_g along tangent directions against
/// Re<grad, T>; error is |fd - analytic| / max(|fd|, |analytic|).
SuiteResult gradient_suite(const SelftestOptions &opts, int problems = 20,
                           int directions = 10);

/// ||R^H R - I||_F after retraction along random tangent directions with
/// delta in [0, 10].
SuiteResult retraction_suite(const SelftestOptions &opts, int triples = 1000);

/// Amplitude objective: convex in alpha (second differences on a 1e-3 grid
/// >= -1e-9), unimodal in x = sqrt(alpha), and golden-section within 1e-4 of
/// a 1e-6 grid search.
SuiteResult convexity_suite(const SelftestOptions &opts, int triples = 1000);

/// |f_tau - f_o| / max(1, f_o) after the iota and tau updates.
SuiteResult tightness_suite(const SelftestOptions &opts, int contexts = 100);

std::vector<SuiteResult> run_selftest(const SelftestOptions &opts);

/// Minimizer of f over lo, lo + step, ..., hi.
template <typename F> double grid_argmin(F &&f, double lo, double hi, double step) {
  double best_x = lo;
  double best = f(lo);
  const long n = long((hi - lo) / step);
  for (long i = 1; i <= n; ++i) {
    const double x = lo + double(i) * step;
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

} // namespace bdris
