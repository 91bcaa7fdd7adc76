#include "bdris/selftest.hpp"

#include <algorithm>
#include <cmath>

#include "bdris/sc_solver.hpp"

namespace bdris {

namespace {

constexpr double kFdStep = 1e-6;

SuiteResult finish(std::string name, double max_error, double threshold,
                   int samples) {
  return {std::move(name), max_error, threshold,
          std::isfinite(max_error) && max_error < threshold, samples};
}

int random_int(GaussianSource &src, int lo, int hi) {
  return lo + std::min(hi - lo, int(src.uniform() * (hi - lo + 1)));
}

Mode random_mode(GaussianSource &src) {
  const int i = random_int(src, 0, 2);
  return i == 0 ? Mode::kReflective
                : (i == 1 ? Mode::kTransmissive : Mode::kHybrid);
}

} // namespace

ComplexMatrix random_gaussian(GaussianSource &src, int rows, int cols) {
  ComplexMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      a(i, j) = Complex(src.normal(), src.normal()) * kInvSqrt2;
  return a;
}

ComplexMatrix random_stiefel(GaussianSource &src, int rows, int cols) {
  const ComplexMatrix a = random_gaussian(src, rows, cols);
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  return qr.householderQ() * ComplexMatrix::Identity(rows, cols);
}

ComplexMatrix random_hermitian_psd(GaussianSource &src, int size) {
  const ComplexMatrix a = random_gaussian(src, size, size);
  ComplexMatrix h = a * a.adjoint() / double(size);
  return 0.5 * (h + h.adjoint());
}

GroupProblem random_group_problem(GaussianSource &src, int group_size,
                                  Mode mode) {
  GroupProblem gp;
  gp.group_size = group_size;
  gp.sides = active_sides(mode);
  const int rows = gp.stacked_rows();
  gp.y = random_hermitian_psd(src, group_size);
  gp.z = ComplexMatrix::Zero(rows, rows);
  for (int i = 0; i < int(gp.sides.size()); ++i)
    gp.z.block(i * group_size, i * group_size, group_size, group_size) =
        random_hermitian_psd(src, group_size);
  gp.x_tilde = random_gaussian(src, group_size, rows);
  return gp;
}

LinkContext random_link_context(GaussianSource &src, int antennas, int users) {
  LinkContext ctx;
  ctx.heff = random_gaussian(src, antennas, users);
  ctx.w = random_gaussian(src, antennas, users);
  ctx.noise = RealVector(users);
  for (int k = 0; k < users; ++k)
    ctx.noise(k) = 0.05 + src.uniform();
  return ctx;
}

SuiteResult gradient_suite(const SelftestOptions &opts, int problems,
                           int directions) {
  GaussianSource src(make_engine(opts.seed, {1}));
  double worst = 0.0;
  int samples = 0;
  for (int p = 0; p < problems; ++p) {
    const GroupProblem gp =
        random_group_problem(src, random_int(src, 1, 4), random_mode(src));
    const ComplexMatrix phi = random_stiefel(src, gp.stacked_rows(), gp.group_size);
    ComplexMatrix grad = euclidean_gradient(gp, phi);
    if (opts.flip_gradient_sign)
      grad = -grad;
    for (int d = 0; d < directions; ++d) {
      ComplexMatrix t = project_tangent(
          phi, random_gaussian(src, gp.stacked_rows(), gp.group_size),
          TangentProjection::kOrthogonal);
      t /= t.norm();
      const double fd = (objective_f_g(gp, phi + kFdStep * t) -
                         objective_f_g(gp, phi - kFdStep * t)) /
                        (2.0 * kFdStep);
      const double analytic = real_inner(grad, t);
      const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-300});
      worst = std::max(worst, std::abs(fd - analytic) / scale);
      ++samples;
    }
  }
  return finish("gradient", worst, 1e-5, samples);
}

SuiteResult retraction_suite(const SelftestOptions &opts, int triples) {
  GaussianSource src(make_engine(opts.seed, {2}));
  double worst = 0.0;
  for (int i = 0; i < triples; ++i) {
    const int cols = random_int(src, 1, 8);
    const int rows = cols * random_int(src, 1, 2);
    const ComplexMatrix phi = random_stiefel(src, rows, cols);
    const ComplexMatrix xi = project_tangent(
        phi, random_gaussian(src, rows, cols), TangentProjection::kOrthogonal);
    const double delta = 10.0 * src.uniform();
    const ComplexMatrix identity = ComplexMatrix::Identity(cols, cols);
    const ComplexMatrix polar = retract(phi, xi, delta);
    const ComplexMatrix curve = RetractionCurve(phi, xi, true).at(delta);
    worst = std::max(worst, (polar.adjoint() * polar - identity).norm());
    worst = std::max(worst, (curve.adjoint() * curve - identity).norm());
  }
  return finish("retraction", worst, 1e-10, triples);
}

SuiteResult convexity_suite(const SelftestOptions &opts, int triples) {
  GaussianSource src(make_engine(opts.seed, {3}));
  double worst = 0.0;
  for (int i = 0; i < triples; ++i) {
    const double upsilon = 4.0 * src.uniform() - 2.0;
    const double ct = 2.0 * src.uniform();
    const double cr = 2.0 * src.uniform();
    auto in_alpha = [&](double a) {
      return amplitude_objective(upsilon, ct, cr, a);
    };
    auto in_x = [&](double x) {
      return amplitude_objective_sqrt(upsilon, ct, cr, x);
    };

    // Convexity in alpha: a negative second difference counts as error.
    const double h = 1e-3;
    for (double a = 0.01 + h; a < 0.99; a += h) {
      const double second = in_alpha(a - h) - 2.0 * in_alpha(a) + in_alpha(a + h);
      if (second < -1e-9)
        worst = std::max(worst, 1.0);
    }

    // Unimodality in x: once the grid values start rising they never fall.
    bool rising = false;
    double prev = in_x(0.01);
    for (double x = 0.01 + h; x < 0.99; x += h) {
      const double v = in_x(x);
      if (v > prev + 1e-12)
        rising = true;
      else if (rising && v < prev - 1e-12)
        worst = std::max(worst, 1.0);
      prev = v;
    }

    // Golden section against a 1e-6 grid; the coarse pass brackets the
    // minimizer of this convex function before the fine pass.
    const double lo = 1e-9;
    const double hi = 1.0 - 1e-9;
    const double coarse = grid_argmin(in_alpha, lo, hi, 1e-3);
    const double fine = grid_argmin(in_alpha, std::max(lo, coarse - 2e-3),
                                    std::min(hi, coarse + 2e-3), 1e-6);
    const double golden = optimal_amplitude(upsilon, ct, cr);
    worst = std::max(worst, std::abs(golden - fine));
  }
  // Errors are alpha distances; a convexity or unimodality breach counts 1.
  return finish("convexity", worst, 1e-4, triples);
}

SuiteResult tightness_suite(const SelftestOptions &opts, int contexts) {
  GaussianSource src(make_engine(opts.seed, {4}));
  double worst = 0.0;
  for (int i = 0; i < contexts; ++i) {
    const LinkContext ctx =
        random_link_context(src, random_int(src, 1, 6), random_int(src, 1, 6));
    Auxiliaries aux;
    aux.iota = update_iota(ctx);
    aux.tau = update_tau(ctx, aux.iota);
    const double f_o = sum_rate(ctx);
    worst = std::max(worst,
                     std::abs(f_tau(ctx, aux) - f_o) / std::max(1.0, f_o));
  }
  return finish("tightness", worst, 1e-10, contexts);
}

std::vector<SuiteResult> run_selftest(const SelftestOptions &opts) {
  return {gradient_suite(opts), retraction_suite(opts), convexity_suite(opts),
          tightness_suite(opts)};
}

} // namespace bdris
