#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bdris/fp_core.hpp"
#include "bdris/manifold_solver.hpp"
#include "bdris/selftest.hpp"

namespace bdris {
namespace {

GaussianSource source(std::uint64_t seed) {
  return GaussianSource(make_engine(seed, {17}));
}

struct Instance {
  ChannelSet cs;
  ComplexMatrix w;
  Auxiliaries aux;
};

Instance random_instance(GaussianSource &src, int m, int n,
                         std::vector<Side> sides) {
  Instance in;
  in.cs.g = random_gaussian(src, m, n);
  for (std::size_t k = 0; k < sides.size(); ++k)
    in.cs.h.push_back(random_gaussian(src, m, 1));
  in.cs.sides = std::move(sides);
  const int k = in.cs.users();
  in.w = 0.3 * random_gaussian(src, n, k);
  in.aux.iota = RealVector(k);
  in.aux.tau = random_gaussian(src, k, 1);
  for (int u = 0; u < k; ++u)
    in.aux.iota(u) = 2.0 * src.uniform();
  return in;
}

QuadraticData data_of(const Instance &in) {
  return build_quadratic_data(in.cs, in.w, in.aux.iota, in.aux.tau);
}

double f_tau_at(const Instance &in, const BdRisState &state) {
  LinkContext ctx{effective_channels(state, in.cs), in.w,
                  RealVector::Constant(in.cs.users(), 0.1)};
  return f_tau(ctx, in.aux);
}

// Tr(Phi^H Z Phi Y) - 2 Re Tr(X~ Phi) written out entry by entry.
double f_g_oracle(const GroupProblem &gp, const ComplexMatrix &phi) {
  const Index rows = phi.rows();
  const Index cols = phi.cols();
  Complex quad(0.0), lin(0.0);
  for (Index a = 0; a < cols; ++a)
    for (Index b = 0; b < rows; ++b)
      for (Index c = 0; c < rows; ++c)
        for (Index d = 0; d < cols; ++d)
          quad += std::conj(phi(b, a)) * gp.z(b, c) * phi(c, d) * gp.y(d, a);
  for (Index a = 0; a < cols; ++a)
    for (Index b = 0; b < rows; ++b)
      lin += gp.x_tilde(a, b) * phi(b, a);
  return quad.real() - 2.0 * lin.real();
}

TEST(BuildQuadraticData, ZeroPrecoder) {
  auto src = source(1);
  Instance in = random_instance(src, 4, 3, {Side::kReflective,
                                            Side::kTransmissive});
  const QuadraticData with_w = data_of(in);
  in.w.setZero();
  const QuadraticData d = data_of(in);
  EXPECT_TRUE(d.x_t.isZero(0.0));
  EXPECT_TRUE(d.x_r.isZero(0.0));
  EXPECT_TRUE(d.y.isZero(0.0));
  EXPECT_EQ(d.z_t, with_w.z_t);
  EXPECT_EQ(d.z_r, with_w.z_r);
}

TEST(BuildQuadraticData, ZeroTau) {
  auto src = source(2);
  Instance in = random_instance(src, 4, 3, {Side::kReflective,
                                            Side::kTransmissive});
  in.aux.tau.setZero();
  const QuadraticData d = data_of(in);
  EXPECT_TRUE(d.x_t.isZero(0.0));
  EXPECT_TRUE(d.x_r.isZero(0.0));
  EXPECT_TRUE(d.z_t.isZero(0.0));
  EXPECT_TRUE(d.z_r.isZero(0.0));
}

TEST(BuildQuadraticData, SingleUserHandExpansion) {
  auto src = source(3);
  const Instance in = random_instance(src, 2, 3, {Side::kTransmissive});
  const QuadraticData d = data_of(in);
  const Complex tau = in.aux.tau(0);
  const double root = std::sqrt(1.0 + in.aux.iota(0));
  const ComplexVector &h = in.cs.h[0];
  for (int a = 0; a < 2; ++a) {
    Complex ga(0.0);
    for (int n = 0; n < 3; ++n)
      ga += in.cs.g(a, n) * in.w(n, 0);
    for (int b = 0; b < 2; ++b) {
      Complex gb(0.0);
      for (int n = 0; n < 3; ++n)
        gb += in.cs.g(b, n) * in.w(n, 0);
      EXPECT_NEAR(std::abs(d.y(a, b) - ga * std::conj(gb)), 0.0, 1e-13);
      EXPECT_NEAR(std::abs(d.x_t(a, b) - root * std::conj(tau) * ga *
                                             std::conj(h(b))),
                  0.0, 1e-13);
      EXPECT_NEAR(std::abs(d.z_t(a, b) - std::norm(tau) * h(a) *
                                             std::conj(h(b))),
                  0.0, 1e-13);
    }
  }
  EXPECT_TRUE(d.x_r.isZero(0.0));
  EXPECT_TRUE(d.z_r.isZero(0.0));
}

TEST(BuildQuadraticData, ConsistentWithSurrogate) {
  // Changing Phi moves f_tau (in bits) by the quadratic objective / ln 2.
  auto src = source(4);
  const Instance in = random_instance(
      src, 6, 3, {Side::kReflective, Side::kTransmissive, Side::kTransmissive});
  const QuadraticData d = data_of(in);
  for (int trial = 0; trial < 5; ++trial) {
    const BdRisState a{Mode::kHybrid, Architecture::full(),
                       random_gaussian(src, 6, 6), random_gaussian(src, 6, 6)};
    const BdRisState b{Mode::kHybrid, Architecture::full(),
                       random_gaussian(src, 6, 6), random_gaussian(src, 6, 6)};
    const double lhs = (f_tau_at(in, a) - f_tau_at(in, b)) * std::numbers::ln2;
    const double rhs = quadratic_objective(d, a.phi_t, a.phi_r) -
                       quadratic_objective(d, b.phi_t, b.phi_r);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(GroupSubproblem, SingleGroupHasNoCoupling) {
  auto src = source(5);
  const Instance in =
      random_instance(src, 4, 2, {Side::kReflective, Side::kTransmissive});
  const QuadraticData d = data_of(in);
  const ComplexMatrix phi_t = random_gaussian(src, 4, 4);
  const ComplexMatrix phi_r = random_gaussian(src, 4, 4);
  const GroupProblem gp = group_subproblem(d, phi_t, phi_r, 0, 4, Mode::kHybrid);
  EXPECT_LT((gp.x_tilde.leftCols(4) - d.x_t).norm(), 1e-14 * d.x_t.norm());
  EXPECT_LT((gp.x_tilde.rightCols(4) - d.x_r).norm(), 1e-14 * d.x_r.norm());
  EXPECT_EQ(gp.y, d.y);
  EXPECT_EQ(gp.z.topLeftCorner(4, 4), d.z_t);
  EXPECT_EQ(gp.z.bottomRightCorner(4, 4), d.z_r);
  EXPECT_TRUE(gp.z.topRightCorner(4, 4).isZero(0.0));
  EXPECT_TRUE(gp.z.bottomLeftCorner(4, 4).isZero(0.0));
}

TEST(GroupSubproblem, OtherGroupsZero) {
  auto src = source(6);
  const Instance in =
      random_instance(src, 6, 2, {Side::kReflective, Side::kTransmissive});
  const QuadraticData d = data_of(in);
  ComplexMatrix phi_t = ComplexMatrix::Zero(6, 6);
  ComplexMatrix phi_r = ComplexMatrix::Zero(6, 6);
  phi_t.block(2, 2, 2, 2) = random_gaussian(src, 2, 2);
  phi_r.block(2, 2, 2, 2) = random_gaussian(src, 2, 2);
  const GroupProblem gp = group_subproblem(d, phi_t, phi_r, 1, 2, Mode::kHybrid);
  EXPECT_LT((gp.x_tilde.leftCols(2) - d.x_t.block(2, 2, 2, 2)).norm(), 1e-14);
  EXPECT_LT((gp.x_tilde.rightCols(2) - d.x_r.block(2, 2, 2, 2)).norm(), 1e-14);
}

TEST(GroupSubproblem, TwoPointObjectiveConsistency) {
  auto src = source(7);
  for (Mode mode : {Mode::kHybrid, Mode::kReflective, Mode::kTransmissive}) {
    const Instance in =
        random_instance(src, 6, 3, {Side::kReflective, Side::kTransmissive});
    const QuadraticData d = data_of(in);
    const int size = 3;
    const BdRisState base = project_to_case(
        random_gaussian(src, 6, 6), random_gaussian(src, 6, 6), mode,
        Architecture::group(2));
    for (int g = 0; g < 2; ++g) {
      const GroupProblem gp =
          group_subproblem(d, base.phi_t, base.phi_r, g, size, mode);
      const ComplexMatrix a = random_gaussian(src, gp.stacked_rows(), size);
      const ComplexMatrix b = random_gaussian(src, gp.stacked_rows(), size);
      BdRisState sa = base, sb = base;
      unstack_group(a, g, size, mode, sa.phi_t, sa.phi_r);
      unstack_group(b, g, size, mode, sb.phi_t, sb.phi_r);
      const double full = quadratic_objective(d, sa.phi_t, sa.phi_r) -
                          quadratic_objective(d, sb.phi_t, sb.phi_r);
      const double group = objective_f_g(gp, a) - objective_f_g(gp, b);
      EXPECT_NEAR(full, -group, 1e-10 * std::max(1.0, std::abs(full)));
    }
  }
}

TEST(StackGroup, RoundTrip) {
  auto src = source(8);
  ComplexMatrix phi_t = random_gaussian(src, 4, 4);
  ComplexMatrix phi_r = random_gaussian(src, 4, 4);
  const ComplexMatrix s = stack_group(phi_t, phi_r, 1, 2, Mode::kHybrid);
  EXPECT_EQ(s.topRows(2), phi_t.block(2, 2, 2, 2));
  EXPECT_EQ(s.bottomRows(2), phi_r.block(2, 2, 2, 2));
  ComplexMatrix t2 = ComplexMatrix::Zero(4, 4), r2 = ComplexMatrix::Zero(4, 4);
  unstack_group(s, 1, 2, Mode::kHybrid, t2, r2);
  EXPECT_EQ(t2.block(2, 2, 2, 2), phi_t.block(2, 2, 2, 2));
  EXPECT_TRUE(t2.block(0, 0, 2, 2).isZero(0.0));
}

TEST(ObjectiveFg, Examples) {
  auto src = source(9);
  const GroupProblem gp = random_group_problem(src, 3, Mode::kHybrid);
  EXPECT_EQ(objective_f_g(gp, ComplexMatrix::Zero(6, 3)), 0.0);

  GroupProblem id = gp;
  id.x_tilde.setZero();
  id.y = ComplexMatrix::Identity(3, 3);
  id.z = ComplexMatrix::Identity(6, 6);
  EXPECT_NEAR(objective_f_g(id, random_stiefel(src, 6, 3)), 3.0, 1e-12);
}

TEST(ObjectiveFg, TermByTermExpansion) {
  auto src = source(10);
  for (Mode mode : {Mode::kHybrid, Mode::kReflective}) {
    const GroupProblem gp = random_group_problem(src, 3, mode);
    const ComplexMatrix phi = random_gaussian(src, gp.stacked_rows(), 3);
    const double oracle = f_g_oracle(gp, phi);
    EXPECT_NEAR(objective_f_g(gp, phi), oracle,
                1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(EuclideanGradient, Examples) {
  auto src = source(11);
  GroupProblem gp = random_group_problem(src, 2, Mode::kHybrid);
  gp.x_tilde.setZero();
  EXPECT_TRUE(euclidean_gradient(gp, ComplexMatrix::Zero(4, 2)).isZero(0.0));

  gp = random_group_problem(src, 2, Mode::kHybrid);
  gp.y = ComplexMatrix::Identity(2, 2);
  gp.z = ComplexMatrix::Identity(4, 4);
  const ComplexMatrix phi = random_gaussian(src, 4, 2);
  const ComplexMatrix expected = 2.0 * phi - 2.0 * gp.x_tilde.adjoint();
  EXPECT_LT((euclidean_gradient(gp, phi) - expected).norm(), 1e-13);
}

TEST(EuclideanGradient, FiniteDifferences) {
  auto src = source(12);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const GroupProblem gp = random_group_problem(
        src, 1 + trial % 4, trial % 2 ? Mode::kHybrid : Mode::kTransmissive);
    const ComplexMatrix phi =
        random_stiefel(src, gp.stacked_rows(), gp.group_size);
    const ComplexMatrix grad = euclidean_gradient(gp, phi);
    for (int d = 0; d < 10; ++d) {
      ComplexMatrix t = project_tangent(
          phi, random_gaussian(src, gp.stacked_rows(), gp.group_size),
          TangentProjection::kOrthogonal);
      t /= t.norm();
      const double fd =
          (f_g_oracle(gp, phi + h * t) - f_g_oracle(gp, phi - h * t)) / (2 * h);
      const double analytic = real_inner(grad, t);
      EXPECT_LT(std::abs(fd - analytic) /
                    std::max({std::abs(fd), std::abs(analytic), 1e-12}),
                1e-5);
    }
  }
}

TEST(ProjectTangent, UnitModulusCell) {
  const ComplexMatrix phi = ComplexMatrix::Constant(1, 1, std::polar(1.0, 0.4));
  for (auto kind : {TangentProjection::kDiagonal, TangentProjection::kOrthogonal})
    EXPECT_LT(project_tangent(phi, phi, kind).norm(), 1e-15);
}

TEST(ProjectTangent, ZeroDiagonalInnerIsUnchanged) {
  auto src = source(13);
  const ComplexMatrix phi = random_stiefel(src, 4, 2);
  ComplexMatrix d = random_gaussian(src, 4, 2);
  // Remove the diagonal of phi^H d by subtracting phi * diag(phi^H d).
  const ComplexMatrix inner = phi.adjoint() * d;
  for (Index j = 0; j < 2; ++j)
    d.col(j) -= phi.col(j) * inner(j, j);
  EXPECT_LT((project_tangent(phi, d, TangentProjection::kDiagonal) - d).norm(),
            1e-14);
}

TEST(ProjectTangent, Idempotent) {
  auto src = source(14);
  for (auto kind : {TangentProjection::kDiagonal, TangentProjection::kOrthogonal}) {
    const ComplexMatrix phi = random_stiefel(src, 6, 3);
    const ComplexMatrix once =
        project_tangent(phi, random_gaussian(src, 6, 3), kind);
    EXPECT_LT((project_tangent(phi, once, kind) - once).norm(),
              1e-13 * once.norm());
  }
}

TEST(ProjectTangent, OrthogonalGivesTangentVector) {
  auto src = source(15);
  const ComplexMatrix phi = random_stiefel(src, 6, 3);
  const ComplexMatrix t = project_tangent(phi, random_gaussian(src, 6, 3),
                                          TangentProjection::kOrthogonal);
  const ComplexMatrix inner = phi.adjoint() * t;
  // Phi^H T is skew-Hermitian.
  EXPECT_LT((inner + inner.adjoint()).norm(), 1e-13);
}

TEST(Retract, ZeroStepIsExact) {
  auto src = source(16);
  const ComplexMatrix phi = random_stiefel(src, 4, 2);
  const ComplexMatrix xi = random_gaussian(src, 4, 2);
  EXPECT_EQ(retract(phi, xi, 0.0), phi);
  EXPECT_EQ(RetractionCurve(phi, xi, false).at(0.0), phi);
}

TEST(Retract, MatchesTangentFormula) {
  auto src = source(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int cols = 1 + trial % 4;
    const ComplexMatrix phi = random_stiefel(src, 2 * cols, cols);
    const ComplexMatrix xi = project_tangent(
        phi, random_gaussian(src, 2 * cols, cols), TangentProjection::kOrthogonal);
    const double delta = 10.0 * src.uniform();
    // (Phi + d Xi)(I + d^2 Xi^H Xi)^{-1/2}
    const ComplexMatrix printed =
        (phi + delta * xi) *
        principal_inverse_sqrt(ComplexMatrix::Identity(cols, cols) +
                                   delta * delta * (xi.adjoint() * xi),
                               0.0);
    const ComplexMatrix polar = retract(phi, xi, delta);
    const ComplexMatrix curve = RetractionCurve(phi, xi, true).at(delta);
    EXPECT_LT((polar - printed).norm(), 1e-10);
    EXPECT_LT((curve - printed).norm(), 1e-10);
    const ComplexMatrix eye = ComplexMatrix::Identity(cols, cols);
    EXPECT_LT((curve.adjoint() * curve - eye).norm(), 1e-10);
  }
}

TEST(Retract, NonTangentDirectionStaysFeasible) {
  auto src = source(18);
  const ComplexMatrix phi = random_stiefel(src, 6, 3);
  const ComplexMatrix xi = random_gaussian(src, 6, 3);
  const ComplexMatrix out = retract(phi, xi, 0.7);
  EXPECT_LT((out.adjoint() * out - ComplexMatrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(CgStep, StationaryPointIsKept) {
  auto src = source(19);
  GroupProblem gp = random_group_problem(src, 2, Mode::kHybrid);
  gp.y = ComplexMatrix::Identity(2, 2);
  gp.z = ComplexMatrix::Identity(4, 4);
  const ComplexMatrix phi = random_stiefel(src, 4, 2);
  // Euclidean gradient 2 Phi - 2 X~^H vanishes for X~ = Phi^H.
  gp.x_tilde = phi.adjoint();
  CgState st = cg_start(gp, phi, {});
  EXPECT_LT(st.rgrad.norm(), 1e-14);
  const CgState before = st;
  cg_step(gp, st, {});
  EXPECT_LT((st.phi - before.phi).norm(), 1e-14);
}

TEST(CgStep, MonotoneDescentToStationarity) {
  auto src = source(20);
  for (int trial = 0; trial < 10; ++trial) {
    const GroupProblem gp = random_group_problem(
        src, 1 + trial % 3, trial % 2 ? Mode::kHybrid : Mode::kReflective);
    const CgOptions opts;
    CgState st =
        cg_start(gp, random_stiefel(src, gp.stacked_rows(), gp.group_size), opts);
    for (int step = 0; step < 100; ++step) {
      const double before = st.value;
      if (!cg_step(gp, st, opts))
        break;
      EXPECT_LE(st.value, before);
      EXPECT_NEAR(st.value, objective_f_g(gp, st.phi),
                  1e-10 * std::max(1.0, std::abs(st.value)));
    }
    EXPECT_LT(st.rgrad.norm(), 1e-4) << "trial " << trial;
    const ComplexMatrix eye =
        ComplexMatrix::Identity(gp.group_size, gp.group_size);
    EXPECT_LT((st.phi.adjoint() * st.phi - eye).norm(), 1e-10);
  }
}

// Best of many random Stiefel points refined by random local moves.
double sampled_minimum(const GroupProblem &gp, GaussianSource &src,
                       int samples) {
  const int rows = gp.stacked_rows();
  const int cols = gp.group_size;
  ComplexMatrix best = random_stiefel(src, rows, cols);
  double best_value = objective_f_g(gp, best);
  for (int i = 1; i < samples; ++i) {
    const ComplexMatrix phi = random_stiefel(src, rows, cols);
    const double v = objective_f_g(gp, phi);
    if (v < best_value) {
      best_value = v;
      best = phi;
    }
  }
  double radius = 0.1;
  for (int i = 0; i < 20000 && radius > 1e-9; ++i) {
    const ComplexMatrix moved =
        best + radius * random_gaussian(src, rows, cols);
    const ComplexMatrix polar =
        moved * principal_inverse_sqrt(moved.adjoint() * moved, 0.0);
    const double v = objective_f_g(gp, polar);
    if (v < best_value) {
      best_value = v;
      best = polar;
    } else if (i % 200 == 199) {
      radius *= 0.5;
    }
  }
  return best_value;
}

TEST(SolveGroup, MatchesRandomSearchOracle) {
  auto src = source(21);
  for (int trial = 0; trial < 3; ++trial) {
    const Instance in = random_instance(src, 2, 2, {Side::kReflective});
    const QuadraticData d = data_of(in);
    const BdRisState start = project_to_case(
        random_gaussian(src, 2, 2), random_gaussian(src, 2, 2), Mode::kHybrid,
        Architecture::full());
    const GroupProblem gp =
        group_subproblem(d, start.phi_t, start.phi_r, 0, 2, Mode::kHybrid);
    const BdRisState out = solve_group_connected(d, start);
    const double solver = objective_f_g(
        gp, stack_group(out.phi_t, out.phi_r, 0, 2, Mode::kHybrid));
    const double oracle = sampled_minimum(gp, src, 100000);
    EXPECT_LE(solver, oracle + 1e-3 * std::max(1.0, std::abs(oracle)));
  }
}

TEST(SolveGroupConnected, SingleGroupEqualsFull) {
  auto src = source(22);
  const Instance in =
      random_instance(src, 4, 2, {Side::kReflective, Side::kTransmissive});
  const QuadraticData d = data_of(in);
  BdRisState full = project_to_case(random_gaussian(src, 4, 4),
                                    random_gaussian(src, 4, 4), Mode::kHybrid,
                                    Architecture::full());
  BdRisState one = full;
  one.arch = Architecture::group(1);
  const BdRisState a = solve_group_connected(d, full);
  const BdRisState b = solve_group_connected(d, one);
  EXPECT_EQ(a.phi_t, b.phi_t);
  EXPECT_EQ(a.phi_r, b.phi_r);
}

TEST(SolveGroupConnected, OptimalInputUnchanged) {
  auto src = source(23);
  const Instance in =
      random_instance(src, 6, 2, {Side::kReflective, Side::kTransmissive});
  const QuadraticData d = data_of(in);
  const BdRisState start = project_to_case(
      random_gaussian(src, 6, 6), random_gaussian(src, 6, 6), Mode::kHybrid,
      Architecture::group(3));
  const BdRisState once = solve_group_connected(d, start);
  const BdRisState twice = solve_group_connected(d, once);
  EXPECT_LT((twice.phi_t - once.phi_t).norm(), 1e-8);
  EXPECT_LT((twice.phi_r - once.phi_r).norm(), 1e-8);
}

TEST(SolveGroupConnected, StructureFeasibilityAndAscent) {
  auto src = source(24);
  for (Mode mode : {Mode::kHybrid, Mode::kReflective, Mode::kTransmissive}) {
    for (Architecture arch : {Architecture::group(4), Architecture::group(2),
                              Architecture::full(), Architecture::single()}) {
      const Instance in =
          random_instance(src, 8, 3, {Side::kReflective, Side::kTransmissive});
      const QuadraticData d = data_of(in);
      const BdRisState start = project_to_case(
          random_gaussian(src, 8, 8), random_gaussian(src, 8, 8), mode, arch);
      ManifoldReport report;
      const BdRisState out = solve_group_connected(d, start, {}, &report);
      const ValidationResult v = validate(out);
      EXPECT_TRUE(v.ok) << v.diagnostic;
      EXPECT_GE(quadratic_objective(d, out.phi_t, out.phi_r),
                quadratic_objective(d, start.phi_t, start.phi_r) - 1e-12);
      EXPECT_GE(report.sweeps, 1);
    }
  }
}

TEST(SolveGroupConnected, SweepsNeverDecreaseObjective) {
  auto src = source(25);
  const Instance in =
      random_instance(src, 8, 3, {Side::kReflective, Side::kTransmissive});
  const QuadraticData d = data_of(in);
  BdRisState state = project_to_case(random_gaussian(src, 8, 8),
                                     random_gaussian(src, 8, 8), Mode::kHybrid,
                                     Architecture::group(4));
  ManifoldOptions one_sweep;
  one_sweep.max_sweeps = 1;
  double prev = quadratic_objective(d, state.phi_t, state.phi_r);
  for (int sweep = 0; sweep < 10; ++sweep) {
    state = solve_group_connected(d, state, one_sweep);
    const double now = quadratic_objective(d, state.phi_t, state.phi_r);
    EXPECT_GE(now, prev - 1e-12);
    prev = now;
  }
}

} // namespace
} // namespace bdris
