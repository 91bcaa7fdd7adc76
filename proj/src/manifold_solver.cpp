#include "bdris/manifold_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdris {

namespace {

ComplexMatrix herm(const ComplexMatrix &a) { return 0.5 * (a + a.adjoint()); }

// Tr(Phi Y Phi^H Z) for Hermitian Y, Z, from the products reused by the
// gradient.
double quadratic_trace(const ComplexMatrix &phi_y, const ComplexMatrix &z_phi) {
  return (phi_y.cwiseProduct(z_phi.conjugate())).sum().real();
}

// Re Tr(Phi X).
double linear_trace(const ComplexMatrix &phi, const ComplexMatrix &x) {
  return (phi.cwiseProduct(x.transpose())).sum().real();
}

// Z Phi with Z block diagonal, one block per stacked side.
ComplexMatrix z_times(const GroupProblem &gp, const ComplexMatrix &phi) {
  const Index mbar = gp.group_size;
  ComplexMatrix out(phi.rows(), phi.cols());
  for (Index i = 0; i < Index(gp.sides.size()); ++i)
    out.middleRows(i * mbar, mbar).noalias() =
        gp.z.block(i * mbar, i * mbar, mbar, mbar) *
        phi.middleRows(i * mbar, mbar);
  return out;
}

double value_from(const GroupProblem &gp, const ComplexMatrix &phi,
                  const ComplexMatrix &z_phi) {
  return quadratic_trace(phi * gp.y, z_phi) - 2.0 * linear_trace(phi, gp.x_tilde);
}

} // namespace

QuadraticData build_quadratic_data(const ChannelSet &cs, const ComplexMatrix &w,
                                   const RealVector &iota,
                                   const ComplexVector &tau) {
  const int m = cs.cells();
  const int k_users = cs.users();
  if (w.cols() != k_users || iota.size() != k_users || tau.size() != k_users)
    throw std::invalid_argument("build_quadratic_data: dimension mismatch");

  QuadraticData d;
  d.x_t = ComplexMatrix::Zero(m, m);
  d.x_r = ComplexMatrix::Zero(m, m);
  d.z_t = ComplexMatrix::Zero(m, m);
  d.z_r = ComplexMatrix::Zero(m, m);

  const ComplexMatrix g = cs.g * w; // column k = g_k
  d.y = g * g.adjoint();
  for (int k = 0; k < k_users; ++k) {
    const Complex tau_tilde = std::sqrt(1.0 + iota(k)) * tau(k);
    const ComplexVector &hk = cs.h[k];
    ComplexMatrix &x = cs.sides[k] == Side::kReflective ? d.x_r : d.x_t;
    ComplexMatrix &z = cs.sides[k] == Side::kReflective ? d.z_r : d.z_t;
    x.noalias() += std::conj(tau_tilde) * g.col(k) * hk.adjoint();
    z.noalias() += std::norm(tau(k)) * hk * hk.adjoint();
  }
  return d;
}

double quadratic_objective(const QuadraticData &data,
                           const ComplexMatrix &phi_t,
                           const ComplexMatrix &phi_r) {
  double total = 0.0;
  for (Side s : {Side::kTransmissive, Side::kReflective}) {
    const ComplexMatrix &phi = s == Side::kReflective ? phi_r : phi_t;
    total += 2.0 * linear_trace(phi, data.x(s)) -
             quadratic_trace(phi * data.y, data.z(s) * phi);
  }
  return total;
}

std::vector<Side> active_sides(Mode mode) {
  switch (mode) {
  case Mode::kReflective:
    return {Side::kReflective};
  case Mode::kTransmissive:
    return {Side::kTransmissive};
  case Mode::kHybrid:
    return {Side::kTransmissive, Side::kReflective};
  }
  return {};
}

ComplexMatrix stack_group(const ComplexMatrix &phi_t,
                          const ComplexMatrix &phi_r, int group,
                          int group_size, Mode mode) {
  const auto sides = active_sides(mode);
  const IndexRange r = group_range(group, group_size);
  ComplexMatrix out(Index(sides.size()) * group_size, group_size);
  for (std::size_t i = 0; i < sides.size(); ++i) {
    const ComplexMatrix &phi = sides[i] == Side::kReflective ? phi_r : phi_t;
    out.middleRows(Index(i) * group_size, group_size) = block_slice(phi, r, r);
  }
  return out;
}

void unstack_group(const ComplexMatrix &stacked, int group, int group_size,
                   Mode mode, ComplexMatrix &phi_t, ComplexMatrix &phi_r) {
  const auto sides = active_sides(mode);
  const Index begin = Index(group) * group_size;
  for (std::size_t i = 0; i < sides.size(); ++i) {
    ComplexMatrix &phi = sides[i] == Side::kReflective ? phi_r : phi_t;
    phi.block(begin, begin, group_size, group_size) =
        stacked.middleRows(Index(i) * group_size, group_size);
  }
}

GroupProblem group_subproblem(const QuadraticData &data,
                              const ComplexMatrix &phi_t,
                              const ComplexMatrix &phi_r, int group,
                              int group_size, Mode mode) {
  GroupProblem gp;
  gp.group = group;
  gp.group_size = group_size;
  gp.sides = active_sides(mode);

  const Index mbar = group_size;
  const Index m = data.y.rows();
  const IndexRange r = group_range(group, group_size);
  const Index stacked = Index(gp.sides.size()) * mbar;

  gp.y = block_slice(data.y, r, r);
  gp.x_tilde = ComplexMatrix::Zero(mbar, stacked);
  gp.z = ComplexMatrix::Zero(stacked, stacked);

  const ComplexMatrix y_row = block_slice(data.y, r, {0, m}); // Y_{g,:}
  for (std::size_t i = 0; i < gp.sides.size(); ++i) {
    const Side s = gp.sides[i];
    const ComplexMatrix &phi = s == Side::kReflective ? phi_r : phi_t;
    const ComplexMatrix &z = data.z(s);
    const ComplexMatrix z_col = block_slice(z, {0, m}, r); // Z_{:,g}
    const ComplexMatrix phi_gg = block_slice(phi, r, r);
    const ComplexMatrix z_gg = block_slice(z, r, r);

    // sum_{p != g} Y_{g,p} Phi_p^H Z_{p,g}; Phi is block diagonal so the full
    // product minus the p = g term gives the coupling.
    ComplexMatrix coupling = y_row * (phi.adjoint() * z_col);
    coupling.noalias() -= gp.y * phi_gg.adjoint() * z_gg;

    gp.x_tilde.middleCols(Index(i) * mbar, mbar) =
        block_slice(data.x(s), r, r) - coupling;
    gp.z.block(Index(i) * mbar, Index(i) * mbar, mbar, mbar) = z_gg;
  }
  return gp;
}

double objective_f_g(const GroupProblem &gp, const ComplexMatrix &phi) {
  return quadratic_trace(phi * gp.y, z_times(gp, phi)) -
         2.0 * linear_trace(phi, gp.x_tilde);
}

ComplexMatrix euclidean_gradient(const GroupProblem &gp,
                                 const ComplexMatrix &phi) {
  return 2.0 * (z_times(gp, phi) * gp.y) - 2.0 * gp.x_tilde.adjoint();
}

ComplexMatrix project_tangent(const ComplexMatrix &phi, const ComplexMatrix &d,
                              TangentProjection kind) {
  const ComplexMatrix inner = phi.adjoint() * d;
  if (kind == TangentProjection::kDiagonal) {
    ComplexMatrix diag = ComplexMatrix::Zero(inner.rows(), inner.cols());
    diag.diagonal() = inner.diagonal();
    return d - phi * diag;
  }
  return d - phi * herm(inner);
}

ComplexMatrix retract(const ComplexMatrix &phi, const ComplexMatrix &xi,
                      double delta) {
  if (delta == 0.0)
    return phi;
  const ComplexMatrix moved = phi + delta * xi;
  return moved * principal_inverse_sqrt(moved.adjoint() * moved, 0.0);
}

RetractionCurve::RetractionCurve(const ComplexMatrix &phi,
                                 const ComplexMatrix &xi, bool tangent)
    : phi_(phi), xi_(xi), tangent_(tangent) {
  if (!tangent_)
    return;
  // (Phi + d Xi)^H (Phi + d Xi) = I + d^2 Xi^H Xi on the tangent space, so one
  // eigendecomposition of Xi^H Xi serves every step length.
  const ComplexMatrix gram = herm(xi_.adjoint() * xi_);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram);
  basis_ = eig.eigenvectors();
  spectrum_ = eig.eigenvalues().cwiseMax(0.0);
  phi_u_.noalias() = phi_ * basis_;
  xi_u_.noalias() = xi_ * basis_;
}

ComplexMatrix RetractionCurve::at(double delta) const {
  if (delta == 0.0)
    return phi_;
  if (!tangent_)
    return retract(phi_, xi_, delta);
  const RealVector scale =
      (1.0 + delta * delta * spectrum_.array()).rsqrt().matrix();
  const ComplexMatrix left = (phi_u_ + delta * xi_u_) * scale.asDiagonal();
  return left * basis_.adjoint();
}

CgState cg_start(const GroupProblem &gp, ComplexMatrix phi,
                 const CgOptions &opts) {
  CgState st;
  st.phi = std::move(phi);
  const ComplexMatrix z_phi = z_times(gp, st.phi);
  st.value = value_from(gp, st.phi, z_phi);
  st.egrad = 2.0 * (z_phi * gp.y) - 2.0 * gp.x_tilde.adjoint();
  st.rgrad = project_tangent(st.phi, st.egrad, opts.projection);
  st.direction = -st.rgrad;
  return st;
}

bool cg_step(const GroupProblem &gp, CgState &st, const CgOptions &opts) {
  const int restart_period =
      std::max(1, gp.stacked_rows() * gp.group_size);
  const bool orthogonal = opts.projection == TangentProjection::kOrthogonal;

  // Slope of f along delta -> R(delta Xi) at 0 is Re<egrad, P(Xi)> with the
  // orthogonal P; for tangent Xi that is Re<egrad, Xi>.
  auto slope_of = [&](const ComplexMatrix &dir) {
    if (orthogonal)
      return real_inner(st.egrad, dir);
    return real_inner(st.egrad, project_tangent(st.phi, dir,
                                                TangentProjection::kOrthogonal));
  };

  ComplexMatrix dir = st.direction;
  double slope = slope_of(dir);
  if (!(slope < 0)) {
    dir = -st.rgrad;
    slope = slope_of(dir);
    st.since_restart = 0;
  }
  if (!(slope < 0))
    return false;

  const RetractionCurve curve(st.phi, dir, orthogonal);
  double delta = st.step > 0 ? 2.0 * st.step : 1.0;
  ComplexMatrix candidate;
  ComplexMatrix z_phi;
  double value = 0.0;
  bool accepted = false;
  for (int h = 0; h <= opts.max_halvings; ++h) {
    const double bound = st.value + opts.sufficient_decrease * delta * slope;
    candidate = curve.at(delta);
    z_phi = z_times(gp, candidate);
    value = value_from(gp, candidate, z_phi);
    if (value <= bound) {
      // The shared-eigenbasis curve assumes Phi^H Phi = I exactly and lets
      // rounding compound across steps; the accepted point is re-projected.
      if (orthogonal) {
        candidate = retract(st.phi, dir, delta);
        z_phi = z_times(gp, candidate);
        value = value_from(gp, candidate, z_phi);
      }
      if (value <= bound) {
        accepted = true;
        break;
      }
    }
    delta *= opts.shrink;
  }
  if (!accepted)
    return false;

  ComplexMatrix egrad = 2.0 * (z_phi * gp.y) - 2.0 * gp.x_tilde.adjoint();
  ComplexMatrix rgrad = project_tangent(candidate, egrad, opts.projection);

  double mu = 0.0;
  const double prev_sq = st.rgrad.squaredNorm();
  if (++st.since_restart < restart_period && prev_sq > 0) {
    // The orthogonal projection is self-adjoint, so
    // <g, P(g_prev)> = <P(g), g_prev> = <g, g_prev>.
    const double cross =
        orthogonal
            ? real_inner(rgrad, st.rgrad)
            : real_inner(rgrad,
                         project_tangent(candidate, st.rgrad, opts.projection));
    mu = std::max(0.0, (rgrad.squaredNorm() - cross) / prev_sq);
  } else {
    st.since_restart = 0;
  }

  ComplexMatrix next_dir = -rgrad;
  if (mu > 0)
    next_dir += mu * project_tangent(candidate, dir, opts.projection);

  st.phi = std::move(candidate);
  st.value = value;
  st.egrad = std::move(egrad);
  st.rgrad = std::move(rgrad);
  st.direction = std::move(next_dir);
  st.step = delta;
  return true;
}

GroupSolveReport solve_group(const GroupProblem &gp, ComplexMatrix &phi,
                             const CgOptions &opts) {
  const double tol =
      opts.gradient_tolerance * std::max(1.0, gp.x_tilde.norm());
  CgState st = cg_start(gp, phi, opts);
  GroupSolveReport report;
  while (report.iterations < opts.max_iterations) {
    if (st.rgrad.norm() < tol) {
      report.converged = true;
      break;
    }
    if (!cg_step(gp, st, opts))
      break;
    ++report.iterations;
  }
  report.gradient_norm = st.rgrad.norm();
  report.converged = report.converged || report.gradient_norm < tol;
  phi = std::move(st.phi);
  return report;
}

BdRisState solve_group_connected(const QuadraticData &data, BdRisState state,
                                 const ManifoldOptions &opts,
                                 ManifoldReport *report) {
  const int m = state.cells();
  const int groups = state.arch.group_count(m);
  const int size = state.arch.group_size(m);
  ManifoldReport local;

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int g = 0; g < groups; ++g) {
      const GroupProblem gp =
          group_subproblem(data, state.phi_t, state.phi_r, g, size, state.mode);
      const ComplexMatrix before =
          stack_group(state.phi_t, state.phi_r, g, size, state.mode);
      ComplexMatrix phi = before;
      local.cg_iterations += solve_group(gp, phi, opts.cg).iterations;
      change = std::max(change, (phi - before).norm());
      unstack_group(phi, g, size, state.mode, state.phi_t, state.phi_r);
    }
    ++local.sweeps;
    // A single group has no coupling left to resolve.
    if (groups == 1 || change < opts.sweep_tolerance)
      break;
  }
  if (report)
    *report = local;
  return state;
}

} // namespace bdris
