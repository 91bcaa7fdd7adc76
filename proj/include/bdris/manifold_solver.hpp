#pragma once

#include <vector>

#include "bdris/channel.hpp"
#include "bdris/numerics.hpp"
#include "bdris/ris_model.hpp"
#include "bdris/scenario.hpp"

namespace bdris {

/// Coefficients of the surface subproblem
///   max sum_i 2 Re Tr(Phi_i X_i) - Tr(Phi_i Y Phi_i^H Z_i).
struct QuadraticData {
  ComplexMatrix x_t, x_r; // sum_{k in K_i} conj(tau~_k) g_k h_k^H
  ComplexMatrix y;        // sum_p g_p g_p^H
  ComplexMatrix z_t, z_r; // sum_{k in K_i} |tau_k|^2 h_k h_k^H

  const ComplexMatrix &x(Side s) const {
    return s == Side::kReflective ? x_r : x_t;
  }
  const ComplexMatrix &z(Side s) const {
    return s == Side::kReflective ? z_r : z_t;
  }
};

/// g_k = G w_k and tau~_k = sqrt(1 + iota_k) tau_k.
QuadraticData build_quadratic_data(const ChannelSet &cs, const ComplexMatrix &w,
                                   const RealVector &iota,
                                   const ComplexVector &tau);

/// Surface objective (to be maximized) for a given pair.
double quadratic_objective(const QuadraticData &data,
                           const ComplexMatrix &phi_t,
                           const ComplexMatrix &phi_r);

/// Sides optimized jointly in one stacked block, top to bottom. Hybrid stacks
/// the transmissive block above the reflective one.
std::vector<Side> active_sides(Mode mode);

/// Per-group minimization problem
///   min Tr(Phi_g Y_gg Phi_g^H Z_g) - 2 Re Tr(Phi_g X~_g)  s.t. Phi_g^H Phi_g = I
/// with the other groups folded into X~.
struct GroupProblem {
  int group = 0;
  int group_size = 0;
  std::vector<Side> sides;
  ComplexMatrix x_tilde; // Mbar x (S Mbar)
  ComplexMatrix y;       // Mbar x Mbar
  ComplexMatrix z;       // (S Mbar) x (S Mbar), block diagonal

  int stacked_rows() const { return int(sides.size()) * group_size; }
};

GroupProblem group_subproblem(const QuadraticData &data,
                              const ComplexMatrix &phi_t,
                              const ComplexMatrix &phi_r, int group,
                              int group_size, Mode mode);

/// Stacked block of group g, following active_sides(mode).
ComplexMatrix stack_group(const ComplexMatrix &phi_t,
                          const ComplexMatrix &phi_r, int group,
                          int group_size, Mode mode);
void unstack_group(const ComplexMatrix &stacked, int group, int group_size,
                   Mode mode, ComplexMatrix &phi_t, ComplexMatrix &phi_r);

double objective_f_g(const GroupProblem &gp, const ComplexMatrix &phi);

/// 2 Z Phi Y - 2 X~^H: gradient for the real inner product Re Tr(A^H B).
ComplexMatrix euclidean_gradient(const GroupProblem &gp,
                                 const ComplexMatrix &phi);

/// kDiagonal: D - Phi chdiag(Phi^H D).
/// kOrthogonal: D - Phi herm(Phi^H D), the metric projection onto the tangent
/// space of the Stiefel manifold.
ComplexMatrix project_tangent(const ComplexMatrix &phi, const ComplexMatrix &d,
                              TangentProjection kind);

/// Polar retraction (Phi + delta Xi) ((Phi + delta Xi)^H (Phi + delta Xi))^{-1/2}.
/// For tangent Xi this is (Phi + delta Xi)(I + delta^2 Xi^H Xi)^{-1/2}.
ComplexMatrix retract(const ComplexMatrix &phi, const ComplexMatrix &xi,
                      double delta);

/// Retraction curve delta -> R_Phi(delta Xi). For tangent Xi the
/// eigendecomposition of Xi^H Xi is shared by every delta; otherwise each
/// point falls back to retract().
class RetractionCurve {
public:
  RetractionCurve(const ComplexMatrix &phi, const ComplexMatrix &xi,
                  bool tangent);
  ComplexMatrix at(double delta) const;

private:
  ComplexMatrix phi_, xi_;
  bool tangent_;
  ComplexMatrix basis_, phi_u_, xi_u_;
  RealVector spectrum_;
};

struct CgOptions {
  TangentProjection projection = TangentProjection::kOrthogonal;
  int max_iterations = 500;
  double gradient_tolerance = 1e-6; // times max(1, ||X~||_F)
  double sufficient_decrease = 1e-4;
  double shrink = 0.5;
  int max_halvings = 50;
};

/// Iterate of the Riemannian conjugate gradient.
struct CgState {
  ComplexMatrix phi;
  ComplexMatrix egrad;     // Euclidean gradient at phi
  ComplexMatrix rgrad;     // projected gradient at phi
  ComplexMatrix direction; // search direction at phi
  double value = 0.0;
  double step = 0.0; // last accepted step, 0 before the first
  int since_restart = 0;
};

CgState cg_start(const GroupProblem &gp, ComplexMatrix phi,
                 const CgOptions &opts);

/// One Polak-Ribiere step with Armijo backtracking along the retraction.
/// Returns false (and leaves the state untouched) when no descent step exists.
bool cg_step(const GroupProblem &gp, CgState &state, const CgOptions &opts);

struct GroupSolveReport {
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

GroupSolveReport solve_group(const GroupProblem &gp, ComplexMatrix &phi,
                             const CgOptions &opts);

struct ManifoldOptions {
  CgOptions cg;
  double sweep_tolerance = 1e-6;
  int max_sweeps = 100;
};

struct ManifoldReport {
  int sweeps = 0;
  int cg_iterations = 0;
};

/// Gauss-Seidel sweep over the groups of `state.arch`, each group solved by
/// conjugate gradient on its Stiefel manifold. The input must already satisfy
/// the unitarity constraint.
BdRisState solve_group_connected(const QuadraticData &data, BdRisState state,
                                 const ManifoldOptions &opts = {},
                                 ManifoldReport *report = nullptr);

} // namespace bdris
