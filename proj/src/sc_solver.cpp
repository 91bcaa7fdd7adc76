#include "bdris/sc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bdris {

namespace {

constexpr double kAlphaMargin = 1e-9;
constexpr double kAlphaWidth = 1e-8;

// Per-cell sub-objective z_m (minimized).
double cell_objective(const ScDiagonalData &data, const ChiPair &c,
                      Complex phi_t, Complex phi_r, int m) {
  return data.v_t(m, m).real() * std::norm(phi_t) +
         data.v_r(m, m).real() * std::norm(phi_r) +
         2.0 * (c.t * std::conj(phi_t)).real() +
         2.0 * (c.r * std::conj(phi_r)).real();
}

} // namespace

ScDiagonalData build_sc_data(const ChannelSet &cs, const ComplexMatrix &w,
                             const RealVector &iota, const ComplexVector &tau) {
  const int m = cs.cells();
  const int k_users = cs.users();
  if (w.cols() != k_users || iota.size() != k_users || tau.size() != k_users)
    throw std::invalid_argument("build_sc_data: dimension mismatch");

  ScDiagonalData d;
  d.v_t = ComplexMatrix::Zero(m, m);
  d.v_r = ComplexMatrix::Zero(m, m);
  d.vt_t = ComplexVector::Zero(m);
  d.vt_r = ComplexVector::Zero(m);

  const ComplexMatrix g = cs.g * w;
  // sum_p conj(g_p) g_p^T, shared by every user.
  const ComplexMatrix y_conj = (g * g.adjoint()).conjugate();
  for (int k = 0; k < k_users; ++k) {
    const bool refl = cs.sides[k] == Side::kReflective;
    ComplexMatrix &v = refl ? d.v_r : d.v_t;
    ComplexVector &vt = refl ? d.vt_r : d.vt_t;
    const ComplexVector &hk = cs.h[k];
    // sum_p v_{k,p} v_{k,p}^H = diag(h_k) conj(Y) diag(h_k)^H
    v.noalias() += std::norm(tau(k)) *
                   ComplexMatrix((hk * hk.adjoint()).cwiseProduct(y_conj));
    vt += (std::sqrt(1.0 + iota(k)) * tau(k)) *
          hk.cwiseProduct(g.col(k).conjugate());
  }
  return d;
}

double sc_objective(const ScDiagonalData &data, const ComplexVector &phi_t,
                    const ComplexVector &phi_r) {
  double total = 0.0;
  for (Side s : {Side::kTransmissive, Side::kReflective}) {
    const ComplexVector &phi = s == Side::kReflective ? phi_r : phi_t;
    total += 2.0 * data.vt(s).dot(phi).real() -
             phi.dot(data.v(s) * phi).real();
  }
  return total;
}

ChiPair chi(const ScDiagonalData &data, const ComplexVector &phi_t,
            const ComplexVector &phi_r, int cell) {
  const Complex t = data.v_t.row(cell) * phi_t;
  const Complex r = data.v_r.row(cell) * phi_r;
  return {t - data.v_t(cell, cell) * phi_t(cell) - data.vt_t(cell),
          r - data.v_r(cell, cell) * phi_r(cell) - data.vt_r(cell)};
}

double optimal_phase(Complex c, double previous) {
  if (c == Complex(0))
    return previous;
  double theta = std::arg(-c);
  if (theta < 0)
    theta += 2.0 * std::numbers::pi;
  if (theta >= 2.0 * std::numbers::pi)
    theta = 0.0;
  return theta;
}

double amplitude_objective(double upsilon, double abs_chi_t, double abs_chi_r,
                           double alpha) {
  return upsilon * alpha - 2.0 * abs_chi_t * std::sqrt(alpha) -
         2.0 * abs_chi_r * std::sqrt(1.0 - alpha);
}

double amplitude_objective_sqrt(double upsilon, double abs_chi_t,
                                double abs_chi_r, double x) {
  return upsilon * x * x - 2.0 * abs_chi_t * x -
         2.0 * abs_chi_r * std::sqrt(1.0 - x * x);
}

double optimal_amplitude(double upsilon, double abs_chi_t, double abs_chi_r) {
  if (upsilon == 0.0 && abs_chi_t == 0.0 && abs_chi_r == 0.0)
    return 0.5;
  return golden_section_minimize(
      [&](double a) {
        return amplitude_objective(upsilon, abs_chi_t, abs_chi_r, a);
      },
      kAlphaMargin, 1.0 - kAlphaMargin, kAlphaWidth);
}

BdRisState solve_single_connected(const ScDiagonalData &data, BdRisState state,
                                  const ScOptions &opts, ScReport *report) {
  const int m_cells = state.cells();
  ComplexVector phi_t = state.phi_t.diagonal();
  ComplexVector phi_r = state.phi_r.diagonal();
  const bool use_t = state.mode != Mode::kReflective;
  const bool use_r = state.mode != Mode::kTransmissive;
  ScReport local;

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int m = 0; m < m_cells; ++m) {
      const ChiPair c = chi(data, phi_t, phi_r, m);
      const double theta_t = optimal_phase(c.t, std::arg(phi_t(m)));
      const double theta_r = optimal_phase(c.r, std::arg(phi_r(m)));

      double alpha_t = use_t ? 1.0 : 0.0;
      if (use_t && use_r) {
        const double upsilon = data.v_t(m, m).real() - data.v_r(m, m).real();
        alpha_t = optimal_amplitude(upsilon, std::abs(c.t), std::abs(c.r));
      }
      const Complex new_t =
          use_t ? std::polar(std::sqrt(alpha_t), theta_t) : Complex(0);
      const Complex new_r =
          use_r ? std::polar(std::sqrt(1.0 - alpha_t), theta_r) : Complex(0);

      // Keep the old cell if the search tolerance would cost objective.
      if (cell_objective(data, c, new_t, new_r, m) >
          cell_objective(data, c, phi_t(m), phi_r(m), m))
        continue;
      change = std::max(change, std::abs(new_t - phi_t(m)));
      change = std::max(change, std::abs(new_r - phi_r(m)));
      phi_t(m) = new_t;
      phi_r(m) = new_r;
    }
    ++local.sweeps;
    local.last_change = change;
    if (change < opts.tolerance)
      break;
  }

  state.phi_t = ComplexMatrix::Zero(m_cells, m_cells);
  state.phi_r = ComplexMatrix::Zero(m_cells, m_cells);
  state.phi_t.diagonal() = phi_t;
  state.phi_r.diagonal() = phi_r;
  if (report)
    *report = local;
  return state;
}

} // namespace bdris
