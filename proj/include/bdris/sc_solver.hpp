#pragma once

#include "bdris/channel.hpp"
#include "bdris/numerics.hpp"
#include "bdris/ris_model.hpp"

namespace bdris {

/// Diagonal-surface subproblem
///   max sum_i 2 Re{v~_i^H phi_i} - phi_i^H V_i phi_i,  |phi_t,m|^2 + |phi_r,m|^2 = 1.
struct ScDiagonalData {
  ComplexMatrix v_t, v_r;      // M x M Hermitian PSD
  ComplexVector vt_t, vt_r;    // M

  const ComplexMatrix &v(Side s) const {
    return s == Side::kReflective ? v_r : v_t;
  }
  const ComplexVector &vt(Side s) const {
    return s == Side::kReflective ? vt_r : vt_t;
  }
};

/// With v_{k,p} = (h_k^H diag(G w_p))^H:
///   V_i = sum_{k in K_i} |tau_k|^2 sum_p v_{k,p} v_{k,p}^H,
///   v~_i = sum_{k in K_i} sqrt(1 + iota_k) tau_k v_{k,k}.
ScDiagonalData build_sc_data(const ChannelSet &cs, const ComplexMatrix &w,
                             const RealVector &iota, const ComplexVector &tau);

/// Objective of the diagonal subproblem (maximized).
double sc_objective(const ScDiagonalData &data, const ComplexVector &phi_t,
                    const ComplexVector &phi_r);

struct ChiPair {
  Complex t;
  Complex r;
};

/// chi_{i,m} = sum_{n != m} [V_i]_{m,n} phi_{i,n} - [v~_i]_m.
ChiPair chi(const ScDiagonalData &data, const ComplexVector &phi_t,
            const ComplexVector &phi_r, int cell);

/// Phase in [0, 2 pi) with cos(angle(chi) - theta) = -1; `previous` is kept
/// when chi = 0.
double optimal_phase(Complex chi, double previous = 0.0);

/// upsilon a - 2 |chi_t| sqrt(a) - 2 |chi_r| sqrt(1 - a).
double amplitude_objective(double upsilon, double abs_chi_t, double abs_chi_r,
                           double alpha);

/// Same objective in x = sqrt(alpha).
double amplitude_objective_sqrt(double upsilon, double abs_chi_t,
                                double abs_chi_r, double x);

/// Golden-section minimizer of amplitude_objective over [1e-9, 1 - 1e-9],
/// to an interval width of 1e-8. Flat objective -> 0.5.
double optimal_amplitude(double upsilon, double abs_chi_t, double abs_chi_r);

/// Golden-section search for the minimum of a unimodal f on [lo, hi].
template <typename F>
double golden_section_minimize(F &&f, double lo, double hi, double width) {
  const double inv_phi = 0.6180339887498949; // (sqrt(5) - 1) / 2
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > width) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

struct ScOptions {
  double tolerance = 1e-6;
  int max_sweeps = 100;
};

struct ScReport {
  int sweeps = 0;
  double last_change = 0.0;
};

/// Cyclic per-cell updates (phases in closed form, then the amplitude split)
/// on a single-connected state.
BdRisState solve_single_connected(const ScDiagonalData &data, BdRisState state,
                                  const ScOptions &opts = {},
                                  ScReport *report = nullptr);

} // namespace bdris
