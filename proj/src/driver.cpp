#include "bdris/driver.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "bdris/fp_core.hpp"
#include "bdris/manifold_solver.hpp"
#include "bdris/precoder.hpp"
#include "bdris/rng.hpp"
#include "bdris/sc_solver.hpp"

namespace bdris {

namespace {

LinkContext make_context(const ChannelSet &cs, const BdRisState &state,
                         const ComplexMatrix &w, double noise) {
  return {effective_channels(state, cs), w,
          RealVector::Constant(cs.users(), noise)};
}

BdRisState update_surface(const Scenario &s, const ChannelSet &cs,
                          const BdRisState &state, const ComplexMatrix &w,
                          const Auxiliaries &aux) {
  const bool closed_form = state.arch.kind == ArchKind::kSingle &&
                           s.single_solver == SingleSolver::kClosedForm;
  if (closed_form)
    return solve_single_connected(build_sc_data(cs, w, aux.iota, aux.tau),
                                  state);
  ManifoldOptions opts;
  opts.cg.projection = s.projection;
  return solve_group_connected(build_quadratic_data(cs, w, aux.iota, aux.tau),
                               state, opts);
}

void require_finite(double value, int iter) {
  if (!std::isfinite(value))
    throw NumericFailure("non-finite sum-rate at outer iteration " +
                         std::to_string(iter));
}

} // namespace

std::vector<int> served_users(Mode mode, const std::vector<Side> &sides) {
  std::vector<int> out;
  for (int k = 0; k < int(sides.size()); ++k)
    if (serves(mode, sides[k]))
      out.push_back(k);
  return out;
}

Initialization initialize(const Scenario &s, const ChannelSet &cs) {
  validate_scenario(s);
  const int m = cs.cells();
  Engine eng = make_engine(s.seed, {std::uint64_t(Stream::kRisInit)});
  GaussianSource src(eng);

  ComplexMatrix phi_t = ComplexMatrix::Zero(m, m);
  ComplexMatrix phi_r = ComplexMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    phi_t(i, i) = std::polar(kInvSqrt2,
                             2.0 * std::numbers::pi * src.uniform());
    phi_r(i, i) = std::polar(kInvSqrt2,
                             2.0 * std::numbers::pi * src.uniform());
  }

  Initialization init;
  if (s.mode == Mode::kHybrid)
    init.state = {s.mode, s.arch, std::move(phi_t), std::move(phi_r)};
  else
    init.state = project_to_case(phi_t, phi_r, s.mode, s.arch);

  const auto users = served_users(s.mode, cs.sides);
  const ChannelSet served = channel_subset(cs, users);
  init.w = mmse_initial_precoder(served, init.state, s.noise_watts,
                                 s.power_watts);
  return init;
}

RunResult run(const Scenario &s, const ChannelSet &cs,
              const Initialization *start) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_scenario(s);
  if (cs.cells() != s.cells || cs.bs_antennas() != s.bs_antennas ||
      cs.users() != s.users())
    throw std::invalid_argument("run: channels do not match the scenario");

  Initialization init = start ? *start : initialize(s, cs);
  const auto users = served_users(s.mode, cs.sides);
  const ChannelSet served = channel_subset(cs, users);
  if (init.w.rows() != s.bs_antennas || init.w.cols() != Index(users.size()))
    throw std::invalid_argument("run: initial precoder has wrong dimensions");

  BdRisState state = std::move(init.state);
  state.mode = s.mode;
  state.arch = s.arch;
  if (const ValidationResult v = validate(state); !v.ok)
    throw std::invalid_argument("run: initial state is not feasible for " +
                                to_string(s.arch) + ": " + v.diagnostic);
  ComplexMatrix w = std::move(init.w);

  RunResult result;
  double f_prev = sum_rate(make_context(served, state, w, s.noise_watts));
  require_finite(f_prev, 0);
  result.trace.push_back({0, f_prev, w.squaredNorm(), constraint_residual(state)});

  for (int iter = 1; iter <= s.max_outer; ++iter) {
    LinkContext ctx = make_context(served, state, w, s.noise_watts);
    Auxiliaries aux;
    aux.iota = update_iota(ctx);
    aux.tau = update_tau(ctx, aux.iota);

    const ComplexMatrix hbar = ctx.heff * aux.tau.asDiagonal();
    w = update_precoder(hbar, aux.iota, s.power_watts).w;
    state = update_surface(s, served, state, w, aux);

    const double f = sum_rate(make_context(served, state, w, s.noise_watts));
    require_finite(f, iter);
    result.trace.push_back({iter, f, w.squaredNorm(), constraint_residual(state)});
    result.iterations = iter;
    const double change = std::abs(f - f_prev) / std::max(f_prev, 1e-12);
    f_prev = f;
    if (change < s.rel_tol) {
      result.converged = true;
      break;
    }
  }

  result.w = ComplexMatrix::Zero(s.bs_antennas, cs.users());
  for (std::size_t j = 0; j < users.size(); ++j)
    result.w.col(users[j]) = w.col(Index(j));
  result.state = std::move(state);
  result.sum_rate = evaluate(result.w, result.state, cs, s.noise_watts);
  result.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return result;
}

double evaluate(const ComplexMatrix &w, const BdRisState &state,
                const ChannelSet &cs, double noise) {
  if (w.rows() != cs.bs_antennas() || w.cols() != cs.users() ||
      state.cells() != cs.cells())
    throw std::invalid_argument("evaluate: dimension mismatch");
  const ComplexMatrix heff = effective_channels(state, cs);
  const ComplexMatrix c = heff.adjoint() * w; // c(k, p) = h~_k^H w_p
  double total = 0.0;
  for (int k = 0; k < cs.users(); ++k) {
    const double signal = std::norm(c(k, k));
    const double interference = c.row(k).squaredNorm() - signal;
    total += std::log2(1.0 + signal / (interference + noise));
  }
  return total;
}

} // namespace bdris
