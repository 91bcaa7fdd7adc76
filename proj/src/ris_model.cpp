#include "bdris/ris_model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace bdris {

namespace {

void require_dims(const ComplexMatrix &phi_t, const ComplexMatrix &phi_r) {
  if (phi_t.rows() != phi_t.cols() || phi_r.rows() != phi_r.cols() ||
      phi_t.rows() != phi_r.rows())
    throw std::invalid_argument("BD-RIS matrices must both be M x M");
}

double group_residual(const ComplexMatrix &phi_t, const ComplexMatrix &phi_r,
                      IndexRange r) {
  const ComplexMatrix t = block_slice(phi_t, r, r);
  const ComplexMatrix q = block_slice(phi_r, r, r);
  ComplexMatrix gram = t.adjoint() * t + q.adjoint() * q;
  gram.diagonal().array() -= 1.0;
  return gram.norm();
}

} // namespace

IndexRange group_range(int group, int group_size) {
  return {Index(group) * group_size, Index(group + 1) * group_size};
}

double constraint_residual(const BdRisState &state) {
  const int m = state.cells();
  const int size = state.arch.group_size(m);
  double worst = 0.0;
  for (int g = 0; g < state.arch.group_count(m); ++g)
    worst = std::max(worst, group_residual(state.phi_t, state.phi_r,
                                           group_range(g, size)));
  return worst;
}

ValidationResult validate(const BdRisState &state, double tol) {
  require_dims(state.phi_t, state.phi_r);
  const int m = state.cells();
  ValidationResult result;

  if (state.arch.kind == ArchKind::kGroup &&
      (state.arch.groups < 1 || m % state.arch.groups != 0))
    throw std::invalid_argument("group count does not divide M");

  const int size = state.arch.group_size(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (i / size == j / size)
        continue;
      if (state.phi_t(i, j) != Complex(0) || state.phi_r(i, j) != Complex(0)) {
        std::ostringstream msg;
        msg << "structural: entry (" << i << ", " << j
            << ") outside the block pattern of a " << to_string(state.arch)
            << " architecture is non-zero";
        return {false, 0.0, msg.str()};
      }
    }
  }

  if (state.mode == Mode::kReflective && !state.phi_t.isZero(0.0))
    return {false, 0.0, "mode: reflective surface has non-zero Phi_t"};
  if (state.mode == Mode::kTransmissive && !state.phi_r.isZero(0.0))
    return {false, 0.0, "mode: transmissive surface has non-zero Phi_r"};

  result.residual = constraint_residual(state);
  if (!(result.residual <= tol)) {
    std::ostringstream msg;
    msg << "unitarity: residual " << result.residual << " exceeds " << tol;
    result.ok = false;
    result.diagnostic = msg.str();
  }
  return result;
}

ComplexVector effective_channel(const BdRisState &state, const ChannelSet &cs,
                                int user) {
  const ComplexMatrix &phi = state.phi(cs.sides.at(user));
  return cs.g.adjoint() * (phi.adjoint() * cs.h[user]);
}

ComplexMatrix effective_channels(const BdRisState &state,
                                 const ChannelSet &cs) {
  ComplexMatrix out(cs.bs_antennas(), cs.users());
  for (int k = 0; k < cs.users(); ++k)
    out.col(k) = effective_channel(state, cs, k);
  return out;
}

bool validate_lossless_partition(const ComplexMatrix &phi_r,
                                 const ComplexMatrix &phi_t, double tol) {
  if (phi_r.rows() != phi_r.cols() || phi_t.rows() != phi_t.cols() ||
      phi_r.rows() != phi_t.rows())
    return false;
  ComplexMatrix gram = phi_r.adjoint() * phi_r + phi_t.adjoint() * phi_t;
  gram.diagonal().array() -= 1.0;
  return gram.norm() <= tol;
}

BdRisState project_to_case(const ComplexMatrix &phi_t,
                           const ComplexMatrix &phi_r, Mode mode,
                           Architecture arch) {
  require_dims(phi_t, phi_r);
  const int m = int(phi_t.rows());
  if (arch.kind == ArchKind::kGroup && (arch.groups < 1 || m % arch.groups))
    throw std::invalid_argument("group count does not divide M");

  BdRisState out{mode, arch, ComplexMatrix::Zero(m, m),
                 ComplexMatrix::Zero(m, m)};
  const bool use_t = mode != Mode::kReflective;
  const bool use_r = mode != Mode::kTransmissive;
  const int size = arch.group_size(m);
  const int active = int(use_t) + int(use_r);

  for (int g = 0; g < arch.group_count(m); ++g) {
    const IndexRange r = group_range(g, size);
    ComplexMatrix stacked(active * size, size);
    int row = 0;
    if (use_t) {
      stacked.middleRows(row, size) = block_slice(phi_t, r, r);
      row += size;
    }
    if (use_r)
      stacked.middleRows(row, size) = block_slice(phi_r, r, r);

    if (stacked.isZero(0.0))
      throw DegenerateInputError("project_to_case: group " + std::to_string(g) +
                                 " is all-zero after masking");
    const ComplexMatrix polar =
        stacked * principal_inverse_sqrt(stacked.adjoint() * stacked, 0.0);

    row = 0;
    if (use_t) {
      out.phi_t.block(r.begin, r.begin, size, size) = polar.middleRows(row, size);
      row += size;
    }
    if (use_r)
      out.phi_r.block(r.begin, r.begin, size, size) = polar.middleRows(row, size);

    if (group_residual(out.phi_t, out.phi_r, r) > kConstraintTolerance)
      throw DegenerateInputError("project_to_case: group " + std::to_string(g) +
                                 " is rank-deficient");
  }
  return out;
}

} // namespace bdris
