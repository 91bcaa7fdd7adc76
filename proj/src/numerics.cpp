#include "bdris/numerics.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bdris {

namespace {

constexpr double kEigenvalueFloor = 1e-14;
constexpr double kAsymmetryLimit = 1e-8;

void require_square(const ComplexMatrix &a, const char *what) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(what) + ": matrix is not square");
}

ComplexMatrix hermitian_part(const ComplexMatrix &a) {
  return 0.5 * (a + a.adjoint());
}

} // namespace

ComplexMatrix blkdiag_assemble(std::span<const ComplexMatrix> blocks) {
  if (blocks.empty())
    throw std::invalid_argument("blkdiag_assemble: empty block list");
  Index rows = 0;
  Index cols = 0;
  for (const auto &b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
  Index r = 0;
  Index c = 0;
  for (const auto &b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

ComplexMatrix block_slice(const ComplexMatrix &a, IndexRange rows,
                          IndexRange cols) {
  const bool bad_rows =
      rows.begin < 0 || rows.end > a.rows() || rows.begin > rows.end;
  const bool bad_cols =
      cols.begin < 0 || cols.end > a.cols() || cols.begin > cols.end;
  if (bad_rows || bad_cols)
    throw std::invalid_argument("block_slice: range out of bounds");
  return a.block(rows.begin, cols.begin, rows.size(), cols.size());
}

double hermitian_asymmetry(const ComplexMatrix &a) {
  return (a - a.adjoint()).norm();
}

ComplexMatrix principal_inverse_sqrt(const ComplexMatrix &a, double ridge) {
  require_square(a, "principal_inverse_sqrt");
  if (ridge < 0)
    throw std::invalid_argument("principal_inverse_sqrt: negative ridge");
  if (hermitian_asymmetry(a) > kAsymmetryLimit * std::max(1.0, a.norm()))
    throw std::invalid_argument("principal_inverse_sqrt: input not Hermitian");

  ComplexMatrix h = hermitian_part(a);
  h.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("principal_inverse_sqrt: eigensolver failed");

  RealVector scale = eig.eigenvalues().cwiseMax(kEigenvalueFloor).cwiseSqrt()
                         .cwiseInverse();
  const ComplexMatrix &v = eig.eigenvectors();
  ComplexMatrix r = v * scale.cast<Complex>().asDiagonal() * v.adjoint();
  return hermitian_part(r);
}

ComplexMatrix regularized_hermitian_solve(const ComplexMatrix &a,
                                          double lambda,
                                          const ComplexMatrix &b) {
  require_square(a, "regularized_hermitian_solve");
  if (b.rows() != a.rows())
    throw std::invalid_argument("regularized_hermitian_solve: dimension "
                                "mismatch");
  if (lambda < 0)
    throw std::invalid_argument("regularized_hermitian_solve: negative "
                                "lambda");

  const Index n = a.rows();
  ComplexMatrix m = hermitian_part(a);
  m.diagonal().array() += lambda;

  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() == Eigen::Success)
    return llt.solve(b);

  // Singular (or numerically indefinite): fall back on the ridge.
  const double ridge = 1e-12 * std::abs(a.trace().real()) / double(n);
  if (!(ridge > 0) && lambda == 0)
    throw std::invalid_argument("regularized_hermitian_solve: zero matrix "
                                "with zero lambda");
  m.diagonal().array() += ridge;
  Eigen::LDLT<ComplexMatrix> ldlt(m);
  return ldlt.solve(b);
}

ComplexVector regularized_hermitian_solve(const ComplexMatrix &a,
                                          double lambda,
                                          const ComplexVector &b) {
  ComplexMatrix rhs = b;
  ComplexMatrix x = regularized_hermitian_solve(a, lambda, rhs);
  return x.col(0);
}

} // namespace bdris
