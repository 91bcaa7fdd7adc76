#pragma once

#include <cmath>
#include <complex>
#include <span>

#include <Eigen/Dense>

namespace bdris {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Dense complex matrix, row-major.
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RealVector = Eigen::VectorXd;

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Half-open index range [begin, end).
struct IndexRange {
  Index begin = 0;
  Index end = 0;

  Index size() const { return end - begin; }
};

/// Assemble a block-diagonal matrix from square or rectangular blocks.
/// Off-block entries are exactly zero. Throws std::invalid_argument on an
/// empty list.
ComplexMatrix blkdiag_assemble(std::span<const ComplexMatrix> blocks);

/// Contiguous submatrix copy. Throws std::invalid_argument when a range falls
/// outside the matrix.
ComplexMatrix block_slice(const ComplexMatrix &a, IndexRange rows,
                          IndexRange cols);

/// Hermitian inverse square root R = (A + ridge I)^{-1/2} via
/// eigendecomposition. Eigenvalues below 1e-14 are clamped to 1e-14.
/// Throws std::invalid_argument if A is not Hermitian to within 1e-8.
ComplexMatrix principal_inverse_sqrt(const ComplexMatrix &a, double ridge);

/// Solve (A + lambda I) x = b for Hermitian PSD A. When lambda is zero and A
/// is singular a ridge of 1e-12 * trace(A) / N is added.
ComplexVector regularized_hermitian_solve(const ComplexMatrix &a,
                                          double lambda,
                                          const ComplexVector &b);
ComplexMatrix regularized_hermitian_solve(const ComplexMatrix &a,
                                          double lambda,
                                          const ComplexMatrix &b);

/// ||A - A^H||_F.
double hermitian_asymmetry(const ComplexMatrix &a);

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived> &a) {
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag()))
        return false;
  return true;
}

/// Real inner product Re Tr(A^H B).
inline double real_inner(const ComplexMatrix &a, const ComplexMatrix &b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

} // namespace bdris
