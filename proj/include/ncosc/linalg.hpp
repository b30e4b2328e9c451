#pragma once

// Dense Hermitian eigendecomposition and the exact exponentials built on it.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

#include "ncosc/errors.hpp"

namespace ncosc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

/// Largest |A_ij - conj(A_ji)|.
inline double hermiticity_error(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct HermitianEigen {
  RealVector values;
  Matrix vectors;
};

inline HermitianEigen hermitian_eigen(const Matrix& h, bool with_vectors = true) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      h, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw numerical_failure("Hermitian eigensolver did not converge");
  HermitianEigen out;
  out.values = solver.eigenvalues();
  if (with_vectors) out.vectors = solver.eigenvectors();
  return out;
}

/// exp(i * s * K) for Hermitian K, formed from the eigendecomposition so the
/// result is unitary to working precision.
inline Matrix unitary_exp(const Matrix& k, double s) {
  const HermitianEigen eig = hermitian_eigen(k);
  Vector phases(eig.values.size());
  for (Eigen::Index i = 0; i < phases.size(); ++i)
    phases[i] = std::exp(I_unit * (s * eig.values[i]));
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace ncosc
