#pragma once

#include "cecran/types.hpp"

namespace cecran::numerics {

/// log2 det(I + B^{-1} A) for Hermitian PSD A and Hermitian PD B.
/// Throws std::domain_error when B is not positive definite.
double psi(const cmat& A, const cmat& B);

/// Matrix quadratic-transform functional
///   log2 det(I + A) - tr(A)/ln2 + Re tr((I + A)(2 C^H B - B^H D B))/ln2
/// with A m x m, B and C d x m, D d x d.
/// Throws std::invalid_argument on shape mismatch.
double phi(const cmat& A, const cmat& B, const cmat& C, const cmat& D);

/// Auxiliary pair (A, B) at which phi(A, B, C, D) equals psi(C C^H, D - C C^H).
struct FpAux {
  cmat gamma;  // C^H (D - C C^H)^{-1} C
  cmat theta;  // D^{-1} C
};
FpAux phi_optimal_aux(const cmat& C, const cmat& D);

/// Base-2 log-determinant of a Hermitian positive definite matrix (Cholesky).
double logdet2(const cmat& M);

/// Hermitian PSD square root through the eigendecomposition.
cmat hermitian_sqrt(const cmat& M);

/// (M + M^H)/2 with negative eigenvalues clipped to zero.
cmat symmetrize(const cmat& M);

/// Smallest eigenvalue of the Hermitian part of M.
double min_eigenvalue(const cmat& M);

/// Inverse of a Hermitian PD matrix. Adds 1e-12 tr(M) to the diagonal when
/// the condition number exceeds 1e12.
cmat regularized_inverse(const cmat& M);

bool is_hermitian(const cmat& M, double rel_tol = 1e-12);

}  // namespace cecran::numerics
