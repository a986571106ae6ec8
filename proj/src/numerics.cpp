#include "cecran/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cecran::numerics {

namespace {

cmat hermitian_part(const cmat& M) { return 0.5 * (M + M.adjoint()); }

void require_square(const cmat& M, const char* what) {
  if (M.rows() != M.cols()) throw std::invalid_argument(std::string(what) + ": matrix not square");
}

}  // namespace

bool is_hermitian(const cmat& M, double rel_tol) {
  if (M.rows() != M.cols()) return false;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M - M.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double min_eigenvalue(const cmat& M) {
  require_square(M, "min_eigenvalue");
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<cmat> es(hermitian_part(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double logdet2(const cmat& M) {
  require_square(M, "logdet2");
  Eigen::LLT<cmat> llt(hermitian_part(M));
  if (llt.info() != Eigen::Success) throw std::domain_error("logdet2: matrix not positive definite");
  double acc = 0.0;
  const auto& L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    const double d = L(i, i).real();
    if (!(d > 0.0)) throw std::domain_error("logdet2: matrix not positive definite");
    acc += std::log(d);
  }
  return 2.0 * acc / ln2;
}

double psi(const cmat& A, const cmat& B) {
  require_square(A, "psi");
  require_square(B, "psi");
  if (A.rows() != B.rows()) throw std::invalid_argument("psi: dimension mismatch");
  Eigen::LLT<cmat> llt(hermitian_part(B));
  if (llt.info() != Eigen::Success || min_eigenvalue(B) <= 0.0)
    throw std::domain_error("psi: B not positive definite");
  // log det(B + A) - log det(B) keeps the argument Hermitian.
  return std::max(0.0, logdet2(hermitian_part(B + A)) - logdet2(B));
}

double phi(const cmat& A, const cmat& B, const cmat& C, const cmat& D) {
  const auto m = A.rows();
  if (A.cols() != m || B.cols() != m || C.cols() != m || B.rows() != C.rows() ||
      D.rows() != B.rows() || D.cols() != B.rows())
    throw std::invalid_argument("phi: shape mismatch");
  const cmat I = cmat::Identity(m, m);
  const cmat IA = I + A;
  Eigen::PartialPivLU<cmat> lu(IA);
  const double ld = std::log(std::abs(lu.determinant())) / ln2;
  const double trA = A.trace().real();
  const cmat inner = 2.0 * C.adjoint() * B - B.adjoint() * D * B;
  const double tr = (IA * inner).trace().real();
  return ld - trA / ln2 + tr / ln2;
}

FpAux phi_optimal_aux(const cmat& C, const cmat& D) {
  if (D.rows() != D.cols() || C.rows() != D.rows()) throw std::invalid_argument("phi_optimal_aux: shape mismatch");
  const cmat N = D - C * C.adjoint();
  FpAux aux;
  aux.gamma = C.adjoint() * regularized_inverse(N) * C;
  aux.gamma = hermitian_part(aux.gamma);
  aux.theta = regularized_inverse(D) * C;
  return aux;
}

cmat regularized_inverse(const cmat& M) {
  require_square(M, "regularized_inverse");
  const cmat H = hermitian_part(M);
  Eigen::SelfAdjointEigenSolver<cmat> es(H);
  const rvec& ev = es.eigenvalues();
  const double hi = ev.maxCoeff();
  const double lo = ev.minCoeff();
  cmat R = H;
  if (!(lo > 0.0) || hi / lo > 1e12) {
    const double bump = 1e-12 * std::max(H.trace().real(), 1e-300);
    R += bump * cmat::Identity(H.rows(), H.cols());
  }
  Eigen::LLT<cmat> llt(R);
  if (llt.info() != Eigen::Success) throw std::domain_error("regularized_inverse: matrix not positive definite");
  return hermitian_part(llt.solve(cmat::Identity(R.rows(), R.cols())));
}

cmat hermitian_sqrt(const cmat& M) {
  require_square(M, "hermitian_sqrt");
  if (M.rows() == 0) return M;
  Eigen::SelfAdjointEigenSolver<cmat> es(hermitian_part(M));
  rvec ev = es.eigenvalues();
  const double scale = std::max(std::abs(ev.maxCoeff()), 1e-300);
  if (ev.minCoeff() < -1e-10 * scale) throw std::domain_error("hermitian_sqrt: matrix not PSD");
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
  const cmat& U = es.eigenvectors();
  return hermitian_part(U * ev.cast<cplx>().asDiagonal() * U.adjoint());
}

cmat symmetrize(const cmat& M) {
  require_square(M, "symmetrize");
  cmat H = hermitian_part(M);
  if (H.rows() == 0) return H;
  Eigen::SelfAdjointEigenSolver<cmat> es(H);
  if (es.eigenvalues().minCoeff() >= 0.0) return H;
  rvec ev = es.eigenvalues().cwiseMax(0.0);
  const cmat& U = es.eigenvectors();
  return hermitian_part(U * ev.cast<cplx>().asDiagonal() * U.adjoint());
}

}  // namespace cecran::numerics
