#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cecran/numerics.hpp"

using namespace cecran;
using namespace cecran::numerics;

namespace {

cmat random_matrix(std::mt19937_64& g, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  cmat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = cplx(n(g), n(g));
  return m;
}

cmat random_psd(std::mt19937_64& g, int d) {
  const cmat x = random_matrix(g, d, d);
  return x * x.adjoint();
}

// log2 det(I + B^{-1} A) from the generalized eigenvalues of (A, B).
double psi_oracle(const cmat& A, const cmat& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<cmat> es(A, B);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) s += std::log2(1.0 + es.eigenvalues()(i));
  return s;
}

cmat scalar(double v) { return cmat::Constant(1, 1, v); }

}  // namespace

TEST(psi, zero_signal_is_zero) {
  std::mt19937_64 g(1);
  EXPECT_DOUBLE_EQ(psi(cmat::Zero(3, 3), random_psd(g, 3) + cmat::Identity(3, 3)), 0.0);
}

TEST(psi, scalar_snr_100) { EXPECT_NEAR(psi(scalar(100), scalar(1)), std::log2(101.0), 1e-12); }

TEST(psi, identity_pair_gives_two_bits) {
  EXPECT_NEAR(psi(cmat::Identity(2, 2), cmat::Identity(2, 2)), 2.0, 1e-12);
}

TEST(psi, singular_noise_throws) {
  EXPECT_THROW(psi(cmat::Identity(2, 2), cmat::Zero(2, 2)), std::domain_error);
}

TEST(psi, matches_generalized_eigenvalues) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 200; ++t) {
    const cmat A = random_psd(g, 3);
    const cmat B = random_psd(g, 3) + 0.1 * cmat::Identity(3, 3);
    EXPECT_NEAR(psi(A, B), psi_oracle(A, B), 1e-9 * std::max(1.0, psi_oracle(A, B)));
  }
}

TEST(psi, monotone_in_signal_and_noise) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 200; ++t) {
    const cmat A = random_psd(g, 2);
    const cmat B = random_psd(g, 2) + 0.1 * cmat::Identity(2, 2);
    const cmat P = random_psd(g, 2);
    EXPECT_GE(psi(A + P, B), psi(A, B) - 1e-12);
    EXPECT_LE(psi(A, B + P), psi(A, B) + 1e-12);
  }
}

TEST(phi, zero_aux_is_zero) {
  std::mt19937_64 g(4);
  const cmat C = random_matrix(g, 3, 2);
  const cmat D = random_psd(g, 3);
  EXPECT_NEAR(phi(cmat::Zero(2, 2), cmat::Zero(3, 2), C, D), 0.0, 1e-15);
}

TEST(phi, shape_mismatch_throws) {
  EXPECT_THROW(phi(cmat::Zero(2, 2), cmat::Zero(3, 1), cmat::Zero(3, 2), cmat::Zero(3, 3)), std::invalid_argument);
}

TEST(phi, scalar_sinr_identity) {
  // two streams at one antenna, signal p|h|^2 against noise plus the other stream
  const double p = 7.0, q = 3.0;
  const cplx h(0.8, -0.3), h2(0.1, 0.5);
  cmat C(1, 1);
  C(0, 0) = std::sqrt(p) * h;
  const cmat D = scalar(1.0 + p * std::norm(h) + q * std::norm(h2));
  const FpAux aux = phi_optimal_aux(C, D);
  const double sinr = p * std::norm(h) / (1.0 + q * std::norm(h2));
  EXPECT_NEAR(aux.gamma(0, 0).real(), sinr, 1e-12);
  EXPECT_NEAR(phi(aux.gamma, aux.theta, C, D), std::log2(1.0 + sinr), 1e-12);
}

TEST(phi, optimal_aux_reproduces_psi_on_random_instances) {
  std::mt19937_64 g(5);
  for (int t = 0; t < 1000; ++t) {
    const int d = 1 + t % 2;
    const int m = 1 + (t / 2) % 2;
    const cmat C = random_matrix(g, d, m);
    const cmat N = random_psd(g, d) + 0.05 * cmat::Identity(d, d);
    const cmat D = N + C * C.adjoint();
    const FpAux aux = phi_optimal_aux(C, D);
    const double ref = psi_oracle(C * C.adjoint(), N);
    EXPECT_NEAR(phi(aux.gamma, aux.theta, C, D), ref, 1e-9 * std::max(1.0, ref));
  }
}

TEST(phi, perturbed_aux_is_a_lower_bound) {
  std::mt19937_64 g(6);
  for (int t = 0; t < 200; ++t) {
    const cmat C = random_matrix(g, 2, 2);
    const cmat D = random_psd(g, 2) + cmat::Identity(2, 2) + C * C.adjoint();
    const FpAux aux = phi_optimal_aux(C, D);
    const double best = phi(aux.gamma, aux.theta, C, D);
    const cmat dB = 0.1 * random_matrix(g, 2, 2);
    const cmat dA = 0.1 * random_psd(g, 2);
    EXPECT_LT(phi(aux.gamma, aux.theta + dB, C, D), best);
    EXPECT_LT(phi(aux.gamma + dA, aux.theta, C, D), best);
  }
}

TEST(logdet2, small_cases) {
  EXPECT_NEAR(logdet2(cmat::Identity(3, 3)), 0.0, 1e-15);
  EXPECT_NEAR(logdet2(2.0 * cmat::Identity(2, 2)), 2.0, 1e-14);
  cmat m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  EXPECT_NEAR(logdet2(m), std::log2(3.0), 1e-14);
  EXPECT_THROW(logdet2(-cmat::Identity(2, 2)), std::domain_error);
}

TEST(logdet2, equals_sum_of_log_eigenvalues) {
  std::mt19937_64 g(7);
  for (int t = 0; t < 100; ++t) {
    const cmat M = random_psd(g, 4) + 0.01 * cmat::Identity(4, 4);
    Eigen::SelfAdjointEigenSolver<cmat> es(M);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::log2(es.eigenvalues()(i));
    EXPECT_NEAR(logdet2(M), s, 1e-9 * std::max(1.0, std::abs(s)));
  }
}

TEST(hermitian_sqrt, cases) {
  EXPECT_TRUE(hermitian_sqrt(cmat::Identity(3, 3)).isApprox(cmat::Identity(3, 3), 1e-14));
  cmat d = cmat::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const cmat s = hermitian_sqrt(d);
  EXPECT_NEAR(s(0, 0).real(), 2.0, 1e-14);
  EXPECT_NEAR(s(1, 1).real(), 3.0, 1e-14);
  EXPECT_THROW(hermitian_sqrt(-cmat::Identity(2, 2)), std::domain_error);
  std::mt19937_64 g(8);
  for (int t = 0; t < 50; ++t) {
    const cmat M = random_psd(g, 4);
    const cmat r = hermitian_sqrt(M);
    EXPECT_LT((r * r - M).norm(), 1e-10 * M.norm());
    EXPECT_TRUE(is_hermitian(r));
  }
}

TEST(symmetrize, cases) {
  std::mt19937_64 g(9);
  const cmat M = random_psd(g, 3);
  const cmat h = 0.5 * (M + M.adjoint());
  EXPECT_TRUE(symmetrize(h).isApprox(h, 1e-12));
  cmat a = h;
  a(0, 1) += 1e-14;
  EXPECT_TRUE(is_hermitian(symmetrize(a), 0.0));
  cmat neg = cmat::Zero(2, 2);
  neg(0, 0) = 1.0;
  neg(1, 1) = -1e-12;
  const cmat c = symmetrize(neg);
  EXPECT_GE(min_eigenvalue(c), 0.0);
  EXPECT_NEAR(c(1, 1).real(), 0.0, 1e-20);
}

TEST(regularized_inverse, well_conditioned_is_exact) {
  std::mt19937_64 g(10);
  const cmat M = random_psd(g, 3) + cmat::Identity(3, 3);
  EXPECT_LT((regularized_inverse(M) * M - cmat::Identity(3, 3)).norm(), 1e-10);
}

TEST(regularized_inverse, singular_input_is_bumped) {
  cmat M = cmat::Zero(2, 2);
  M(0, 0) = 1.0;
  const cmat inv = regularized_inverse(M);
  EXPECT_TRUE(inv.allFinite());
  EXPECT_NEAR(inv(0, 0).real(), 1.0 / (1.0 + 1e-12), 1e-12);
}
