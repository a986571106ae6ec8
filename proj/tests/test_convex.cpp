#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cecran/convex.hpp"

using namespace cecran;
using namespace cecran::convex;

namespace {

AffineExpr var(const ConvexProblem& p, int v, double coeff = 1.0) {
  AffineExpr e;
  e.add(p.coord(v), coeff);
  return e;
}

AffineExpr constant(double c) { return AffineExpr(c); }

cmat random_matrix(std::mt19937_64& g, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  cmat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = cplx(n(g), n(g));
  return m;
}

}  // namespace

TEST(solve, single_affine_bound) {
  ConvexProblem p;
  const int t = p.add_free("t");
  p.objective = t;
  AffineExpr e = var(p, t, -1.0);
  e.constant = 3.0;
  p.add("t>=3", AffineLe{e});
  const ConvexSolution s = solve(p);
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 3.0, 1e-5 * 3.0);
  EXPECT_LE(s.residual, 1e-7);
}

TEST(solve, hyperbolic_hand_solution) {
  ConvexProblem p;
  const int tau = p.add_nonneg("tau");
  const int u = p.add_box("u", 0.0, 0.5);
  p.objective = tau;
  p.add("tau*u>=1", Hyperbolic{var(p, tau), var(p, u), 1.0});
  const ConvexSolution s = solve(p);
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 2.0, 2e-5);
  EXPECT_NEAR(scalar_value(p, s.x, u), 0.5, 1e-5);
}

TEST(solve, logdet_monotonicity_case) {
  // minimize -(gamma + log2 omega) s.t. omega <= 2, gamma <= 0
  ConvexProblem p;
  const int t = p.add_free("t");
  const int gamma = p.add_box("gamma", -std::numeric_limits<double>::infinity(), 0.0);
  const int ell = p.add_free("ell");
  const int omega = p.add_hermitian("omega", 1, 1e-9);
  p.objective = t;
  AffineExpr epi = var(p, t, -1.0);
  epi.add(p.coord(gamma), -1.0).add(p.coord(ell), -1.0);
  p.add("epigraph", AffineLe{epi});
  p.add("ell<=log2(omega)", LogdetGe{omega, var(p, ell)});
  AffineExpr cap(-2.0);
  p.add_re_trace(cap, omega, cmat::Identity(1, 1));
  p.add("omega<=2", AffineLe{cap});
  const ConvexSolution s = solve(p);
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, -1.0, 1e-5);
  EXPECT_NEAR(hermitian_value(p, s.x, omega)(0, 0).real(), 2.0, 1e-4);
  EXPECT_NEAR(scalar_value(p, s.x, gamma), 0.0, 1e-4);
}

TEST(solve, matrix_logdet_under_weighted_trace) {
  // max log2 det(Omega) s.t. tr(A Omega) <= n has Omega = A^{-1}
  std::mt19937_64 g(21);
  const cmat X = random_matrix(g, 3, 3);
  const cmat A = X * X.adjoint() + cmat::Identity(3, 3);
  ConvexProblem p;
  const int t = p.add_free("t");
  const int ell = p.add_free("ell");
  const int omega = p.add_hermitian("omega", 3, 1e-9);
  p.objective = t;
  AffineExpr epi = var(p, t, -1.0);
  epi.add(p.coord(ell), -1.0);
  p.add("epigraph", AffineLe{epi});
  p.add("logdet", LogdetGe{omega, var(p, ell)});
  AffineExpr cap(-3.0);
  p.add_re_trace(cap, omega, A);
  p.add("power", AffineLe{cap});
  rvec start = default_point(p);
  set_hermitian(p, start, omega, 0.1 * cmat::Identity(3, 3));
  const ConvexSolution s = solve(p, {}, start);
  Eigen::SelfAdjointEigenSolver<cmat> es(A);
  double ref = 0.0;
  for (int i = 0; i < 3; ++i) ref -= std::log2(es.eigenvalues()(i));
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(-s.objective, ref, 1e-5 * std::max(1.0, std::abs(ref)));
  EXPECT_LT((hermitian_value(p, s.x, omega) - A.inverse()).norm(), 1e-3);
}

TEST(solve, square_le) {
  ConvexProblem p;
  const int o = p.add_free("o");
  const int t = p.add_free("t");
  const int x = p.add_box("x", 0.0, 4.0);
  p.objective = o;
  AffineExpr e = var(p, o, -1.0);
  e.add(p.coord(t), -1.0);
  p.add("o>=-t", AffineLe{e});
  p.add("t^2<=x", SquareLe{p.coord(t), var(p, x)});
  const ConvexSolution s = solve(p);
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, -2.0, 2e-5);
}

TEST(solve, sqrt_concave) {
  // 2 sqrt(tau) - 0.5 >= 1/1 gives tau = 0.5625
  ConvexProblem p;
  const int tau = p.add_nonneg("tau");
  p.objective = tau;
  SqrtConcaveGe c;
  c.lambda = 1.0;
  c.tau = var(p, tau);
  c.v = constant(0.5);
  c.kappa = 1.0;
  c.w = constant(1.0);
  p.add("sqrt", c);
  const ConvexSolution s = solve(p);
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 0.5625, 1e-5);
}

TEST(solve, sqrt_concave_with_variable_denominator) {
  // tau >= (kappa/w)^2 / 4 at lambda = 1, v = 0; w <= 2 so tau = 1 for kappa = 4
  ConvexProblem p;
  const int tau = p.add_nonneg("tau");
  const int w = p.add_box("w", 0.1, 2.0);
  p.objective = tau;
  SqrtConcaveGe c;
  c.lambda = 1.0;
  c.tau = var(p, tau);
  c.v = constant(0.0);
  c.kappa = 4.0;
  c.w = var(p, w);
  p.add("sqrt", c);
  const ConvexSolution s = solve(p);
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-5);
}

TEST(solve, psd_schur_min_trace) {
  // min tr(Q) s.t. Q >= R R^H, Re(a^H R) >= 1  ->  1/|a|^2
  std::mt19937_64 g(22);
  const cmat a = random_matrix(g, 2, 1);
  ConvexProblem p;
  const int t = p.add_free("t");
  const int Q = p.add_hermitian("Q", 2);
  const int R = p.add_complex("R", 2, 1);
  p.objective = t;
  AffineExpr epi = var(p, t, -1.0);
  p.add_re_trace(epi, Q, cmat::Identity(2, 2));
  p.add("epigraph", AffineLe{epi});
  p.add("schur", PsdSchur{Q, R});
  AffineExpr lin(1.0);
  p.add_re_trace(lin, R, a.adjoint(), -1.0);
  p.add("align", AffineLe{lin});
  const ConvexSolution s = solve(p);
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 1.0 / a.squaredNorm(), 1e-5);
  const cmat q = hermitian_value(p, s.x, Q), r = complex_value(p, s.x, R);
  Eigen::SelfAdjointEigenSolver<cmat> es(q - r * r.adjoint());
  EXPECT_GE(es.eigenvalues()(0), -1e-8);
}

TEST(solve, quad_trace) {
  // max Re tr(B^H X) s.t. tr(X^H W X) <= 1  ->  sqrt(tr(B^H W^{-1} B))
  std::mt19937_64 g(23);
  const cmat Y = random_matrix(g, 2, 2);
  const cmat W = Y * Y.adjoint() + 0.5 * cmat::Identity(2, 2);
  const cmat B = random_matrix(g, 2, 2);
  ConvexProblem p;
  const int t = p.add_free("t");
  const int X = p.add_complex("X", 2, 2);
  p.objective = t;
  AffineExpr epi = var(p, t, -1.0);
  p.add_re_trace(epi, X, B.adjoint(), -1.0);
  p.add("epigraph", AffineLe{epi});
  p.add("energy", QuadTraceLe{{{X, W}}, constant(1.0)});
  const ConvexSolution s = solve(p);
  const double ref = std::sqrt((B.adjoint() * W.inverse() * B).trace().real());
  EXPECT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(-s.objective, ref, 1e-5 * ref);
}

TEST(solve, infeasible_problem_is_flagged) {
  ConvexProblem p;
  const int t = p.add_free("t");
  p.objective = t;
  AffineExpr lo = var(p, t, -1.0);
  lo.constant = 3.0;
  AffineExpr hi = var(p, t, 1.0);
  hi.constant = -2.0;
  p.add("t>=3", AffineLe{lo});
  p.add("t<=2", AffineLe{hi});
  EXPECT_EQ(solve(p).status, Status::infeasible);
}

TEST(solve, start_outside_hard_domain_throws) {
  ConvexProblem p;
  const int tau = p.add_nonneg("tau");
  const int u = p.add_box("u", 0.0, 0.5);
  p.objective = tau;
  p.add("hyp", Hyperbolic{var(p, tau), var(p, u), 1.0});
  rvec x = default_point(p);
  x(p.coord(u)) = -1.0;
  EXPECT_THROW(solve(p, {}, x), std::domain_error);
}

TEST(solve, iteration_budget_reports_max_iter) {
  ConvexProblem p;
  const int tau = p.add_nonneg("tau");
  const int u = p.add_box("u", 0.0, 0.5);
  p.objective = tau;
  p.add("hyp", Hyperbolic{var(p, tau), var(p, u), 1.0});
  SolverOptions o;
  o.max_newton = 2;
  EXPECT_EQ(solve(p, o).status, Status::max_iter);
}

TEST(solve, deterministic) {
  std::mt19937_64 g(24);
  const cmat a = random_matrix(g, 2, 1);
  ConvexProblem p;
  const int t = p.add_free("t");
  const int Q = p.add_hermitian("Q", 2);
  const int R = p.add_complex("R", 2, 1);
  p.objective = t;
  AffineExpr epi = var(p, t, -1.0);
  p.add_re_trace(epi, Q, cmat::Identity(2, 2));
  p.add("epigraph", AffineLe{epi});
  p.add("schur", PsdSchur{Q, R});
  AffineExpr lin(1.0);
  p.add_re_trace(lin, R, a.adjoint(), -1.0);
  p.add("align", AffineLe{lin});
  const ConvexSolution x = solve(p), y = solve(p);
  EXPECT_EQ(x.x, y.x);
  EXPECT_EQ(x.newton_steps, y.newton_steps);
}

TEST(check_feasibility, affine_cases) {
  ConvexProblem p;
  const int t = p.add_free("t");
  p.objective = t;
  AffineExpr e = var(p, t, -1.0);
  e.constant = 3.0;
  p.add("t>=3", AffineLe{e});
  rvec x(1);
  x << 5.0;
  EXPECT_EQ(check_feasibility(p, x), 0.0);
  x << 3.0;
  EXPECT_NEAR(check_feasibility(p, x), 0.0, 1e-15);
  x << 2.0;
  EXPECT_NEAR(check_feasibility(p, x), 1.0, 1e-15);
}

TEST(check_feasibility, domain_bounds_count) {
  ConvexProblem p;
  const int u = p.add_box("u", 0.0, 0.5);
  const int Q = p.add_hermitian("Q", 2, 0.25);
  p.objective = u;
  rvec x = default_point(p);
  EXPECT_EQ(check_feasibility(p, x), 0.0);
  x(p.coord(u)) = 0.75;
  EXPECT_NEAR(check_feasibility(p, x), 0.25, 1e-15);
  x(p.coord(u)) = 0.25;
  set_hermitian(p, x, Q, 0.0 * cmat::Identity(2, 2));
  EXPECT_NEAR(check_feasibility(p, x), 0.25, 1e-15);
}

TEST(layout, hermitian_and_complex_round_trip) {
  std::mt19937_64 g(25);
  ConvexProblem p;
  const int H = p.add_hermitian("H", 3);
  const int C = p.add_complex("C", 3, 2);
  p.objective = -1;
  const cmat h0 = random_matrix(g, 3, 3);
  const cmat h = h0 + h0.adjoint();
  const cmat c = random_matrix(g, 3, 2);
  rvec x = rvec::Zero(p.num_coords());
  EXPECT_EQ(p.num_coords(), 9 + 12);
  set_hermitian(p, x, H, h);
  set_complex(p, x, C, c);
  EXPECT_LT((hermitian_value(p, x, H) - h).norm(), 1e-14);
  EXPECT_EQ(complex_value(p, x, C), c);
}

TEST(layout, re_trace_matches_direct_evaluation) {
  std::mt19937_64 g(26);
  ConvexProblem p;
  const int H = p.add_hermitian("H", 3);
  const int C = p.add_complex("C", 3, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const cmat h0 = random_matrix(g, 3, 3);
    const cmat h = h0 + h0.adjoint();
    const cmat c = random_matrix(g, 3, 2);
    const cmat Mh = random_matrix(g, 3, 3), Mc = random_matrix(g, 2, 3);
    rvec x = rvec::Zero(p.num_coords());
    set_hermitian(p, x, H, h);
    set_complex(p, x, C, c);
    AffineExpr e(0.5);
    p.add_re_trace(e, H, Mh, 2.0);
    p.add_re_trace(e, C, Mc, -1.0);
    const double ref = 0.5 + 2.0 * (Mh * h).trace().real() - (Mc * c).trace().real();
    EXPECT_NEAR(e.eval(x), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(validate, rejects_bad_problems) {
  ConvexProblem p;
  const int t = p.add_free("t");
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.objective = t;
  AffineExpr e;
  e.add(5, 1.0);
  p.add("bad", AffineLe{e});
  EXPECT_THROW(p.validate(), std::invalid_argument);
  EXPECT_THROW(p.add_box("b", 1.0, 0.0), std::invalid_argument);
  ConvexProblem q;
  const int s = q.add_free("s");
  q.objective = s;
  q.add("schur", PsdSchur{s, s});
  EXPECT_THROW(q.validate(), std::invalid_argument);
}

TEST(convexity, midpoints_of_feasible_points_stay_feasible) {
  std::mt19937_64 g(27);
  std::uniform_real_distribution<double> U(0.01, 3.0);
  ConvexProblem p;
  const int a = p.add_nonneg("a");
  const int b = p.add_nonneg("b");
  const int c = p.add_nonneg("c");
  const int Q = p.add_hermitian("Q", 2);
  const int R = p.add_complex("R", 2, 1);
  p.objective = a;
  p.add("hyp", Hyperbolic{var(p, a), var(p, b), 1.3});
  SqrtConcaveGe sq;
  sq.lambda = 0.7;
  sq.tau = var(p, a);
  sq.v = var(p, c);
  sq.kappa = 0.2;
  sq.w = var(p, b);
  p.add("sqrt", sq);
  p.add("square", SquareLe{p.coord(c), var(p, a)});
  p.add("schur", PsdSchur{Q, R});
  std::vector<rvec> feasible;
  while (feasible.size() < 200) {
    rvec x = rvec::Zero(p.num_coords());
    x(p.coord(a)) = U(g);
    x(p.coord(b)) = U(g);
    x(p.coord(c)) = U(g);
    const cmat r = random_matrix(g, 2, 1);
    const cmat m = random_matrix(g, 2, 2);
    set_complex(p, x, R, r);
    set_hermitian(p, x, Q, r * r.adjoint() + 0.3 * m * m.adjoint() - 0.2 * cmat::Identity(2, 2));
    if (check_feasibility(p, x) == 0.0) feasible.push_back(x);
  }
  for (std::size_t i = 0; i + 1 < feasible.size(); i += 2)
    EXPECT_LE(check_feasibility(p, 0.5 * (feasible[i] + feasible[i + 1])), 1e-12);
}

TEST(dump, one_line_per_item) {
  ConvexProblem p;
  const int t = p.add_free("t");
  const int Q = p.add_hermitian("Q", 2, 1e-9);
  p.objective = t;
  AffineExpr e = var(p, t, -1.0);
  p.add_re_trace(e, Q, cmat::Identity(2, 2));
  p.add("trace", AffineLe{e});
  p.add("logdet", LogdetGe{Q, constant(0.0)});
  const std::string d = dump(p);
  EXPECT_EQ(std::count(d.begin(), d.end(), '\n'), 5);
  EXPECT_NE(d.find("con logdet logdet_ge"), std::string::npos);
  EXPECT_NE(d.find("minimize t"), std::string::npos);
}
