#pragma once

#include "cecran/convex.hpp"
#include "cecran/numerics.hpp"

namespace cecran::detail {

// phi(Gamma, Theta, C, D) with (Gamma, Theta) fixed, written as an affine
// expression in the decision variables. C is a sum of L X pieces and D a sum
// of G X G^H pieces plus a constant.
class PhiAffine {
 public:
  PhiAffine(const convex::ConvexProblem& p, const cmat& gamma, const cmat& theta)
      : p_(p), g_(gamma), t_(theta) {
    const auto m = gamma.rows();
    ig_ = cmat::Identity(m, m) + gamma;
    k_ = theta * ig_ * theta.adjoint();
    Eigen::PartialPivLU<cmat> lu(ig_);
    expr.constant = std::log(std::abs(lu.determinant())) / ln2 - gamma.trace().real() / ln2;
  }

  /// C += L X for variable X (scalar: L is d x m with m = 1).
  void signal(int var, const cmat& L, double scale = 1.0) {
    p_.add_re_trace(expr, var, ig_ * t_.adjoint() * L, 2.0 * scale / ln2);
  }
  /// D += G X G^H.
  void noise(int var, const cmat& G, double scale = 1.0) {
    p_.add_re_trace(expr, var, G.adjoint() * k_ * G, -scale / ln2);
  }
  /// D += G R R^H G^H for a complex root R; kept apart as a convex quadratic.
  void noise_root(int root, const cmat& G) { quad.push_back({root, G.adjoint() * k_ * G / ln2}); }
  /// D += D0.
  void noise_constant(const cmat& D0) { expr.constant -= (k_ * D0).trace().real() / ln2; }

  convex::AffineExpr expr;
  // phi = expr - sum tr(R^H W R)
  std::vector<convex::QuadTraceLe::Term> quad;

 private:
  const convex::ConvexProblem& p_;
  cmat g_, t_, ig_, k_;
};

inline cmat as_matrix(double v) { return cmat::Constant(1, 1, v); }

}  // namespace cecran::detail
