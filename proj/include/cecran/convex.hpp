#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cecran/types.hpp"

namespace cecran::convex {

// All variables live in one real coordinate vector x.
//   scalar:           1 coordinate
//   hermitian (n):    n diagonal reals, then (re, im) of X(i,j) for i < j, row by row
//   complex (r x c):  (re, im) pairs, column-major
enum class VarKind { nonneg_scalar, box_scalar, hermitian_psd, complex_matrix };

struct VariableDecl {
  std::string name;
  VarKind kind = VarKind::nonneg_scalar;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  int rows = 1;
  int cols = 1;
  // hermitian_psd: X >= floor*I is kept as a barrier domain. Without a floor
  // PSD-ness must follow from the constraints (e.g. a PsdSchur).
  std::optional<double> psd_floor;
  int offset = 0;

  int size() const;
};

/// constant + sum coeff * x[coord]
struct AffineExpr {
  double constant = 0.0;
  std::vector<std::pair<int, double>> terms;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}
  AffineExpr& add(int coord, double coeff);
  AffineExpr& add(const AffineExpr& other, double scale = 1.0);
  double eval(const rvec& x) const;
};

/// expr <= 0
struct AffineLe {
  AffineExpr expr;
};

/// x * y >= k with x, y > 0 (both affine).
struct Hyperbolic {
  AffineExpr x;
  AffineExpr y;
  double k = 0.0;
};

/// t^2 <= x for scalar coordinate t.
struct SquareLe {
  int t = 0;
  AffineExpr x;
};

/// 2 lambda sqrt(tau) - lambda^2 v >= kappa / w + rest, with tau > 0 and,
/// when kappa > 0, w > 0.
struct SqrtConcaveGe {
  double lambda = 0.0;
  AffineExpr tau;
  AffineExpr v;
  double kappa = 0.0;
  AffineExpr w;
  AffineExpr rest;
};

/// Q >= R R^H for a hermitian variable Q (n x n) and complex variable R (n x m).
struct PsdSchur {
  int q_var = 0;
  int root_var = 0;
};

/// sum_j tr(X_j^H W_j X_j) <= rest for complex variables X_j and PSD weights W_j.
struct QuadTraceLe {
  struct Term {
    int var = 0;
    cmat weight;
  };
  std::vector<Term> terms;
  AffineExpr rest;
};

/// log2 det(Omega) >= rest for a hermitian variable Omega.
struct LogdetGe {
  int omega_var = 0;
  AffineExpr rest;
};

using ConstraintBody = std::variant<AffineLe, Hyperbolic, SquareLe, SqrtConcaveGe, PsdSchur, QuadTraceLe, LogdetGe>;

struct ConstraintDecl {
  std::string label;
  ConstraintBody body;
};

struct ConvexProblem {
  std::vector<VariableDecl> variables;
  std::vector<ConstraintDecl> constraints;
  int objective = -1;  // scalar variable to minimize

  int add_nonneg(const std::string& name);
  int add_box(const std::string& name, double lo, double hi);
  int add_free(const std::string& name);
  int add_hermitian(const std::string& name, int dim, std::optional<double> psd_floor = std::nullopt);
  int add_complex(const std::string& name, int rows, int cols);
  void add(std::string label, ConstraintBody body);

  int num_coords() const;
  /// Coordinate of a scalar variable.
  int coord(int var) const;
  /// expr += scale * Re tr(M X). M is n x n for hermitian X and cols x rows for complex X.
  void add_re_trace(AffineExpr& expr, int var, const cmat& M, double scale = 1.0) const;

  /// Throws std::invalid_argument on dangling references or bad shapes.
  void validate() const;
};

enum class Status { optimal, max_iter, infeasible };
const char* status_name(Status s);

struct SolverOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-5;
  int max_newton = 200;
};

struct ConvexSolution {
  rvec x;
  double objective = 0.0;
  double residual = 0.0;
  Status status = Status::infeasible;
  int newton_steps = 0;
};

/// Phase I then a log-barrier path. The start (or the default point) must lie
/// in the hard domain of every constraint: hyperbolic x, y > 0, tau > 0, w > 0
/// where kappa > 0, and hermitian floors satisfied strictly.
ConvexSolution solve(const ConvexProblem& problem, const SolverOptions& options = {},
                     const std::optional<rvec>& start = std::nullopt);

/// Largest violation over constraints and variable domains; 0 when feasible.
double check_feasibility(const ConvexProblem& problem, const rvec& x);
/// Violation of one constraint.
double constraint_violation(const ConvexProblem& problem, const ConstraintDecl& c, const rvec& x);

/// Scalars 1 (or the box midpoint), hermitian max(1, 2 floor) I, complex 0.
rvec default_point(const ConvexProblem& problem);

double scalar_value(const ConvexProblem& problem, const rvec& x, int var);
cmat hermitian_value(const ConvexProblem& problem, const rvec& x, int var);
cmat complex_value(const ConvexProblem& problem, const rvec& x, int var);
void set_scalar(const ConvexProblem& problem, rvec& x, int var, double value);
void set_hermitian(const ConvexProblem& problem, rvec& x, int var, const cmat& value);
void set_complex(const ConvexProblem& problem, rvec& x, int var, const cmat& value);

/// One variable or constraint per line.
std::string dump(const ConvexProblem& problem);

}  // namespace cecran::convex
