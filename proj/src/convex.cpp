#include "cecran/convex.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace cecran::convex {

int VariableDecl::size() const {
  switch (kind) {
    case VarKind::nonneg_scalar:
    case VarKind::box_scalar:
      return 1;
    case VarKind::hermitian_psd:
      return rows * rows;
    case VarKind::complex_matrix:
      return 2 * rows * cols;
  }
  return 0;
}

AffineExpr& AffineExpr::add(int coord, double coeff) {
  if (coeff != 0.0) terms.emplace_back(coord, coeff);
  return *this;
}

AffineExpr& AffineExpr::add(const AffineExpr& other, double scale) {
  constant += scale * other.constant;
  for (const auto& [c, a] : other.terms) add(c, scale * a);
  return *this;
}

double AffineExpr::eval(const rvec& x) const {
  double v = constant;
  for (const auto& [c, a] : terms) v += a * x(c);
  return v;
}

namespace {

int push_var(ConvexProblem& p, VariableDecl d) {
  d.offset = p.num_coords();
  p.variables.push_back(std::move(d));
  return static_cast<int>(p.variables.size()) - 1;
}

// Direction of one hermitian coordinate inside its matrix: X = sum of up to
// two (row, col, coeff) entries.
struct Basis {
  int n = 0;
  struct Entry {
    int r, c;
    cplx v;
  };
  Entry e[2];
};

Basis hermitian_basis(int dim, int local) {
  Basis b;
  if (local < dim) {
    b.n = 1;
    b.e[0] = {local, local, 1.0};
    return b;
  }
  int k = (local - dim) / 2;
  const bool im = ((local - dim) % 2) == 1;
  int i = 0;
  while (k >= dim - 1 - i) {
    k -= dim - 1 - i;
    ++i;
  }
  const int j = i + 1 + k;
  b.n = 2;
  if (im) {
    b.e[0] = {i, j, cplx(0, 1)};
    b.e[1] = {j, i, cplx(0, -1)};
  } else {
    b.e[0] = {i, j, 1.0};
    b.e[1] = {j, i, 1.0};
  }
  return b;
}

cmat basis_matrix(const Basis& b, int rows, int cols) {
  cmat m = cmat::Zero(rows, cols);
  for (int q = 0; q < b.n; ++q) m(b.e[q].r, b.e[q].c) += b.e[q].v;
  return m;
}

// Complex coordinate (re/im of entry (a, b)), column-major.
Basis complex_basis(int rows, int local) {
  const int entry = local / 2;
  Basis b;
  b.n = 1;
  b.e[0] = {entry % rows, entry / rows, (local % 2) ? cplx(0, 1) : cplx(1, 0)};
  return b;
}

cmat read_hermitian(const rvec& x, int offset, int dim) {
  cmat m(dim, dim);
  for (int i = 0; i < dim; ++i) m(i, i) = x(offset + i);
  int p = offset + dim;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      m(i, j) = cplx(x(p), x(p + 1));
      m(j, i) = std::conj(m(i, j));
      p += 2;
    }
  return m;
}

cmat read_complex(const rvec& x, int offset, int rows, int cols) {
  cmat m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const int p = offset + 2 * (r + c * rows);
      m(r, c) = cplx(x(p), x(p + 1));
    }
  return m;
}

// ---------------------------------------------------------------------------
// Barrier terms. Each term works on a local gather of the coordinates it uses.

struct LocalAffine {
  double c = 0.0;
  std::vector<std::pair<int, double>> t;
  double eval(const rvec& xl) const {
    double v = c;
    for (const auto& [i, a] : t) v += a * xl(i);
    return v;
  }
  void add_grad(rvec& g, double s) const {
    for (const auto& [i, a] : t) g(i) += s * a;
  }
  // H += s a a^T
  void add_outer(rmat& H, double s) const {
    for (const auto& [i, a] : t)
      for (const auto& [j, b] : t) H(i, j) += s * a * b;
  }
};

class Gather {
 public:
  int local(int coord) {
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (coords[i] == coord) return static_cast<int>(i);
    coords.push_back(coord);
    return static_cast<int>(coords.size()) - 1;
  }
  LocalAffine compile(const AffineExpr& e) {
    LocalAffine l;
    l.c = e.constant;
    for (const auto& [c, a] : e.terms) l.t.emplace_back(local(c), a);
    return l;
  }
  std::vector<int> coords;
};

class ScalarTerm {
 public:
  virtual ~ScalarTerm() = default;
  // g(x) > 0 is the barrier domain. Returns false outside the hard domain.
  virtual bool eval(const rvec& xl, double& g, rvec* grad, rmat* hess) const = 0;
  // Terms with sparse curvature skip the local hess and add scale * d2g
  // straight into the global matrix.
  virtual bool direct_hess() const { return false; }
  virtual void add_direct_hess(double, rmat&) const {}
  std::vector<int> coords;
  bool relax = true;
};

class LinearTerm final : public ScalarTerm {
 public:
  LocalAffine e;
  bool eval(const rvec& xl, double& g, rvec* grad, rmat*) const override {
    g = e.eval(xl);
    if (grad) e.add_grad(*grad, 1.0);
    return true;
  }
};

// log x + log y - log k
class HyperbolicTerm final : public ScalarTerm {
 public:
  LocalAffine x, y;
  double logk = 0.0;
  bool eval(const rvec& xl, double& g, rvec* grad, rmat* hess) const override {
    const double xv = x.eval(xl), yv = y.eval(xl);
    if (!(xv > 0.0) || !(yv > 0.0)) return false;
    g = std::log(xv) + std::log(yv) - logk;
    if (grad) {
      x.add_grad(*grad, 1.0 / xv);
      y.add_grad(*grad, 1.0 / yv);
    }
    if (hess) {
      x.add_outer(*hess, -1.0 / (xv * xv));
      y.add_outer(*hess, -1.0 / (yv * yv));
    }
    return true;
  }
};

// x - t^2
class SquareTerm final : public ScalarTerm {
 public:
  int t = 0;
  LocalAffine x;
  bool eval(const rvec& xl, double& g, rvec* grad, rmat* hess) const override {
    const double tv = xl(t);
    g = x.eval(xl) - tv * tv;
    if (grad) {
      x.add_grad(*grad, 1.0);
      (*grad)(t) -= 2.0 * tv;
    }
    if (hess) (*hess)(t, t) -= 2.0;
    return true;
  }
};

// 2 lambda sqrt(tau) - lambda^2 v - kappa / w - rest
class SqrtTerm final : public ScalarTerm {
 public:
  double lambda = 0.0, kappa = 0.0;
  LocalAffine tau, v, w, rest;
  bool eval(const rvec& xl, double& g, rvec* grad, rmat* hess) const override {
    const double tv = tau.eval(xl);
    if (!(tv > 0.0)) return false;
    const double st = std::sqrt(tv);
    g = 2.0 * lambda * st - lambda * lambda * v.eval(xl) - rest.eval(xl);
    double wv = 0.0;
    if (kappa > 0.0) {
      wv = w.eval(xl);
      if (!(wv > 0.0)) return false;
      g -= kappa / wv;
    }
    if (grad) {
      tau.add_grad(*grad, lambda / st);
      v.add_grad(*grad, -lambda * lambda);
      rest.add_grad(*grad, -1.0);
      if (kappa > 0.0) w.add_grad(*grad, kappa / (wv * wv));
    }
    if (hess) {
      tau.add_outer(*hess, -0.5 * lambda / (tv * st));
      if (kappa > 0.0) w.add_outer(*hess, -2.0 * kappa / (wv * wv * wv));
    }
    return true;
  }
};

// rest - sum tr(X^H W X)
class QuadTraceTerm final : public ScalarTerm {
 public:
  struct Block {
    int rows = 0, cols = 0;
    std::vector<int> local;  // 2*rows*cols local indices
    cmat weight;
  };
  std::vector<Block> blocks;
  LocalAffine rest;
  bool eval(const rvec& xl, double& g, rvec* grad, rmat* hess) const override {
    g = rest.eval(xl);
    if (grad) rest.add_grad(*grad, 1.0);
    for (const auto& b : blocks) {
      cmat X(b.rows, b.cols);
      for (int c = 0; c < b.cols; ++c)
        for (int r = 0; r < b.rows; ++r) {
          const int p = 2 * (r + c * b.rows);
          X(r, c) = cplx(xl(b.local[p]), xl(b.local[p + 1]));
        }
      const cmat WX = b.weight * X;
      g -= (X.adjoint() * WX).trace().real();
      if (grad) {
        // d/d re = 2 Re (W X)(r,c), d/d im = 2 Im (W X)(r,c)
        for (int c = 0; c < b.cols; ++c)
          for (int r = 0; r < b.rows; ++r) {
            const int p = 2 * (r + c * b.rows);
            (*grad)(b.local[p]) -= 2.0 * WX(r, c).real();
            (*grad)(b.local[p + 1]) -= 2.0 * WX(r, c).imag();
          }
      }
      if (hess) add_block(b, 1.0, *hess, nullptr);
    }
    return true;
  }
  bool direct_hess() const override { return true; }
  void add_direct_hess(double scale, rmat& H) const override {
    for (const auto& b : blocks) add_block(b, scale, H, &coords);
  }

 private:
  static void add_block(const Block& b, double scale, rmat& H, const std::vector<int>* map) {
    auto at = [&](int l) { return map ? (*map)[static_cast<std::size_t>(l)] : l; };
    for (int c = 0; c < b.cols; ++c)
      for (int r = 0; r < b.rows; ++r)
        for (int r2 = 0; r2 < b.rows; ++r2) {
          const cplx w = scale * b.weight(r, r2);
          const int p = 2 * (r + c * b.rows), q = 2 * (r2 + c * b.rows);
          const int p0 = at(b.local[p]), p1 = at(b.local[p + 1]);
          const int q0 = at(b.local[q]), q1 = at(b.local[q + 1]);
          H(p0, q0) -= 2.0 * w.real();
          H(p1, q1) -= 2.0 * w.real();
          H(p0, q1) += 2.0 * w.imag();
          H(p1, q0) -= 2.0 * w.imag();
        }
  }

 public:
};

// log2 det(Omega) - rest
class LogdetTerm final : public ScalarTerm {
 public:
  int dim = 0;
  std::vector<int> local;  // dim*dim hermitian coordinates
  LocalAffine rest;
  bool eval(const rvec& xl, double& g, rvec* grad, rmat* hess) const override {
    cmat O(dim, dim);
    rvec xo(dim * dim);
    for (int i = 0; i < dim * dim; ++i) xo(i) = xl(local[static_cast<std::size_t>(i)]);
    O = read_hermitian(xo, 0, dim);
    Eigen::LLT<cmat> llt(O);
    if (llt.info() != Eigen::Success) return false;
    double ld = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = llt.matrixLLT()(i, i).real();
      if (!(d > 0.0)) return false;
      ld += std::log(d);
    }
    g = 2.0 * ld / ln2 - rest.eval(xl);
    if (grad || hess) {
      const cmat Y = llt.solve(cmat::Identity(dim, dim));
      const int m = dim * dim;
      std::vector<Basis> bs(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) bs[static_cast<std::size_t>(i)] = hermitian_basis(dim, i);
      if (grad) {
        rest.add_grad(*grad, -1.0);
        for (int i = 0; i < m; ++i) {
          const Basis& b = bs[static_cast<std::size_t>(i)];
          cplx tr = 0.0;
          for (int q = 0; q < b.n; ++q) tr += b.e[q].v * Y(b.e[q].c, b.e[q].r);
          (*grad)(local[static_cast<std::size_t>(i)]) += tr.real() / ln2;
        }
      }
      if (hess) {
        // -tr(Y A Y B)/ln2 with tr(Y E_pq Y E_rs) = Y(s,p) Y(q,r)
        for (int i = 0; i < m; ++i)
          for (int j = i; j < m; ++j) {
            const Basis& a = bs[static_cast<std::size_t>(i)];
            const Basis& b = bs[static_cast<std::size_t>(j)];
            cplx tr = 0.0;
            for (int p = 0; p < a.n; ++p)
              for (int q = 0; q < b.n; ++q)
                tr += a.e[p].v * b.e[q].v * Y(b.e[q].c, a.e[p].r) * Y(a.e[p].c, b.e[q].r);
            const double h = -tr.real() / ln2;
            const int li = local[static_cast<std::size_t>(i)], lj = local[static_cast<std::size_t>(j)];
            (*hess)(li, lj) += h;
            if (li != lj) (*hess)(lj, li) += h;
          }
      }
    }
    return true;
  }
};

// Matrix barrier -log det F(x), F Hermitian.
class MatrixTerm {
 public:
  virtual ~MatrixTerm() = default;
  virtual int dim() const = 0;
  virtual cmat value(const rvec& xl) const = 0;
  // dF/dx_i for every local coordinate.
  virtual void first(const rvec& xl, std::vector<cmat>& dF) const = 0;
  // Adds -Re tr(Y d2F_ij) to H.
  virtual void curvature(const cmat&, rmat&) const {}
  std::vector<int> coords;
  bool relax = true;
};

class FloorTerm final : public MatrixTerm {
 public:
  int n = 0;
  double floor = 0.0;
  int dim() const override { return n; }
  cmat value(const rvec& xl) const override {
    return read_hermitian(xl, 0, n) - floor * cmat::Identity(n, n);
  }
  void first(const rvec&, std::vector<cmat>& dF) const override {
    dF.resize(coords.size());
    for (int i = 0; i < n * n; ++i) dF[static_cast<std::size_t>(i)] = basis_matrix(hermitian_basis(n, i), n, n);
  }
};

// F = Q - R R^H. Local layout: Q coordinates (n*n) then R coordinates (2*n*m).
class SchurTerm final : public MatrixTerm {
 public:
  int n = 0, m = 0;
  int dim() const override { return n; }
  cmat root(const rvec& xl) const {
    cmat R(n, m);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < n; ++r) {
        const int p = n * n + 2 * (r + c * n);
        R(r, c) = cplx(xl(p), xl(p + 1));
      }
    return R;
  }
  cmat value(const rvec& xl) const override {
    const cmat R = root(xl);
    return read_hermitian(xl, 0, n) - R * R.adjoint();
  }
  void first(const rvec& xl, std::vector<cmat>& dF) const override {
    dF.resize(coords.size());
    for (int i = 0; i < n * n; ++i) dF[static_cast<std::size_t>(i)] = basis_matrix(hermitian_basis(n, i), n, n);
    const cmat R = root(xl);
    for (int i = 0; i < 2 * n * m; ++i) {
      const Basis b = complex_basis(n, i);
      // D = v E_ab, dF = -(D R^H + R D^H)
      cmat d = cmat::Zero(n, n);
      const int a = b.e[0].r, c = b.e[0].c;
      const cplx v = b.e[0].v;
      for (int k = 0; k < n; ++k) {
        d(a, k) -= v * std::conj(R(k, c));
        d(k, a) -= R(k, c) * std::conj(v);
      }
      dF[static_cast<std::size_t>(n * n + i)] = d;
    }
  }
  void curvature(const cmat& Y, rmat& H) const override {
    // 2 Re(v_i conj(v_j) Y(a', a)) when columns match
    for (int i = 0; i < 2 * n * m; ++i)
      for (int j = 0; j < 2 * n * m; ++j) {
        const Basis bi = complex_basis(n, i), bj = complex_basis(n, j);
        if (bi.e[0].c != bj.e[0].c) continue;
        H(n * n + i, n * n + j) += 2.0 * (bi.e[0].v * std::conj(bj.e[0].v) * Y(bj.e[0].r, bi.e[0].r)).real();
      }
  }
};

struct Barrier {
  std::vector<std::unique_ptr<ScalarTerm>> scalars;
  std::vector<std::unique_ptr<MatrixTerm>> matrices;
  int n = 0;
  double degree() const {
    double m = static_cast<double>(scalars.size());
    for (const auto& t : matrices) m += t->dim();
    return m;
  }
};

std::vector<int> var_coords(const VariableDecl& v) {
  std::vector<int> c(static_cast<std::size_t>(v.size()));
  for (int i = 0; i < v.size(); ++i) c[static_cast<std::size_t>(i)] = v.offset + i;
  return c;
}

Barrier build_barrier(const ConvexProblem& p) {
  Barrier b;
  b.n = p.num_coords();
  for (const auto& v : p.variables) {
    if (v.kind == VarKind::nonneg_scalar || v.kind == VarKind::box_scalar) {
      if (std::isfinite(v.lo)) {
        auto t = std::make_unique<LinearTerm>();
        t->coords = {v.offset};
        t->e.c = -v.lo;
        t->e.t = {{0, 1.0}};
        b.scalars.push_back(std::move(t));
      }
      if (std::isfinite(v.hi)) {
        auto t = std::make_unique<LinearTerm>();
        t->coords = {v.offset};
        t->e.c = v.hi;
        t->e.t = {{0, -1.0}};
        b.scalars.push_back(std::move(t));
      }
    } else if (v.kind == VarKind::hermitian_psd && v.psd_floor) {
      auto t = std::make_unique<FloorTerm>();
      t->n = v.rows;
      t->floor = *v.psd_floor;
      t->coords = var_coords(v);
      t->relax = false;
      b.matrices.push_back(std::move(t));
    }
  }
  for (const auto& con : p.constraints) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          Gather gth;
          if constexpr (std::is_same_v<T, AffineLe>) {
            auto t = std::make_unique<LinearTerm>();
            AffineExpr neg;
            neg.add(c.expr, -1.0);
            t->e = gth.compile(neg);
            t->coords = gth.coords;
            b.scalars.push_back(std::move(t));
          } else if constexpr (std::is_same_v<T, Hyperbolic>) {
            if (c.k <= 0.0) {
              for (const AffineExpr* e : {&c.x, &c.y}) {
                Gather g2;
                auto t = std::make_unique<LinearTerm>();
                t->e = g2.compile(*e);
                t->coords = g2.coords;
                b.scalars.push_back(std::move(t));
              }
            } else {
              auto t = std::make_unique<HyperbolicTerm>();
              t->x = gth.compile(c.x);
              t->y = gth.compile(c.y);
              t->logk = std::log(c.k);
              t->coords = gth.coords;
              b.scalars.push_back(std::move(t));
            }
          } else if constexpr (std::is_same_v<T, SquareLe>) {
            auto t = std::make_unique<SquareTerm>();
            t->t = gth.local(c.t);
            t->x = gth.compile(c.x);
            t->coords = gth.coords;
            b.scalars.push_back(std::move(t));
          } else if constexpr (std::is_same_v<T, SqrtConcaveGe>) {
            auto t = std::make_unique<SqrtTerm>();
            t->lambda = c.lambda;
            t->kappa = c.kappa;
            t->tau = gth.compile(c.tau);
            t->v = gth.compile(c.v);
            if (c.kappa > 0.0) t->w = gth.compile(c.w);
            t->rest = gth.compile(c.rest);
            t->coords = gth.coords;
            b.scalars.push_back(std::move(t));
          } else if constexpr (std::is_same_v<T, PsdSchur>) {
            const auto& q = p.variables[static_cast<std::size_t>(c.q_var)];
            const auto& r = p.variables[static_cast<std::size_t>(c.root_var)];
            auto t = std::make_unique<SchurTerm>();
            t->n = q.rows;
            t->m = r.cols;
            t->coords = var_coords(q);
            const auto rc = var_coords(r);
            t->coords.insert(t->coords.end(), rc.begin(), rc.end());
            b.matrices.push_back(std::move(t));
          } else if constexpr (std::is_same_v<T, QuadTraceLe>) {
            auto t = std::make_unique<QuadTraceTerm>();
            for (const auto& term : c.terms) {
              const auto& v = p.variables[static_cast<std::size_t>(term.var)];
              QuadTraceTerm::Block blk;
              blk.rows = v.rows;
              blk.cols = v.cols;
              blk.weight = term.weight;
              for (int i = 0; i < v.size(); ++i) blk.local.push_back(gth.local(v.offset + i));
              t->blocks.push_back(std::move(blk));
            }
            t->rest = gth.compile(c.rest);
            t->coords = gth.coords;
            b.scalars.push_back(std::move(t));
          } else if constexpr (std::is_same_v<T, LogdetGe>) {
            const auto& o = p.variables[static_cast<std::size_t>(c.omega_var)];
            auto t = std::make_unique<LogdetTerm>();
            t->dim = o.rows;
            for (int i = 0; i < o.size(); ++i) t->local.push_back(gth.local(o.offset + i));
            t->rest = gth.compile(c.rest);
            t->coords = gth.coords;
            b.scalars.push_back(std::move(t));
          }
        },
        con.body);
  }
  return b;
}

struct Eval {
  double f = 0.0;
  rvec grad;
  rmat hess;
};

// Barrier value (and derivatives) at z. In phase one z carries an extra
// coordinate s that shifts every relaxable term, and cost picks s.
class Objective {
 public:
  Objective(const Barrier& b, bool phase1) : b_(b), phase1_(phase1) {
    dim_ = b.n + (phase1 ? 1 : 0);
  }
  int dim() const { return dim_; }

  // Phase one only: keeps z inside sum ((z_i - c_i) / scale_i)^2 < radius^2.
  void set_region(const rvec& center, double radius) {
    center_ = center;
    iscale_ = 1.0 / (center.array().abs() + 1.0);
    radius2_ = radius * radius;
  }
  double region_radius() const { return std::sqrt(radius2_); }

  bool eval(const rvec& z, double t, const rvec& cost, bool derivs, Eval& out) const {
    out.f = t * cost.dot(z);
    if (derivs) {
      out.grad = t * cost;
      out.hess = rmat::Zero(dim_, dim_);
    }
    const double s = phase1_ ? z(b_.n) : 0.0;
    if (phase1_) {
      // keeps phase one bounded: s > -1
      const double g = 1.0 + s;
      if (!(g > 0.0)) return false;
      out.f -= std::log(g);
      if (derivs) {
        out.grad(b_.n) -= 1.0 / g;
        out.hess(b_.n, b_.n) += 1.0 / (g * g);
      }
      if (radius2_ > 0.0) {
        const rvec w = iscale_.array().square() * (z.head(b_.n) - center_).array();
        const double r = radius2_ - (z.head(b_.n) - center_).dot(w);
        if (!(r > 0.0)) return false;
        out.f -= std::log(r);
        if (derivs) {
          out.grad.head(b_.n) += 2.0 * w / r;
          out.hess.topLeftCorner(b_.n, b_.n) += 4.0 * w * w.transpose() / (r * r);
          out.hess.diagonal().head(b_.n) += 2.0 * iscale_.array().square().matrix() / r;
        }
      }
    }
    rvec xl, gl;
    rmat hl;
    for (const auto& term : b_.scalars) {
      const auto L = static_cast<int>(term->coords.size());
      xl.resize(L);
      for (int i = 0; i < L; ++i) xl(i) = z(term->coords[static_cast<std::size_t>(i)]);
      double g = 0.0;
      const bool direct = term->direct_hess();
      if (derivs) {
        gl = rvec::Zero(L);
        if (!direct) hl = rmat::Zero(L, L);
      }
      if (!term->eval(xl, g, derivs ? &gl : nullptr, derivs && !direct ? &hl : nullptr)) return false;
      const bool shifted = phase1_ && term->relax;
      if (shifted) g += s;
      if (!(g > 0.0)) return false;
      out.f -= std::log(g);
      if (!derivs) continue;
      const double ig = 1.0 / g;
      const auto& cs = term->coords;
      for (int i = 0; i < L; ++i) out.grad(cs[static_cast<std::size_t>(i)]) -= gl(i) * ig;
      // column-major: walk rows innermost
      for (int j = 0; j < L; ++j) {
        double* col = out.hess.col(cs[static_cast<std::size_t>(j)]).data();
        const double a = gl(j) * ig * ig;
        if (direct) {
          if (a != 0.0)
            for (int i = 0; i < L; ++i) col[cs[static_cast<std::size_t>(i)]] += gl(i) * a;
        } else {
          for (int i = 0; i < L; ++i) col[cs[static_cast<std::size_t>(i)]] += gl(i) * a - hl(i, j) * ig;
        }
      }
      if (direct) term->add_direct_hess(-ig, out.hess);
      if (shifted) {
        out.grad(b_.n) -= ig;
        out.hess(b_.n, b_.n) += ig * ig;
        for (int i = 0; i < L; ++i) {
          const int ci = term->coords[static_cast<std::size_t>(i)];
          out.hess(ci, b_.n) += gl(i) * ig * ig;
          out.hess(b_.n, ci) += gl(i) * ig * ig;
        }
      }
    }
    std::vector<cmat> dF;
    for (const auto& term : b_.matrices) {
      const auto L = static_cast<int>(term->coords.size());
      xl.resize(L);
      for (int i = 0; i < L; ++i) xl(i) = z(term->coords[static_cast<std::size_t>(i)]);
      const int n = term->dim();
      cmat F = term->value(xl);
      const bool shifted = phase1_ && term->relax;
      if (shifted) F += s * cmat::Identity(n, n);
      Eigen::LLT<cmat> llt(F);
      if (llt.info() != Eigen::Success) return false;
      double ld = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = llt.matrixLLT()(i, i).real();
        if (!(d > 0.0)) return false;
        ld += std::log(d);
      }
      out.f -= 2.0 * ld;
      if (!derivs) continue;
      const cmat Y = llt.solve(cmat::Identity(n, n));
      term->first(xl, dF);
      std::vector<cmat> M(static_cast<std::size_t>(L));
      for (int i = 0; i < L; ++i) M[static_cast<std::size_t>(i)] = Y * dF[static_cast<std::size_t>(i)];
      rmat H = rmat::Zero(L, L);
      for (int i = 0; i < L; ++i) {
        const cmat& Mi = M[static_cast<std::size_t>(i)];
        out.grad(term->coords[static_cast<std::size_t>(i)]) -= Mi.trace().real();
        for (int j = i; j < L; ++j) {
          const double h = (Mi.cwiseProduct(M[static_cast<std::size_t>(j)].transpose())).sum().real();
          H(i, j) += h;
          if (j != i) H(j, i) += h;
        }
      }
      term->curvature(Y, H);
      for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
          out.hess(term->coords[static_cast<std::size_t>(i)], term->coords[static_cast<std::size_t>(j)]) += H(i, j);
      if (shifted) {
        // dF/ds = I
        out.grad(b_.n) -= Y.trace().real();
        const cmat Y2 = Y * Y;
        out.hess(b_.n, b_.n) += Y2.trace().real();
        for (int i = 0; i < L; ++i) {
          const double h = (Y * M[static_cast<std::size_t>(i)]).trace().real();
          const int ci = term->coords[static_cast<std::size_t>(i)];
          out.hess(ci, b_.n) += h;
          out.hess(b_.n, ci) += h;
        }
      }
    }
    return true;
  }

  // Largest violation of the relaxable terms and the smallest hard-domain
  // margin at x (phase one start).
  bool start_shift(const rvec& x, double& shift) const {
    shift = -std::numeric_limits<double>::infinity();
    rvec xl;
    for (const auto& term : b_.scalars) {
      const auto L = static_cast<int>(term->coords.size());
      xl.resize(L);
      for (int i = 0; i < L; ++i) xl(i) = x(term->coords[static_cast<std::size_t>(i)]);
      double g = 0.0;
      if (!term->eval(xl, g, nullptr, nullptr)) return false;
      if (!term->relax && !(g > 0.0)) return false;
      if (term->relax) shift = std::max(shift, -g);
    }
    for (const auto& term : b_.matrices) {
      const auto L = static_cast<int>(term->coords.size());
      xl.resize(L);
      for (int i = 0; i < L; ++i) xl(i) = x(term->coords[static_cast<std::size_t>(i)]);
      const cmat F = term->value(xl);
      Eigen::SelfAdjointEigenSolver<cmat> es(F, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues()(0);
      if (!term->relax && !(lo > 0.0)) return false;
      if (term->relax) shift = std::max(shift, -lo);
    }
    return true;
  }

 private:
  const Barrier& b_;
  bool phase1_;
  int dim_ = 0;
  rvec center_, iscale_;
  double radius2_ = 0.0;
};

bool newton_direction(const Eval& e, rvec& dz) {
  rmat H = e.hess;
  const int n = static_cast<int>(H.rows());
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(H(i, i)));
  if (!(scale > 0.0)) scale = 1.0;
  double reg = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::LLT<rmat> llt(H);
    if (llt.info() == Eigen::Success) {
      dz = llt.solve(-e.grad);
      if (dz.allFinite()) return true;
    }
    reg = reg == 0.0 ? 1e-14 * scale : reg * 100.0;
    H = e.hess;
    H.diagonal().array() += reg;
  }
  return false;
}

struct Centering {
  int steps = 0;
  bool ok = true;
};

// Damped Newton on t*cost.z + barrier. stop(z) ends early (phase one).
template <class Stop>
Centering center(const Objective& obj, rvec& z, double t, const rvec& cost, int budget, Stop stop) {
  Centering c;
  Eval e, trial;
  rvec dz;
  while (c.steps < budget) {
    if (!obj.eval(z, t, cost, true, e)) {
      c.ok = false;
      return c;
    }
    if (!newton_direction(e, dz)) {
      c.ok = false;
      return c;
    }
    const double dec = -e.grad.dot(dz);
    // f carries t * cost.z, so its rounding error grows with t
    if (dec <= 2e-10 + 1e-13 * std::abs(t * cost.dot(z))) return c;
    double a = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls) {
      const rvec zn = z + a * dz;
      if (obj.eval(zn, t, cost, false, trial) && trial.f <= e.f - 0.01 * a * dec) {
        z = zn;
        moved = true;
        break;
      }
      a *= 0.5;
    }
    ++c.steps;
    if (!moved) return c;  // numerically centered
    if (stop(z)) return c;
  }
  return c;
}

double safe_violation(double v) { return std::isfinite(v) ? std::max(0.0, v) : 1e300; }

}  // namespace

// ---------------------------------------------------------------------------

int ConvexProblem::add_nonneg(const std::string& name) {
  VariableDecl d;
  d.name = name;
  d.kind = VarKind::nonneg_scalar;
  d.lo = 0.0;
  return push_var(*this, d);
}

int ConvexProblem::add_box(const std::string& name, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("add_box: lo > hi for " + name);
  VariableDecl d;
  d.name = name;
  d.kind = VarKind::box_scalar;
  d.lo = lo;
  d.hi = hi;
  return push_var(*this, d);
}

int ConvexProblem::add_free(const std::string& name) {
  return add_box(name, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

int ConvexProblem::add_hermitian(const std::string& name, int dim, std::optional<double> psd_floor) {
  if (dim < 1) throw std::invalid_argument("add_hermitian: dim must be >= 1");
  VariableDecl d;
  d.name = name;
  d.kind = VarKind::hermitian_psd;
  d.rows = d.cols = dim;
  d.psd_floor = psd_floor;
  return push_var(*this, d);
}

int ConvexProblem::add_complex(const std::string& name, int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("add_complex: dims must be >= 1");
  VariableDecl d;
  d.name = name;
  d.kind = VarKind::complex_matrix;
  d.rows = rows;
  d.cols = cols;
  return push_var(*this, d);
}

void ConvexProblem::add(std::string label, ConstraintBody body) {
  constraints.push_back({std::move(label), std::move(body)});
}

int ConvexProblem::num_coords() const {
  if (variables.empty()) return 0;
  const auto& v = variables.back();
  return v.offset + v.size();
}

int ConvexProblem::coord(int var) const {
  const auto& v = variables.at(static_cast<std::size_t>(var));
  if (v.kind != VarKind::nonneg_scalar && v.kind != VarKind::box_scalar)
    throw std::invalid_argument("coord: " + v.name + " is not scalar");
  return v.offset;
}

void ConvexProblem::add_re_trace(AffineExpr& expr, int var, const cmat& M, double scale) const {
  const auto& v = variables.at(static_cast<std::size_t>(var));
  if (v.kind == VarKind::hermitian_psd) {
    const int n = v.rows;
    if (M.rows() != n || M.cols() != n) throw std::invalid_argument("add_re_trace: shape mismatch for " + v.name);
    for (int a = 0; a < n; ++a) expr.add(v.offset + a, scale * M(a, a).real());
    int p = v.offset + n;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        // X(a,b) = re + i im, X(b,a) = re - i im
        expr.add(p, scale * (M(b, a) + M(a, b)).real());
        expr.add(p + 1, scale * (M(a, b).imag() - M(b, a).imag()));
        p += 2;
      }
  } else if (v.kind == VarKind::complex_matrix) {
    if (M.rows() != v.cols || M.cols() != v.rows) throw std::invalid_argument("add_re_trace: shape mismatch for " + v.name);
    for (int b = 0; b < v.cols; ++b)
      for (int a = 0; a < v.rows; ++a) {
        const int p = v.offset + 2 * (a + b * v.rows);
        expr.add(p, scale * M(b, a).real());
        expr.add(p + 1, -scale * M(b, a).imag());
      }
  } else {
    if (M.size() != 1) throw std::invalid_argument("add_re_trace: scalar variable needs 1x1 coefficient");
    expr.add(v.offset, scale * M(0, 0).real());
  }
}

void ConvexProblem::validate() const {
  const int n = num_coords();
  const auto nv = static_cast<int>(variables.size());
  if (objective < 0 || objective >= nv) throw std::invalid_argument("problem: objective variable not declared");
  (void)coord(objective);
  auto check_expr = [&](const AffineExpr& e) {
    for (const auto& [c, a] : e.terms)
      if (c < 0 || c >= n || !std::isfinite(a)) throw std::invalid_argument("problem: bad affine term");
    if (!std::isfinite(e.constant)) throw std::invalid_argument("problem: non-finite constant");
  };
  auto check_var = [&](int v, VarKind kind) {
    if (v < 0 || v >= nv || variables[static_cast<std::size_t>(v)].kind != kind)
      throw std::invalid_argument("problem: constraint references an undeclared or mistyped variable");
  };
  for (const auto& con : constraints) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, AffineLe>) {
            check_expr(c.expr);
          } else if constexpr (std::is_same_v<T, Hyperbolic>) {
            check_expr(c.x);
            check_expr(c.y);
          } else if constexpr (std::is_same_v<T, SquareLe>) {
            if (c.t < 0 || c.t >= n) throw std::invalid_argument("problem: bad square-le coordinate");
            check_expr(c.x);
          } else if constexpr (std::is_same_v<T, SqrtConcaveGe>) {
            check_expr(c.tau);
            check_expr(c.v);
            check_expr(c.w);
            check_expr(c.rest);
            if (!std::isfinite(c.lambda) || !(c.kappa >= 0.0)) throw std::invalid_argument("problem: bad sqrt-concave data");
          } else if constexpr (std::is_same_v<T, PsdSchur>) {
            check_var(c.q_var, VarKind::hermitian_psd);
            check_var(c.root_var, VarKind::complex_matrix);
            if (variables[static_cast<std::size_t>(c.q_var)].rows != variables[static_cast<std::size_t>(c.root_var)].rows)
              throw std::invalid_argument("problem: psd-schur shape mismatch");
          } else if constexpr (std::is_same_v<T, QuadTraceLe>) {
            for (const auto& t : c.terms) {
              check_var(t.var, VarKind::complex_matrix);
              const int r = variables[static_cast<std::size_t>(t.var)].rows;
              if (t.weight.rows() != r || t.weight.cols() != r) throw std::invalid_argument("problem: quad-trace weight shape");
            }
            check_expr(c.rest);
          } else if constexpr (std::is_same_v<T, LogdetGe>) {
            check_var(c.omega_var, VarKind::hermitian_psd);
            check_expr(c.rest);
          }
        },
        con.body);
  }
}

const char* status_name(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::max_iter:
      return "max_iter";
    case Status::infeasible:
      return "infeasible";
  }
  return "unknown";
}

rvec default_point(const ConvexProblem& p) {
  rvec x = rvec::Zero(p.num_coords());
  for (const auto& v : p.variables) {
    switch (v.kind) {
      case VarKind::nonneg_scalar:
        x(v.offset) = 1.0;
        break;
      case VarKind::box_scalar: {
        const bool flo = std::isfinite(v.lo), fhi = std::isfinite(v.hi);
        x(v.offset) = flo && fhi ? 0.5 * (v.lo + v.hi) : flo ? v.lo + 1.0 : fhi ? v.hi - 1.0 : 0.0;
        break;
      }
      case VarKind::hermitian_psd: {
        const double d = std::max(1.0, 2.0 * v.psd_floor.value_or(0.0));
        for (int i = 0; i < v.rows; ++i) x(v.offset + i) = d;
        break;
      }
      case VarKind::complex_matrix:
        break;
    }
  }
  return x;
}

double scalar_value(const ConvexProblem& p, const rvec& x, int var) { return x(p.coord(var)); }

cmat hermitian_value(const ConvexProblem& p, const rvec& x, int var) {
  const auto& v = p.variables.at(static_cast<std::size_t>(var));
  if (v.kind != VarKind::hermitian_psd) throw std::invalid_argument("hermitian_value: " + v.name + " is not hermitian");
  return read_hermitian(x, v.offset, v.rows);
}

cmat complex_value(const ConvexProblem& p, const rvec& x, int var) {
  const auto& v = p.variables.at(static_cast<std::size_t>(var));
  if (v.kind != VarKind::complex_matrix) throw std::invalid_argument("complex_value: " + v.name + " is not complex");
  return read_complex(x, v.offset, v.rows, v.cols);
}

void set_scalar(const ConvexProblem& p, rvec& x, int var, double value) { x(p.coord(var)) = value; }

void set_hermitian(const ConvexProblem& p, rvec& x, int var, const cmat& value) {
  const auto& v = p.variables.at(static_cast<std::size_t>(var));
  if (v.kind != VarKind::hermitian_psd || value.rows() != v.rows || value.cols() != v.rows)
    throw std::invalid_argument("set_hermitian: shape or kind mismatch for " + v.name);
  const int n = v.rows;
  for (int i = 0; i < n; ++i) x(v.offset + i) = value(i, i).real();
  int q = v.offset + n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const cplx z = 0.5 * (value(i, j) + std::conj(value(j, i)));
      x(q) = z.real();
      x(q + 1) = z.imag();
      q += 2;
    }
}

void set_complex(const ConvexProblem& p, rvec& x, int var, const cmat& value) {
  const auto& v = p.variables.at(static_cast<std::size_t>(var));
  if (v.kind != VarKind::complex_matrix || value.rows() != v.rows || value.cols() != v.cols)
    throw std::invalid_argument("set_complex: shape or kind mismatch for " + v.name);
  for (int c = 0; c < v.cols; ++c)
    for (int r = 0; r < v.rows; ++r) {
      const int q = v.offset + 2 * (r + c * v.rows);
      x(q) = value(r, c).real();
      x(q + 1) = value(r, c).imag();
    }
}

double constraint_violation(const ConvexProblem& p, const ConstraintDecl& con, const rvec& x) {
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, AffineLe>) {
          return safe_violation(c.expr.eval(x));
        } else if constexpr (std::is_same_v<T, Hyperbolic>) {
          const double xv = c.x.eval(x), yv = c.y.eval(x);
          return safe_violation(std::max({c.k - xv * yv, -xv, -yv}));
        } else if constexpr (std::is_same_v<T, SquareLe>) {
          return safe_violation(x(c.t) * x(c.t) - c.x.eval(x));
        } else if constexpr (std::is_same_v<T, SqrtConcaveGe>) {
          const double tv = c.tau.eval(x);
          if (tv < 0.0) return safe_violation(-tv);
          double rhs = c.rest.eval(x);
          if (c.kappa > 0.0) {
            const double wv = c.w.eval(x);
            if (!(wv > 0.0)) return 1e300;
            rhs += c.kappa / wv;
          }
          return safe_violation(rhs - (2.0 * c.lambda * std::sqrt(tv) - c.lambda * c.lambda * c.v.eval(x)));
        } else if constexpr (std::is_same_v<T, PsdSchur>) {
          const cmat Q = hermitian_value(p, x, c.q_var);
          const cmat R = complex_value(p, x, c.root_var);
          const cmat F = Q - R * R.adjoint();
          Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (F + F.adjoint()), Eigen::EigenvaluesOnly);
          return safe_violation(-es.eigenvalues()(0));
        } else if constexpr (std::is_same_v<T, QuadTraceLe>) {
          double lhs = 0.0;
          for (const auto& t : c.terms) {
            const cmat X = complex_value(p, x, t.var);
            lhs += (X.adjoint() * t.weight * X).trace().real();
          }
          return safe_violation(lhs - c.rest.eval(x));
        } else {
          const cmat O = hermitian_value(p, x, c.omega_var);
          Eigen::LLT<cmat> llt(O);
          if (llt.info() != Eigen::Success) return 1e300;
          double ld = 0.0;
          for (int i = 0; i < O.rows(); ++i) ld += std::log(llt.matrixLLT()(i, i).real());
          return safe_violation(c.rest.eval(x) - 2.0 * ld / ln2);
        }
      },
      con.body);
}

double check_feasibility(const ConvexProblem& p, const rvec& x) {
  if (x.size() != p.num_coords()) throw std::invalid_argument("check_feasibility: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < p.variables.size(); ++i) {
    const auto& v = p.variables[i];
    if (v.kind == VarKind::nonneg_scalar || v.kind == VarKind::box_scalar) {
      const double xv = x(v.offset);
      if (std::isfinite(v.lo)) worst = std::max(worst, safe_violation(v.lo - xv));
      if (std::isfinite(v.hi)) worst = std::max(worst, safe_violation(xv - v.hi));
    } else if (v.kind == VarKind::hermitian_psd) {
      Eigen::SelfAdjointEigenSolver<cmat> es(read_hermitian(x, v.offset, v.rows), Eigen::EigenvaluesOnly);
      worst = std::max(worst, safe_violation(v.psd_floor.value_or(0.0) - es.eigenvalues()(0)));
    }
  }
  for (const auto& c : p.constraints) worst = std::max(worst, constraint_violation(p, c, x));
  return worst;
}

ConvexSolution solve(const ConvexProblem& problem, const SolverOptions& options, const std::optional<rvec>& start) {
  problem.validate();
  const Barrier barrier = build_barrier(problem);
  const int n = barrier.n;
  const double m = barrier.degree();
  const int obj = problem.coord(problem.objective);

  ConvexSolution sol;
  rvec x = start ? *start : default_point(problem);
  if (x.size() != n) throw std::invalid_argument("solve: start has wrong size");

  auto finish = [&](Status st) {
    sol.x = x;
    sol.objective = x(obj);
    sol.residual = check_feasibility(problem, x);
    sol.status = st;
    if (st == Status::optimal && sol.residual > options.feas_tol) sol.status = Status::max_iter;
    return sol;
  };

  // Phase one: minimize s with every relaxable term shifted by s.
  Objective p1(barrier, true);
  double shift = 0.0;
  if (!p1.start_shift(x, shift))
    throw std::domain_error("solve: start point outside the hard domain of a constraint");
  if (shift >= 0.0) {
    rvec z(n + 1);
    z.head(n) = x;
    z(n) = shift + 1.0;
    rvec cost = rvec::Zero(n + 1);
    cost(n) = 1.0;
    double t = 1.0;
    bool found = false;
    // The shifted barrier is unbounded below along directions that only
    // loosen constraints, so phase one works inside a region around the start
    // that grows whenever the region alone is certified infeasible.
    double radius = 10.0;
    p1.set_region(x, radius);
    for (int outer = 0; outer < 60 && !found; ++outer) {
      // Test the true margin after every step.
      auto feasible = [&](const rvec& zz) {
        double need = 0.0;
        return zz(n) < 0.0 || (p1.start_shift(zz.head(n), need) && need < 0.0);
      };
      const Centering c = center(p1, z, t, cost, options.max_newton - sol.newton_steps, feasible);
      sol.newton_steps += c.steps;
      found = feasible(z);
      if (found) break;
      if (!c.ok || sol.newton_steps >= options.max_newton) {
        x = z.head(n);
        return finish(Status::max_iter);
      }
      // Centered: the optimal shift is at least s - (m + 2)/t.
      if (z(n) - (m + 2.0) / t > 0.0) {
        if (radius >= 1e6) {
          x = z.head(n);
          return finish(Status::infeasible);
        }
        radius *= 10.0;
        p1.set_region(x, radius);
        continue;
      }
      t *= 20.0;
    }
    x = z.head(n);
    if (!found) return finish(Status::infeasible);
  }

  // Phase two.
  Objective p2(barrier, false);
  rvec cost = rvec::Zero(n);
  cost(obj) = 1.0;
  double t = 1.0;
  {
    // Pick t so that x is as close to the central path as possible.
    Eval e;
    if (p2.eval(x, 0.0, cost, true, e)) {
      Eigen::LDLT<rmat> ldlt(e.hess + 1e-12 * std::max(1.0, e.hess.diagonal().cwiseAbs().maxCoeff()) * rmat::Identity(n, n));
      const rvec hc = ldlt.solve(cost);
      const rvec hg = ldlt.solve(e.grad);
      const double denom = cost.dot(hc);
      if (denom > 0.0) {
        const double tstar = -cost.dot(hg) / denom;
        if (std::isfinite(tstar) && tstar > 0.0) t = tstar;
      }
    }
    const double floor_t = m / std::max(1.0, std::abs(x(obj)) * 0.1);
    t = std::max(t, floor_t);
  }
  const double mu = 15.0;
  for (;;) {
    const int budget = options.max_newton - sol.newton_steps;
    if (budget <= 0) return finish(Status::max_iter);
    const Centering c = center(p2, x, t, cost, budget, [](const rvec&) { return false; });
    sol.newton_steps += c.steps;
    if (!c.ok) return finish(Status::max_iter);
    if (m / t <= options.opt_tol * std::max(1.0, std::abs(x(obj)))) return finish(Status::optimal);
    if (sol.newton_steps >= options.max_newton) return finish(Status::max_iter);
    t *= mu;
  }
}

namespace {

std::string fmt_expr(const AffineExpr& e) {
  std::ostringstream os;
  os.precision(17);
  os << e.constant;
  for (const auto& [c, a] : e.terms) os << (a < 0 ? " - " : " + ") << std::abs(a) << "*x[" << c << "]";
  return os.str();
}

std::string fmt_matrix(const cmat& m) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (int r = 0; r < m.rows(); ++r) {
    if (r) os << "; ";
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << ", ";
      os << m(r, c).real() << (m(r, c).imag() < 0 ? "-" : "+") << std::abs(m(r, c).imag()) << "i";
    }
  }
  os << "]";
  return os.str();
}

}  // namespace

std::string dump(const ConvexProblem& p) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& v : p.variables) {
    os << "var " << v.name << " offset=" << v.offset << " ";
    switch (v.kind) {
      case VarKind::nonneg_scalar:
        os << "nonneg";
        break;
      case VarKind::box_scalar:
        os << "box lo=" << v.lo << " hi=" << v.hi;
        break;
      case VarKind::hermitian_psd:
        os << "hermitian dim=" << v.rows;
        if (v.psd_floor) os << " floor=" << *v.psd_floor;
        break;
      case VarKind::complex_matrix:
        os << "complex rows=" << v.rows << " cols=" << v.cols;
        break;
    }
    os << "\n";
  }
  if (p.objective >= 0) os << "minimize " << p.variables[static_cast<std::size_t>(p.objective)].name << "\n";
  for (const auto& con : p.constraints) {
    os << "con " << con.label << " ";
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, AffineLe>) {
            os << "affine_le " << fmt_expr(c.expr) << " <= 0";
          } else if constexpr (std::is_same_v<T, Hyperbolic>) {
            os << "hyperbolic (" << fmt_expr(c.x) << ") * (" << fmt_expr(c.y) << ") >= " << c.k;
          } else if constexpr (std::is_same_v<T, SquareLe>) {
            os << "square_le x[" << c.t << "]^2 <= " << fmt_expr(c.x);
          } else if constexpr (std::is_same_v<T, SqrtConcaveGe>) {
            os << "sqrt_concave_ge lambda=" << c.lambda << " tau=(" << fmt_expr(c.tau) << ") v=(" << fmt_expr(c.v)
               << ") kappa=" << c.kappa << " w=(" << fmt_expr(c.w) << ") rest=(" << fmt_expr(c.rest) << ")";
          } else if constexpr (std::is_same_v<T, PsdSchur>) {
            os << "psd_schur " << p.variables[static_cast<std::size_t>(c.q_var)].name << " >= "
               << p.variables[static_cast<std::size_t>(c.root_var)].name << " * "
               << p.variables[static_cast<std::size_t>(c.root_var)].name << "^H";
          } else if constexpr (std::is_same_v<T, QuadTraceLe>) {
            os << "quad_trace_le";
            for (const auto& t : c.terms)
              os << " " << p.variables[static_cast<std::size_t>(t.var)].name << ":W=" << fmt_matrix(t.weight);
            os << " <= " << fmt_expr(c.rest);
          } else {
            os << "logdet_ge log2det(" << p.variables[static_cast<std::size_t>(c.omega_var)].name
               << ") >= " << fmt_expr(c.rest);
          }
        },
        con.body);
    os << "\n";
  }
  return os.str();
}

}  // namespace cecran::convex
