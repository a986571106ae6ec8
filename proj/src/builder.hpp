#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cecran/convex.hpp"

namespace cecran::detail {

inline std::string indexed(const char* name, int k) { return std::string(name) + "[" + std::to_string(k) + "]"; }

// Declares variables together with their start values.
class Builder {
 public:
  convex::ConvexProblem p;

  int nonneg(const std::string& name, double start) {
    const int id = p.add_nonneg(name);
    scalars_.emplace_back(id, start);
    return id;
  }
  int box(const std::string& name, double lo, double hi, double start) {
    const int id = p.add_box(name, lo, hi);
    scalars_.emplace_back(id, start);
    return id;
  }
  int hermitian(const std::string& name, const cmat& start, std::optional<double> floor = std::nullopt) {
    const int id = p.add_hermitian(name, static_cast<int>(start.rows()), floor);
    hermitians_.emplace_back(id, start);
    return id;
  }
  int complex(const std::string& name, const cmat& start) {
    const int id = p.add_complex(name, static_cast<int>(start.rows()), static_cast<int>(start.cols()));
    complexes_.emplace_back(id, start);
    return id;
  }

  convex::AffineExpr x(int var, double coeff = 1.0) const {
    convex::AffineExpr e;
    e.add(p.coord(var), coeff);
    return e;
  }

  /// expr <= rhs
  void le(const std::string& label, convex::AffineExpr lhs, double rhs) {
    lhs.constant -= rhs;
    p.add(label, convex::AffineLe{std::move(lhs)});
  }

  rvec start() const {
    rvec s = rvec::Zero(p.num_coords());
    for (const auto& [id, v] : scalars_) convex::set_scalar(p, s, id, v);
    for (const auto& [id, v] : hermitians_) convex::set_hermitian(p, s, id, v);
    for (const auto& [id, v] : complexes_) convex::set_complex(p, s, id, v);
    return s;
  }

 private:
  std::vector<std::pair<int, double>> scalars_;
  std::vector<std::pair<int, cmat>> hermitians_;
  std::vector<std::pair<int, cmat>> complexes_;
};

// lhs >= rhs, violation relative to the larger magnitude.
inline double rel_ge(double lhs, double rhs) {
  const double d = rhs - lhs;
  if (!(d > 0.0)) return std::isnan(d) ? 1e300 : 0.0;
  return d / std::max({std::abs(rhs), std::abs(lhs), 1e-9});
}

}  // namespace cecran::detail
