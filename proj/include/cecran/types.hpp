#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace cecran {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

inline constexpr double ln2 = 0.69314718055994530942;

// Reports carry this in place of +infinity so CSV output stays numeric.
inline constexpr double latency_sentinel = 1e9;

}  // namespace cecran
