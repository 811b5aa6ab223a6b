#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace lyapoqs {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

// Max-norm of the anti-Hermitian part.
inline double hermiticity_defect(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (0.5 * (a - a.adjoint())).cwiseAbs().maxCoeff();
}

inline double max_abs(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace lyapoqs
