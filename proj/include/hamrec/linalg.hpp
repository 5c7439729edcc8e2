#pragma once

#include <Eigen/Dense>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace hamrec {

using cplx = std::complex<double>;

/// Ascending eigen-decomposition of a Hermitian (or real symmetric) matrix.
template <typename Matrix>
struct EigenDecomposition {
  Eigen::VectorXd values;
  Matrix vectors;  // columns, orthonormal
};

namespace detail {

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace detail

/// Largest entrywise deviation from Hermiticity, relative to max(1, max|A|).
inline double hermiticity_defect(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return detail::max_abs(a - a.adjoint()) / std::max(1.0, detail::max_abs(a));
}

inline double symmetry_defect(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) return INFINITY;
  return detail::max_abs(a - a.transpose()) / std::max(1.0, detail::max_abs(a));
}

/// Full ascending eigen-decomposition of a dense Hermitian matrix (LAPACK zheevd).
inline EigenDecomposition<Eigen::MatrixXcd> eig_hermitian(const Eigen::MatrixXcd& a, double herm_tol = 1e-12) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eig_hermitian: matrix is not square");
  if (const double defect = hermiticity_defect(a); defect > herm_tol) {
    throw std::invalid_argument("eig_hermitian: matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  }
  const auto n = static_cast<lapack_int>(a.rows());
  EigenDecomposition<Eigen::MatrixXcd> out;
  out.vectors = 0.5 * (a + a.adjoint());
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                         reinterpret_cast<lapack_complex_double*>(out.vectors.data()), n,
                                         out.values.data());
  if (info != 0) throw std::runtime_error("zheevd failed with info=" + std::to_string(info));
  return out;
}

/// Full ascending eigen-decomposition of a real symmetric matrix (LAPACK dsyevd).
inline EigenDecomposition<Eigen::MatrixXd> eig_symmetric(const Eigen::MatrixXd& a, double sym_tol = 1e-12) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eig_symmetric: matrix is not square");
  if (const double defect = symmetry_defect(a); defect > sym_tol) {
    throw std::invalid_argument("eig_symmetric: matrix is not symmetric (defect " + std::to_string(defect) + ")");
  }
  const auto n = static_cast<lapack_int>(a.rows());
  EigenDecomposition<Eigen::MatrixXd> out;
  out.vectors = 0.5 * (a + a.transpose());
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data());
  if (info != 0) throw std::runtime_error("dsyevd failed with info=" + std::to_string(info));
  return out;
}

/// Spectral norm of a real symmetric matrix.
inline double symmetric_operator_norm(const Eigen::MatrixXd& a) {
  const auto e = eig_symmetric(a);
  if (e.values.size() == 0) return 0.0;
  return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
}

/// Angle between two lines spanned by nonzero real vectors, in [0, pi/2].
/// Uses atan2 of the orthogonal and parallel components so that angles near
/// zero keep full relative precision.
inline double line_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("angle undefined for a zero vector");
  const Eigen::VectorXd ua = a / na;
  const Eigen::VectorXd ub = b / nb;
  const double par = std::abs(ua.dot(ub));
  const double perp = (ub - ua.dot(ub) * ua).norm();
  return std::atan2(perp, par);
}

/// Largest principal angle between the column spans of two matrices with
/// orthonormal columns, where span(a) is tested for containment in span(b).
inline double containment_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0) return 0.0;
  const Eigen::MatrixXd residual = a - b * (b.transpose() * a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return std::asin(std::min(1.0, svd.singularValues()(0)));
}

/// Median of a copy of the values.
inline double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace hamrec
