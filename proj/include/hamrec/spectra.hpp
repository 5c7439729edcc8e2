#pragma once

#include "hamrec/hamiltonian.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hamrec {

/// Relative spread below which neighbouring eigenvalues count as degenerate.
inline constexpr double kDefaultDegeneracyThreshold = 1e-10;

struct EigenstateRecord {
  Eigen::VectorXcd state;
  double energy = 0.0;
  std::size_t index = 0;
  double residual = 0.0;  // |H v - E v|
  bool degenerate = false;
  double min_gap = INFINITY;
  LatticeSpec spec;
};

/// Makes the first non-negligible amplitude real and positive.
inline void fix_phase(Eigen::VectorXcd& v) {
  if (v.size() == 0) return;
  const double cutoff = 1e-8 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > cutoff) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = std::abs(v(i));
      return;
    }
  }
}

/// Full spectrum of a LocalHamiltonian, kept for selecting several eigenstates.
struct HamiltonianSpectrum {
  LocalHamiltonian hamiltonian;
  EigenDecomposition<Eigen::MatrixXcd> eig;
  double degeneracy_threshold = kDefaultDegeneracyThreshold;

  std::size_t size() const { return static_cast<std::size_t>(eig.values.size()); }
  double spread() const { return size() ? eig.values(eig.values.size() - 1) - eig.values(0) : 0.0; }

  EigenstateRecord record(std::size_t i) const {
    if (i >= size()) {
      throw std::out_of_range("eigenstate index " + std::to_string(i) + " out of range [0, " +
                              std::to_string(size()) + ")");
    }
    const auto ii = static_cast<Eigen::Index>(i);
    EigenstateRecord r;
    r.spec = hamiltonian.spec();
    r.index = i;
    r.energy = eig.values(ii);
    r.state = eig.vectors.col(ii);
    r.state.normalize();
    fix_phase(r.state);
    r.residual = (hamiltonian.apply(r.state) - r.energy * r.state).norm();
    if (i > 0) r.min_gap = std::min(r.min_gap, r.energy - eig.values(ii - 1));
    if (i + 1 < size()) r.min_gap = std::min(r.min_gap, eig.values(ii + 1) - r.energy);
    r.degenerate = r.min_gap < degeneracy_threshold * spread();
    return r;
  }
};

inline HamiltonianSpectrum diagonalize(const LocalHamiltonian& h, std::size_t cap = kDefaultDenseCap,
                                       double degeneracy_threshold = kDefaultDegeneracyThreshold) {
  return {h, eig_hermitian(assemble_dense(h, cap)), degeneracy_threshold};
}

/// The i'th eigenstate (ascending energy) by full dense diagonalization.
inline EigenstateRecord ith_eigenstate(const LocalHamiltonian& h, std::size_t i, std::size_t cap = kDefaultDenseCap) {
  if (i >= h.spec().dim()) throw std::out_of_range("eigenstate index out of range");
  return diagonalize(h, cap).record(i);
}

/// Ground state by explicitly restarted Lanczos with full reorthogonalization.
/// Meant for ground-state-only work beyond the dense cap.
inline EigenstateRecord ground_state_lanczos(const LocalHamiltonian& h, double tol = 1e-10, std::uint64_t seed = 1,
                                             int krylov_dim = 80, int max_restarts = 200) {
  const Eigen::SparseMatrix<cplx> m = assemble_sparse(h);
  const auto dim = static_cast<Eigen::Index>(h.spec().dim());
  // Bound on |H|_op from the 1-norm, used to scale the residual test.
  double scale = 0.0;
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    double s = 0.0;
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(m, c); it; ++it) s += std::abs(it.value());
    scale = std::max(scale, s);
  }
  scale = std::max(scale, 1e-300);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = cplx(normal(rng), normal(rng));
  v.normalize();

  const int kdim = static_cast<int>(std::min<Eigen::Index>(krylov_dim, dim));
  double energy = 0.0;
  for (int restart = 0; restart < max_restarts; ++restart) {
    Eigen::MatrixXcd q(dim, kdim);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(kdim, kdim);
    q.col(0) = v;
    int used = kdim;
    for (int j = 0; j < kdim; ++j) {
      Eigen::VectorXcd w = m * q.col(j);
      t(j, j) = q.col(j).dot(w).real();
      for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (q.leftCols(j + 1).adjoint() * w);
      const double beta = w.norm();
      if (j + 1 == kdim) break;
      if (beta < 1e-14 * scale) {
        used = j + 1;
        break;
      }
      t(j, j + 1) = t(j + 1, j) = beta;
      q.col(j + 1) = w / beta;
    }
    const auto small = eig_symmetric(t.topLeftCorner(used, used));
    v = q.leftCols(used) * small.vectors.col(0).cast<cplx>();
    v.normalize();
    energy = v.dot(m * v).real();
    if ((m * v - energy * v).norm() <= tol * scale) break;
  }
  fix_phase(v);
  EigenstateRecord r;
  r.spec = h.spec();
  r.state = v;
  r.energy = energy;
  r.index = 0;
  r.residual = (h.apply(v) - energy * v).norm();
  return r;
}

/// Density matrix of a contiguous region (sites in region order; region
/// position p is digit p of the matrix index).
struct DensityMatrix {
  std::vector<int> region;
  int local_dim = 2;
  Eigen::MatrixXcd matrix;
  /// Optional purification-style factor with matrix = factor * factor^dagger.
  Eigen::MatrixXcd factor;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }

  /// Hermitian, PSD and unit trace within `tol`.
  void validate(double tol = 1e-12) const {
    if (matrix.rows() != matrix.cols() || dim() != ipow(static_cast<std::size_t>(local_dim), static_cast<int>(region.size()))) {
      throw std::invalid_argument("density matrix dimension does not match its region");
    }
    if (hermiticity_defect(matrix) > tol) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(matrix.trace().real() - 1.0) > tol) throw std::invalid_argument("density matrix trace is not 1");
    const auto e = eig_hermitian(matrix, tol);
    if (e.values(0) < -tol) throw std::invalid_argument("density matrix has a negative eigenvalue");
  }

  double purity() const { return (matrix * matrix).trace().real(); }

  double entropy() const {
    const auto e = eig_hermitian(matrix);
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
      if (e.values(i) > 1e-300) s -= e.values(i) * std::log(e.values(i));
    }
    return s;
  }
};

/// Partial trace of |v><v| onto a contiguous region.
inline DensityMatrix reduce_state(const LatticeSpec& spec, const Eigen::VectorXcd& v, const std::vector<int>& region) {
  validate_region(spec, region);
  if (static_cast<std::size_t>(v.size()) != spec.dim()) throw std::invalid_argument("state dimension mismatch");
  const auto d = static_cast<std::size_t>(spec.local_dim);
  const int m = static_cast<int>(region.size());
  const std::size_t dim_a = ipow(d, m);
  const std::size_t dim_b = spec.dim() / dim_a;

  std::vector<bool> in_a(static_cast<std::size_t>(spec.n), false);
  for (int s : region) in_a[static_cast<std::size_t>(s)] = true;
  std::vector<int> rest;
  for (int s = 0; s < spec.n; ++s) {
    if (!in_a[static_cast<std::size_t>(s)]) rest.push_back(s);
  }

  Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_a), static_cast<Eigen::Index>(dim_b));
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    std::size_t a = 0, b = 0, mult = 1;
    for (int p = 0; p < m; ++p, mult *= d) a += ((i / ipow(d, region[static_cast<std::size_t>(p)])) % d) * mult;
    mult = 1;
    for (int s : rest) {
      b += ((i / ipow(d, s)) % d) * mult;
      mult *= d;
    }
    psi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v(static_cast<Eigen::Index>(i));
  }
  DensityMatrix rho{region, spec.local_dim, psi * psi.adjoint(), {}};
  rho.matrix = 0.5 * (rho.matrix + rho.matrix.adjoint());
  if (dim_b < dim_a) rho.factor = std::move(psi);
  return rho;
}

inline DensityMatrix reduce_state(const EigenstateRecord& v, const std::vector<int>& region) {
  return reduce_state(v.spec, v.state, region);
}

/// e^{-beta H} / Tr e^{-beta H} for a dense Hermitian H.
inline Eigen::MatrixXcd gibbs_matrix(const Eigen::MatrixXcd& h, double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  const auto e = eig_hermitian(h);
  Eigen::VectorXd w(e.values.size());
  const double shift = beta >= 0 ? e.values.minCoeff() : e.values.maxCoeff();
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = std::exp(-beta * (e.values(i) - shift));
  w /= w.sum();
  Eigen::MatrixXcd rho = e.vectors * w.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

/// Full-system Gibbs state.
inline DensityMatrix gibbs_state(const LocalHamiltonian& h, double beta, std::size_t cap = kDefaultDenseCap) {
  return {full_region(h.spec()), h.spec().local_dim, gibbs_matrix(assemble_dense(h, cap), beta), {}};
}

/// Gibbs state of the terms of h on a region register (all nonzero terms must fit inside).
inline DensityMatrix gibbs_state_on(const LocalHamiltonian& h, const std::vector<int>& region, double beta) {
  validate_region(h.spec(), region);
  const std::size_t dim = ipow(static_cast<std::size_t>(h.spec().local_dim), static_cast<int>(region.size()));
  return {region, h.spec().local_dim, gibbs_matrix(assemble_dense(h.terms_on(region), dim), beta), {}};
}

/// Reduced density matrix on `region` of the full Gibbs state, summed over eigenstates
/// rather than forming the N x N state.
inline DensityMatrix reduce_gibbs_state(const HamiltonianSpectrum& spectrum, const std::vector<int>& region, double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  const LatticeSpec& spec = spectrum.hamiltonian.spec();
  const Eigen::VectorXd& e = spectrum.eig.values;
  const double shift = beta >= 0 ? e.minCoeff() : e.maxCoeff();
  Eigen::VectorXd w = (-beta * (e.array() - shift)).exp().matrix();
  w /= w.sum();
  DensityMatrix out = reduce_state(spec, spectrum.eig.vectors.col(0), region);
  out.matrix *= w(0);
  for (Eigen::Index i = 1; i < e.size(); ++i) {
    out.matrix += w(i) * reduce_state(spec, spectrum.eig.vectors.col(i), region).matrix;
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
  out.factor.resize(0, 0);
  return out;
}

/// Haar-random pure state from a seeded Gaussian vector.
inline Eigen::VectorXcd haar_state(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(normal(rng), normal(rng));
  v.normalize();
  return v;
}

/// Computational basis state |s_0 s_1 ...> with s_x the digit on site x.
inline Eigen::VectorXcd product_state(const LatticeSpec& spec, const std::vector<int>& digits) {
  if (static_cast<int>(digits.size()) != spec.n) throw std::invalid_argument("one digit per site required");
  std::size_t idx = 0;
  for (int x = spec.n - 1; x >= 0; --x) idx = idx * static_cast<std::size_t>(spec.local_dim) + static_cast<std::size_t>(digits[static_cast<std::size_t>(x)]);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.dim()));
  v(static_cast<Eigen::Index>(idx)) = 1.0;
  return v;
}

}  // namespace hamrec
