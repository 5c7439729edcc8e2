#pragma once

#include "hamrec/spectra.hpp"

#include <memory>
#include <string>
#include <vector>

namespace hamrec {

/// Default relative threshold: lambda_i < tol * lambda_max counts as zero.
inline constexpr double kDefaultZeroTolerance = 1e-8;

/// Memory budget (bytes) for caching the S vectors L_i v in build_pure.
inline constexpr std::size_t kDefaultCacheBudget = std::size_t{1} << 30;

enum class CorrelationVariant { anticommutator, rho_commutator, h_commutator };

inline const char* to_string(CorrelationVariant v) {
  switch (v) {
    case CorrelationVariant::anticommutator: return "anticommutator";
    case CorrelationVariant::rho_commutator: return "rho_commutator";
    case CorrelationVariant::h_commutator: return "h_commutator";
  }
  return "?";
}

/// Real symmetric S x S bilinear form on the local-operator space.
struct CorrelationMatrix {
  std::shared_ptr<const LocalBasis> basis;
  Eigen::MatrixXd entries;
  CorrelationVariant variant = CorrelationVariant::anticommutator;
  std::string source;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

struct CorrelationSpectrum {
  Eigen::VectorXd eigenvalues;      // ascending
  Eigen::MatrixXd eigen_operators;  // columns, coefficient vectors in the basis
  double zero_tolerance = kDefaultZeroTolerance;
  int kernel_dim = 0;

  double lambda(int i) const { return eigenvalues(i); }
  double lambda_max() const { return eigenvalues.size() ? eigenvalues(eigenvalues.size() - 1) : 0.0; }
  Eigen::MatrixXd kernel() const { return eigen_operators.leftCols(kernel_dim); }
};

namespace detail {

inline void require_normalized(const Eigen::VectorXcd& v) {
  if (std::abs(v.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("state is not normalized (norm " + std::to_string(v.norm()) + ")");
  }
}

inline void require_dim(const LocalBasis& basis, const Eigen::VectorXcd& v) {
  if (static_cast<std::size_t>(v.size()) != basis.spec().dim()) {
    throw std::invalid_argument("state length " + std::to_string(v.size()) + " does not match lattice dimension " +
                                std::to_string(basis.spec().dim()));
  }
}

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

/// <v|O|v> for O = sum_i w_i L_i, evaluated matrix free.
inline double expectation(const Eigen::VectorXd& w, const LocalBasis& basis, const Eigen::VectorXcd& v) {
  detail::require_dim(basis, v);
  if (static_cast<std::size_t>(w.size()) != basis.size()) throw std::invalid_argument("coefficient length mismatch");
  Eigen::VectorXcd ov = Eigen::VectorXcd::Zero(v.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double c = w(static_cast<Eigen::Index>(i));
    if (c != 0.0) basis.product_operator(i).apply_add(v.data(), ov.data(), c);
  }
  return v.dot(ov).real();
}

/// M_ij = Re<L_i v, L_j v> - <L_i><L_j> for a normalized pure state.
/// Caches the vectors L_i v when S * N fits in `cache_budget` bytes,
/// otherwise streams pairs.
inline CorrelationMatrix build_pure(const Eigen::VectorXcd& v, std::shared_ptr<const LocalBasis> basis,
                                    std::size_t cache_budget = kDefaultCacheBudget, std::string source = "pure") {
  detail::require_dim(*basis, v);
  detail::require_normalized(v);
  const auto s = static_cast<Eigen::Index>(basis->size());
  const auto n = v.size();
  Eigen::MatrixXd m(s, s);
  Eigen::VectorXd mean(s);

  if (static_cast<std::size_t>(s) * static_cast<std::size_t>(n) * sizeof(cplx) <= cache_budget) {
    Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(n, s);
    for (Eigen::Index i = 0; i < s; ++i) {
      basis->product_operator(static_cast<std::size_t>(i)).apply_add(v.data(), phi.col(i).data());
    }
    mean = (v.adjoint() * phi).real().transpose();
    m = (phi.adjoint() * phi).real();
  } else {
    Eigen::VectorXcd a(n), b(n);
    for (Eigen::Index i = 0; i < s; ++i) {
      a.setZero();
      basis->product_operator(static_cast<std::size_t>(i)).apply_add(v.data(), a.data());
      mean(i) = v.dot(a).real();
      m(i, i) = a.squaredNorm();
      for (Eigen::Index j = i + 1; j < s; ++j) {
        b.setZero();
        basis->product_operator(static_cast<std::size_t>(j)).apply_add(v.data(), b.data());
        m(i, j) = m(j, i) = a.dot(b).real();
      }
    }
  }
  m -= mean * mean.transpose();
  return {std::move(basis), detail::symmetrized(m), CorrelationVariant::anticommutator, std::move(source)};
}

inline CorrelationMatrix build_pure(const EigenstateRecord& v, std::shared_ptr<const LocalBasis> basis) {
  return build_pure(v.state, std::move(basis), kDefaultCacheBudget,
                    "eigenstate index=" + std::to_string(v.index));
}

/// w^T M w: the variance of O = sum w_i L_i when M comes from a pure state.
inline double fluctuation(const Eigen::VectorXd& w, const CorrelationMatrix& m) {
  if (static_cast<std::size_t>(w.size()) != m.size()) throw std::invalid_argument("coefficient length mismatch");
  return w.dot(m.entries * w);
}

namespace detail {

/// A factor W with rho = W W^dagger, dropping non-positive eigenvalues.
inline Eigen::MatrixXcd density_factor(const DensityMatrix& rho) {
  if (rho.factor.size() > 0 && rho.factor.rows() == rho.matrix.rows()) return rho.factor;
  const auto e = eig_hermitian(rho.matrix, 1e-10);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (e.values(i) > 0) keep.push_back(i);
  }
  Eigen::MatrixXcd w(rho.matrix.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    w.col(static_cast<Eigen::Index>(c)) = e.vectors.col(keep[c]) * std::sqrt(e.values(keep[c]));
  }
  return w;
}

inline void require_region_basis(const DensityMatrix& rho, const LocalBasis& basis) {
  if (rho.local_dim != basis.spec().local_dim) throw std::invalid_argument("local dimension mismatch");
  if (rho.dim() != ipow(static_cast<std::size_t>(rho.local_dim), static_cast<int>(rho.region.size()))) {
    throw std::invalid_argument("density matrix dimension does not match its region");
  }
  validate_region(basis.spec(), rho.region);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (!basis.supported_in(i, rho.region)) {
      throw std::invalid_argument("basis operator " + basis.name(i) + " lies outside the density-matrix region");
    }
  }
}

}  // namespace detail

/// M_ij = 1/2 Tr(rho {L_i, L_j}) - Tr(rho L_i) Tr(rho L_j) over operators inside rho's region.
inline CorrelationMatrix build_mixed_expectation(const DensityMatrix& rho, std::shared_ptr<const LocalBasis> basis,
                                                 std::string source = "mixed") {
  detail::require_region_basis(rho, *basis);
  const Eigen::MatrixXcd w = detail::density_factor(rho);
  const auto s = static_cast<Eigen::Index>(basis->size());
  const Eigen::Index len = w.rows() * w.cols();
  Eigen::MatrixXcd phi(len, s);
  Eigen::VectorXd mean(s);
  const Eigen::Map<const Eigen::VectorXcd> wflat(w.data(), len);
  for (Eigen::Index i = 0; i < s; ++i) {
    const Eigen::MatrixXcd lw = basis->product_operator(static_cast<std::size_t>(i), rho.region).apply_columns(w);
    phi.col(i) = Eigen::Map<const Eigen::VectorXcd>(lw.data(), len);
    mean(i) = wflat.dot(phi.col(i)).real();
  }
  Eigen::MatrixXd m = (phi.adjoint() * phi).real();
  m -= mean * mean.transpose();
  return {std::move(basis), detail::symmetrized(m), CorrelationVariant::anticommutator, std::move(source)};
}

/// Mbar_ij = 1/2 Tr([rho, L_i]^dagger [rho, L_j]), the Gram matrix of commutators with rho.
inline CorrelationMatrix build_rho_commutator(const DensityMatrix& rho, std::shared_ptr<const LocalBasis> basis,
                                              std::size_t budget = kDefaultCacheBudget,
                                              std::string source = "rho_commutator") {
  detail::require_region_basis(rho, *basis);
  const auto s = static_cast<Eigen::Index>(basis->size());
  const Eigen::Index d = rho.matrix.rows();
  if (static_cast<std::size_t>(d * d * s) * sizeof(cplx) > budget) {
    throw std::invalid_argument("rho commutator matrix exceeds the memory budget");
  }
  Eigen::MatrixXcd c(d * d, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const Eigen::MatrixXcd lr = basis->product_operator(static_cast<std::size_t>(i), rho.region).apply_columns(rho.matrix);
    const Eigen::MatrixXcd comm = lr.adjoint() - lr;  // rho L - L rho
    c.col(i) = Eigen::Map<const Eigen::VectorXcd>(comm.data(), d * d);
  }
  const Eigen::MatrixXd m = 0.5 * (c.adjoint() * c).real();
  return {std::move(basis), detail::symmetrized(m), CorrelationVariant::rho_commutator, std::move(source)};
}

/// M^(H)_ij = 1/2 (1/N) Tr([H, L_i]^dagger [H, L_j]); its kernel holds the local operators commuting with H.
inline CorrelationMatrix build_h_commutator(const LocalHamiltonian& h, std::shared_ptr<const LocalBasis> basis,
                                            std::size_t cap = kDefaultDenseCap, std::size_t budget = kDefaultCacheBudget) {
  if (h.spec() != basis->spec()) throw std::invalid_argument("Hamiltonian and basis live on different lattices");
  const Eigen::MatrixXcd dense = assemble_dense(h, cap);
  const auto s = static_cast<Eigen::Index>(basis->size());
  const Eigen::Index n = dense.rows();
  if (static_cast<std::size_t>(n * n * s) * sizeof(cplx) > budget) {
    throw std::invalid_argument("H commutator matrix exceeds the memory budget");
  }
  Eigen::MatrixXcd c(n * n, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    const Eigen::MatrixXcd lh = basis->product_operator(static_cast<std::size_t>(i)).apply_columns(dense);
    const Eigen::MatrixXcd comm = lh.adjoint() - lh;  // H L - L H
    c.col(i) = Eigen::Map<const Eigen::VectorXcd>(comm.data(), n * n);
  }
  const Eigen::MatrixXd m = 0.5 * (c.adjoint() * c).real() / static_cast<double>(n);
  return {std::move(basis), detail::symmetrized(m), CorrelationVariant::h_commutator, h.label};
}

/// Ascending spectrum with eigen-operators; kernel_dim counts lambda_i < tol * lambda_max.
inline CorrelationSpectrum correlation_spectrum(const Eigen::MatrixXd& m, double zero_tolerance = kDefaultZeroTolerance) {
  const auto e = eig_symmetric(m, 1e-10);
  CorrelationSpectrum out;
  out.eigenvalues = e.values;
  out.eigen_operators = e.vectors;
  out.zero_tolerance = zero_tolerance;
  const double top = out.lambda_max();
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (top <= 0.0 || e.values(i) < zero_tolerance * top) ++out.kernel_dim;
  }
  return out;
}

inline CorrelationSpectrum correlation_spectrum(const CorrelationMatrix& m, double zero_tolerance = kDefaultZeroTolerance) {
  return correlation_spectrum(m.entries, zero_tolerance);
}

struct FluctuationDecomposition {
  double total = 0.0;
  std::vector<double> per_region;
  double region_sum = 0.0;
  double ratio = 0.0;  // region_sum / max(total, floor)
};

/// Variance of O = sum_A O_A against the sum of the per-region variances,
/// where O_A collects the terms whose anchor lies in region A.
inline FluctuationDecomposition region_fluctuation_decomposition(const Eigen::VectorXcd& v, const LocalBasis& basis,
                                                                 const Eigen::VectorXd& coeffs,
                                                                 const std::vector<std::vector<int>>& partition,
                                                                 double floor = 1e-30) {
  detail::require_dim(basis, v);
  detail::require_normalized(v);
  if (static_cast<std::size_t>(coeffs.size()) != basis.size()) throw std::invalid_argument("coefficient length mismatch");
  const LatticeSpec& spec = basis.spec();
  std::vector<int> owner(static_cast<std::size_t>(spec.n), -1);
  for (std::size_t r = 0; r < partition.size(); ++r) {
    validate_region(spec, partition[r]);
    for (int site : partition[r]) {
      if (owner[static_cast<std::size_t>(site)] != -1) {
        throw std::invalid_argument("partition regions overlap at site " + std::to_string(site));
      }
      owner[static_cast<std::size_t>(site)] = static_cast<int>(r);
    }
  }
  for (int site = 0; site < spec.n; ++site) {
    if (owner[static_cast<std::size_t>(site)] == -1) {
      throw std::invalid_argument("partition does not cover site " + std::to_string(site));
    }
  }

  auto variance = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXcd ov = Eigen::VectorXcd::Zero(v.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double c = w(static_cast<Eigen::Index>(i));
      if (c != 0.0) basis.product_operator(i).apply_add(v.data(), ov.data(), c);
    }
    const cplx mean = v.dot(ov);
    return (ov - mean * v).squaredNorm();  // no cancellation at exact eigenstates
  };

  FluctuationDecomposition out;
  out.total = variance(coeffs);
  for (std::size_t r = 0; r < partition.size(); ++r) {
    Eigen::VectorXd part = Eigen::VectorXd::Zero(coeffs.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (owner[static_cast<std::size_t>(basis.anchor(i))] == static_cast<int>(r)) {
        part(static_cast<Eigen::Index>(i)) = coeffs(static_cast<Eigen::Index>(i));
      }
    }
    out.per_region.push_back(variance(part));
    out.region_sum += out.per_region.back();
  }
  out.ratio = out.region_sum / std::max(out.total, floor);
  return out;
}

}  // namespace hamrec
