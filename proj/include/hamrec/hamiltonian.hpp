#pragma once

#include "hamrec/local_basis.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace hamrec {

/// Largest Hilbert dimension for which dense N x N matrices are built.
inline constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 14;

/// Real coefficient vector over a LocalBasis: H = sum_i coeffs_i L_i.
struct LocalHamiltonian {
  std::shared_ptr<const LocalBasis> basis;
  Eigen::VectorXd coeffs;
  std::string label;

  LocalHamiltonian() = default;
  LocalHamiltonian(std::shared_ptr<const LocalBasis> b, Eigen::VectorXd c, std::string l = {})
      : basis(std::move(b)), coeffs(std::move(c)), label(std::move(l)) {
    if (!basis) throw std::invalid_argument("LocalHamiltonian needs a basis");
    if (static_cast<std::size_t>(coeffs.size()) != basis->size()) {
      throw std::invalid_argument("coefficient vector length " + std::to_string(coeffs.size()) +
                                  " does not match basis size " + std::to_string(basis->size()));
    }
  }

  const LatticeSpec& spec() const { return basis->spec(); }

  /// Hilbert-Schmidt norm, equal to |coeffs|_2 by orthonormality.
  double norm() const { return coeffs.norm(); }

  /// Terms as product operators on the full register.
  OperatorSum terms() const {
    OperatorSum sum;
    for (std::size_t i = 0; i < basis->size(); ++i) {
      if (coeffs(static_cast<Eigen::Index>(i)) != 0.0) {
        sum.add(coeffs(static_cast<Eigen::Index>(i)), basis->product_operator(i));
      }
    }
    return sum;
  }

  /// Terms acting on the register of a region; every nonzero term must fit inside.
  OperatorSum terms_on(const std::vector<int>& region) const {
    OperatorSum sum;
    for (std::size_t i = 0; i < basis->size(); ++i) {
      if (coeffs(static_cast<Eigen::Index>(i)) != 0.0) {
        sum.add(coeffs(static_cast<Eigen::Index>(i)), basis->product_operator(i, region));
      }
    }
    return sum;
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    if (static_cast<std::size_t>(v.size()) != spec().dim()) throw std::invalid_argument("state dimension mismatch");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    for (std::size_t i = 0; i < basis->size(); ++i) {
      const double c = coeffs(static_cast<Eigen::Index>(i));
      if (c != 0.0) basis->product_operator(i).apply_add(v.data(), out.data(), c);
    }
    return out;
  }
};

inline void require_same_basis(const LocalHamiltonian& a, const LocalHamiltonian& b) {
  if (!a.basis || !b.basis) throw std::invalid_argument("Hamiltonian without basis");
  if (a.basis != b.basis && (a.basis->spec() != b.basis->spec() || a.basis->size() != b.basis->size())) {
    throw std::invalid_argument("Hamiltonians live on different bases");
  }
}

/// i.i.d. Gaussian(0, stddev^2) coefficients from a seeded mt19937_64.
inline LocalHamiltonian random_disordered(std::shared_ptr<const LocalBasis> basis, std::uint64_t seed,
                                          double stddev = 1.0) {
  if (!(stddev > 0)) throw std::invalid_argument("stddev must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis->size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = normal(rng);
  return {std::move(basis), std::move(c), "disordered seed=" + std::to_string(seed)};
}

/// Draws S/n coefficients once and repeats them on every anchor.
inline LocalHamiltonian random_translation_invariant(std::shared_ptr<const LocalBasis> basis, std::uint64_t seed,
                                                     double stddev = 1.0) {
  if (basis->spec().boundary != Boundary::periodic) {
    throw std::invalid_argument("translation invariance needs a periodic chain");
  }
  if (!(stddev > 0)) throw std::invalid_argument("stddev must be positive");
  const int per_site = basis->labels_per_site();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Eigen::VectorXd cell(per_site);
  for (int a = 0; a < per_site; ++a) cell(a) = normal(rng);
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis->size()));
  for (int x = 0; x < basis->spec().n; ++x) c.segment(x * per_site, per_site) = cell;
  return {std::move(basis), std::move(c), "ti seed=" + std::to_string(seed)};
}

/// The per-anchor coefficient vector of a translation-invariant Hamiltonian.
inline Eigen::VectorXd ti_coefficients(const LocalHamiltonian& h, double tol = 1e-12) {
  const int per_site = h.basis->labels_per_site();
  Eigen::VectorXd cell = h.coeffs.head(per_site);
  for (int x = 1; x < h.spec().n; ++x) {
    if ((h.coeffs.segment(x * per_site, per_site) - cell).cwiseAbs().maxCoeff() > tol * std::max(1.0, cell.norm())) {
      throw std::invalid_argument("Hamiltonian is not translation invariant");
    }
  }
  return cell;
}

/// Standard named models on qubit chains (bonds wrap on periodic chains).
///  tfim:       -J sum Z Z - h sum X - hz sum Z          (J=1, h=1, hz=0)
///  xxz:        J sum (X X + Y Y + Delta Z Z) + hz sum Z (J=1, Delta=1, hz=0)
///  heisenberg: xxz with Delta = 1
///  decoupled:  sum_x h_x sigma^axis_x, no inter-site couplings; axis in {1,2,3}
///              (default 3 = z), h_x = h (default 1) plus optional uniform
///              disorder of width `disorder` drawn with `seed`.
inline LocalHamiltonian named_model(const std::string& name, const std::map<std::string, double>& params,
                                    std::shared_ptr<const LocalBasis> basis) {
  const LatticeSpec& spec = basis->spec();
  if (spec.local_dim != 2) throw std::invalid_argument("named models are defined for qubits");
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
  auto add = [&](SiteLabels key, double value) {
    auto idx = basis->find(std::move(key));
    if (!idx) throw std::logic_error("model term missing from basis");
    c(static_cast<Eigen::Index>(*idx)) += value;
  };
  const int bonds = spec.boundary == Boundary::periodic ? spec.n : spec.n - 1;
  auto bond = [&](int x, int a, int b, double v) {
    if (v != 0.0) add({{x, a}, {spec.wrap(x + 1), b}}, v);
  };
  auto field = [&](int x, int a, double v) {
    if (v != 0.0) add({{x, a}}, v);
  };

  std::string model = name;
  if (model == "heisenberg") model = "xxz";
  if (model == "tfim") {
    const double j = get("J", 1.0), h = get("h", 1.0), hz = get("hz", 0.0);
    for (int x = 0; x < bonds; ++x) bond(x, 3, 3, -j);
    for (int x = 0; x < spec.n; ++x) {
      field(x, 1, -h);
      field(x, 3, -hz);
    }
  } else if (model == "xxz") {
    const double j = get("J", 1.0), delta = name == "heisenberg" ? 1.0 : get("Delta", 1.0), hz = get("hz", 0.0);
    for (int x = 0; x < bonds; ++x) {
      bond(x, 1, 1, j);
      bond(x, 2, 2, j);
      bond(x, 3, 3, j * delta);
    }
    for (int x = 0; x < spec.n; ++x) field(x, 3, hz);
  } else if (model == "decoupled") {
    const int axis = static_cast<int>(get("axis", 3.0));
    if (axis < 1 || axis > 3) throw std::invalid_argument("decoupled axis must be 1, 2 or 3");
    const double h = get("h", 1.0), disorder = get("disorder", 0.0);
    std::mt19937_64 rng(static_cast<std::uint64_t>(get("seed", 0.0)));
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    for (int x = 0; x < spec.n; ++x) field(x, axis, h + (disorder != 0.0 ? disorder * uni(rng) : 0.0));
  } else {
    throw std::invalid_argument("unknown model '" + name + "' (expected tfim, xxz, heisenberg, decoupled)");
  }
  return {std::move(basis), std::move(c), name};
}

/// Sum of sigma^z over all sites as a coefficient vector.
inline Eigen::VectorXd total_sz(const LocalBasis& basis) {
  if (basis.spec().local_dim != 2) throw std::invalid_argument("total_sz is defined for qubits");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (int x = 0; x < basis.spec().n; ++x) {
    if (auto idx = basis.find({{x, 3}})) c(static_cast<Eigen::Index>(*idx)) = 1.0;
  }
  return c;
}

/// Dense N x N matrix of a weighted sum of basis operators on a register.
inline Eigen::MatrixXcd assemble_dense(const OperatorSum& terms, std::size_t dim, std::size_t cap = kDefaultDenseCap) {
  if (dim > cap) {
    throw std::invalid_argument("dense assembly of dimension " + std::to_string(dim) + " exceeds the cap " +
                                std::to_string(cap) + "; use matrix-free application (apply / assemble_sparse)");
  }
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    e(c) = 1.0;
    terms.apply_add(e.data(), m.col(c).data());
    e(c) = 0.0;
  }
  return m;
}

inline Eigen::MatrixXcd assemble_dense(const LocalHamiltonian& h, std::size_t cap = kDefaultDenseCap) {
  return assemble_dense(h.terms(), h.spec().dim(), cap);
}

/// Sparse matrix of H for iterative solvers.
inline Eigen::SparseMatrix<cplx> assemble_sparse(const LocalHamiltonian& h) {
  const std::size_t dim = h.spec().dim();
  const OperatorSum terms = h.terms();
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(terms.size() * dim);
  for (const auto& [coeff, op] : terms.terms()) {
    const int d = h.spec().local_dim;
    for (std::size_t i = 0; i < dim; ++i) {
      cplx a = coeff;
      std::size_t j = i;
      for (const auto& f : op.factors()) {
        const std::size_t s = (i / f.stride) % static_cast<std::size_t>(d);
        a *= f.op->amp[s];
        j = j - s * f.stride + static_cast<std::size_t>(f.op->target[s]) * f.stride;
      }
      if (a != cplx(0)) triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), a);
    }
  }
  Eigen::SparseMatrix<cplx> m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Projective angle between coefficient vectors, arccos |<c1, c2>| on unit vectors.
inline double coefficient_angle(const Eigen::VectorXd& c1, const Eigen::VectorXd& c2) {
  if (c1.size() != c2.size()) throw std::invalid_argument("coefficient vectors differ in length");
  return line_angle(c1, c2);
}

inline double coefficient_angle(const LocalHamiltonian& h1, const LocalHamiltonian& h2) {
  require_same_basis(h1, h2);
  return coefficient_angle(h1.coeffs, h2.coeffs);
}

/// One-site translation T: the local state on site x moves to site x+1.
inline Eigen::VectorXcd translate(const LatticeSpec& spec, const Eigen::VectorXcd& v) {
  if (static_cast<std::size_t>(v.size()) != spec.dim()) throw std::invalid_argument("state dimension mismatch");
  const auto d = static_cast<std::size_t>(spec.local_dim);
  const std::size_t top = ipow(d, spec.n - 1);
  Eigen::VectorXcd out(v.size());
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const std::size_t last = i / top;
    const std::size_t j = (i % top) * d + last;
    out(static_cast<Eigen::Index>(j)) = v(static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace hamrec
