#pragma once

#include "hamrec/momentum.hpp"

#include <optional>
#include <vector>

namespace hamrec {

enum class SubregionMode { disordered, translation_invariant, thermal_log, rho_commutator };

inline const char* to_string(SubregionMode m) {
  switch (m) {
    case SubregionMode::disordered: return "disordered";
    case SubregionMode::translation_invariant: return "translation_invariant";
    case SubregionMode::thermal_log: return "thermal_log";
    case SubregionMode::rho_commutator: return "rho_commutator";
  }
  return "?";
}

inline SubregionMode subregion_mode_from_string(const std::string& s) {
  if (s == "disordered") return SubregionMode::disordered;
  if (s == "translation_invariant" || s == "ti") return SubregionMode::translation_invariant;
  if (s == "thermal_log") return SubregionMode::thermal_log;
  if (s == "rho_commutator") return SubregionMode::rho_commutator;
  throw std::invalid_argument("unknown subregion mode '" + s + "'");
}

struct SubregionTask {
  LatticeSpec full_spec;
  std::vector<int> region;
  SubregionMode mode = SubregionMode::disordered;
  int trim = 1;

  void validate() const {
    full_spec.validate();
    validate_region(full_spec, region);
    if (trim < 0) throw std::invalid_argument("trim must be non-negative");
    if (static_cast<int>(region.size()) < full_spec.k + 2 * trim) {
      throw std::invalid_argument("region of " + std::to_string(region.size()) + " sites is too small for k=" +
                                  std::to_string(full_spec.k) + " and trim=" + std::to_string(trim));
    }
  }
};

/// Mask of the basis operators supported on region positions [trim, m-1-trim].
inline std::vector<bool> interior_mask(const LocalBasis& basis, const std::vector<int>& region, int trim) {
  const int m = static_cast<int>(region.size());
  if (trim < 0 || m - 2 * trim < basis.spec().k) {
    throw std::invalid_argument("trim " + std::to_string(trim) + " leaves no interior in a region of " +
                                std::to_string(m) + " sites");
  }
  std::vector<int> interior(region.begin() + trim, region.end() - trim);
  std::vector<bool> keep(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) keep[i] = basis.supported_in(i, interior);
  return keep;
}

/// Coefficients of the full Hamiltonian on a restricted basis (via parent_index).
inline Eigen::VectorXd restrict_coefficients(const LocalHamiltonian& h, const LocalBasis& sub) {
  const auto& parent = sub.parent_index();
  if (parent.size() != sub.size()) throw std::invalid_argument("basis is not a restriction");
  Eigen::VectorXd c(static_cast<Eigen::Index>(sub.size()));
  for (std::size_t i = 0; i < sub.size(); ++i) c(static_cast<Eigen::Index>(i)) = h.coeffs(static_cast<Eigen::Index>(parent[i]));
  return c;
}

/// Angle between a and b after zeroing the coefficients outside the mask; pi/2 if either becomes zero.
inline double masked_angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<bool>& keep) {
  Eigen::VectorXd ma = a, mb = b;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) ma(static_cast<Eigen::Index>(i)) = mb(static_cast<Eigen::Index>(i)) = 0.0;
  }
  if (ma.norm() == 0.0 || mb.norm() == 0.0) return std::numbers::pi / 2;
  return line_angle(ma, mb);
}

struct SubregionResult {
  ReconstructionResult reconstruction;
  int trim = 0;
  std::size_t interior_ops = 0;
  std::optional<double> theta_untrimmed;
  std::optional<double> theta_trimmed;
};

namespace detail {

inline SubregionResult lowest_eigen_operator(const CorrelationMatrix& m, const std::vector<int>& region,
                                             const std::optional<Eigen::VectorXd>& truth, int trim,
                                             double zero_tolerance) {
  const auto keep = interior_mask(*m.basis, region, trim);
  SubregionResult out;
  out.reconstruction = recover(m.entries, zero_tolerance);
  out.trim = trim;
  out.interior_ops = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  if (truth) {
    if (truth->size() != m.entries.rows()) throw std::invalid_argument("truth length does not match the region basis");
    const Eigen::VectorXd w = out.reconstruction.recovered.col(0);
    out.theta_untrimmed = line_angle(*truth, w);
    out.theta_trimmed = masked_angle(*truth, w, keep);
  }
  return out;
}

}  // namespace detail

/// lambda_1 eigen-operator of M^(rho_A) over a basis supported inside A.
inline SubregionResult recover_disordered_subregion(const DensityMatrix& rho_a,
                                                    std::shared_ptr<const LocalBasis> basis_a,
                                                    const std::optional<Eigen::VectorXd>& truth = std::nullopt,
                                                    int trim = 1, double zero_tolerance = kDefaultZeroTolerance) {
  interior_mask(*basis_a, rho_a.region, trim);
  return detail::lowest_eigen_operator(build_mixed_expectation(rho_a, std::move(basis_a)), rho_a.region, truth, trim,
                                       zero_tolerance);
}

/// Same, from the commutator matrix Mbar^(rho_A).
inline SubregionResult recover_commutator_subregion(const DensityMatrix& rho_a,
                                                    std::shared_ptr<const LocalBasis> basis_a,
                                                    const std::optional<Eigen::VectorXd>& truth = std::nullopt,
                                                    int trim = 1, double zero_tolerance = kDefaultZeroTolerance) {
  interior_mask(*basis_a, rho_a.region, trim);
  return detail::lowest_eigen_operator(build_rho_commutator(rho_a, std::move(basis_a)), rho_a.region, truth, trim,
                                       zero_tolerance);
}

struct TiSubregionResult {
  ReconstructionResult reconstruction;  // over the per-anchor coefficient space
  Eigen::MatrixXd block_estimate;       // estimated q = 0 block
  int anchors_used = 0;
};

/// Estimates the q = 0 block from M^(rho_A) as sum_r f(r), where f(r) averages
/// M_{x a, (x+r) b} over anchor pairs whose windows lie inside A shrunk by
/// `trim` sites on each side. When A is the whole ring separations wrap mod n
/// and the estimate is the exact q = 0 block.
inline TiSubregionResult recover_ti_from_subregion(const DensityMatrix& rho_a, std::shared_ptr<const LocalBasis> full,
                                                   double zero_tolerance = kDefaultZeroTolerance, int trim = 0,
                                                   const std::optional<Eigen::VectorXd>& truth = std::nullopt) {
  const LatticeSpec& spec = full->spec();
  const int per = full->labels_per_site();
  const int m = static_cast<int>(rho_a.region.size());
  if (m < spec.k + 1) {
    throw std::invalid_argument("region of " + std::to_string(m) + " sites holds fewer than two operator anchors");
  }
  const bool ring = m == spec.n;
  if (ring && trim != 0) throw std::invalid_argument("a full ring has no edges to trim");
  if (!ring && m - 2 * trim < spec.k) throw std::invalid_argument("trim leaves no operator window inside the region");

  std::vector<int> interior(rho_a.region.begin() + trim, rho_a.region.end() - trim);
  auto basis_w = std::make_shared<const LocalBasis>(restrict_to_windows(*full, interior));
  const CorrelationMatrix mat = build_mixed_expectation(rho_a, basis_w);

  // Position of each operator's anchor within the interior.
  std::vector<int> pos(basis_w->size());
  int anchors = 0;
  for (std::size_t i = 0; i < basis_w->size(); ++i) {
    pos[i] = static_cast<int>(std::find(interior.begin(), interior.end(), basis_w->anchor(i)) - interior.begin());
    anchors = std::max(anchors, pos[i] + 1);
  }

  const int span = ring ? spec.n : 2 * anchors - 1;
  auto slot = [&](int r) { return ring ? ((r % spec.n) + spec.n) % spec.n : r + anchors - 1; };
  std::vector<Eigen::MatrixXd> sum(static_cast<std::size_t>(span), Eigen::MatrixXd::Zero(per, per));
  std::vector<Eigen::MatrixXi> count(static_cast<std::size_t>(span), Eigen::MatrixXi::Zero(per, per));
  for (std::size_t i = 0; i < basis_w->size(); ++i) {
    for (std::size_t j = 0; j < basis_w->size(); ++j) {
      const auto s = static_cast<std::size_t>(slot(pos[j] - pos[i]));
      const int a = basis_w->alpha(i), b = basis_w->alpha(j);
      sum[s](a, b) += mat.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      count[s](a, b) += 1;
    }
  }
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(per, per);
  for (int s = 0; s < span; ++s) {
    for (int a = 0; a < per; ++a) {
      for (int b = 0; b < per; ++b) {
        const int c = count[static_cast<std::size_t>(s)](a, b);
        if (c > 0) block(a, b) += sum[static_cast<std::size_t>(s)](a, b) / c;
      }
    }
  }
  TiSubregionResult out;
  out.block_estimate = 0.5 * (block + block.transpose());
  out.anchors_used = anchors;
  out.reconstruction = recover(out.block_estimate, zero_tolerance, truth);
  return out;
}

struct ThermalLogResult {
  Eigen::VectorXd coefficients;  // c_i = (1/D) Tr(L_i (-log rho_A)), trace part removed
  int clamped = 0;               // eigenvalues raised to the floor
  bool no_signal = false;        // projection vanishes (e.g. maximally mixed input)
  std::optional<double> beta;    // <c, h> / |h|, the scale against the unit-normalized truth
  std::optional<double> theta_untrimmed;
  std::optional<double> theta_trimmed;
};

/// Projects -log(rho_A) onto the region basis. Eigenvalues below `floor` are
/// clamped; more than D/4 clamped eigenvalues is rejected as rank deficient.
inline ThermalLogResult recover_thermal_log(const DensityMatrix& rho_a, const LocalBasis& basis_a,
                                            const std::optional<Eigen::VectorXd>& truth = std::nullopt, int trim = 1,
                                            double floor = 1e-14) {
  for (std::size_t i = 0; i < basis_a.size(); ++i) {
    if (!basis_a.supported_in(i, rho_a.region)) {
      throw std::invalid_argument("basis operator " + basis_a.name(i) + " lies outside the density-matrix region");
    }
  }
  const auto keep = interior_mask(basis_a, rho_a.region, trim);
  const auto e = eig_hermitian(rho_a.matrix, 1e-10);
  const Eigen::Index d = e.values.size();
  ThermalLogResult out;
  Eigen::VectorXd logs(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double lam = e.values(i);
    if (lam < floor) {
      ++out.clamped;
      lam = floor;
    }
    logs(i) = -std::log(lam);
  }
  if (out.clamped > d / 4) {
    throw std::invalid_argument("density matrix is rank deficient (" + std::to_string(out.clamped) + " of " +
                                std::to_string(d) + " eigenvalues below " + std::to_string(floor) + ")");
  }
  Eigen::MatrixXcd k = e.vectors * logs.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  k -= (k.trace() / static_cast<double>(d)) * Eigen::MatrixXcd::Identity(d, d);

  out.coefficients.resize(static_cast<Eigen::Index>(basis_a.size()));
  for (std::size_t i = 0; i < basis_a.size(); ++i) {
    const Eigen::MatrixXcd lk = basis_a.product_operator(i, rho_a.region).apply_columns(k);
    out.coefficients(static_cast<Eigen::Index>(i)) = lk.trace().real() / static_cast<double>(d);
  }
  out.no_signal = out.coefficients.norm() <= 1e-10 * std::max(1.0, logs.cwiseAbs().maxCoeff());
  if (truth && !out.no_signal) {
    if (truth->size() != out.coefficients.size()) throw std::invalid_argument("truth length does not match the basis");
    out.beta = out.coefficients.dot(*truth) / truth->norm();
    out.theta_untrimmed = line_angle(*truth, out.coefficients);
    out.theta_trimmed = masked_angle(*truth, out.coefficients, keep);
  }
  return out;
}

}  // namespace hamrec
