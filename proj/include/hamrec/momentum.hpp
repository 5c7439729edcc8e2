#pragma once

#include "hamrec/reconstruction.hpp"

#include <numbers>
#include <optional>
#include <vector>

namespace hamrec {

/// Momentum mode j with T v = exp(-2 pi i j / n) v, where T moves site x to x+1.
/// Throws precondition_error carrying the residual |T v - c v| when v is not a
/// translation eigenstate within `tol`.
inline int state_momentum(const Eigen::VectorXcd& v, const LatticeSpec& spec, double tol = 1e-8) {
  if (spec.boundary != Boundary::periodic) throw std::invalid_argument("momentum needs a periodic chain");
  if (static_cast<std::size_t>(v.size()) != spec.dim()) throw std::invalid_argument("state dimension mismatch");
  const double norm = v.norm();
  if (norm == 0.0) throw std::invalid_argument("zero state has no momentum");
  const Eigen::VectorXcd tv = translate(spec, v);
  const cplx c = v.dot(tv) / (norm * norm);
  const double residual = (tv - c * v).norm() / norm;
  if (residual > tol) {
    throw precondition_error("state is not a translation eigenstate (residual " + std::to_string(residual) + ")",
                             residual);
  }
  const double turns = -std::arg(c) * spec.n / (2.0 * std::numbers::pi);
  const int j = static_cast<int>(std::lround(turns));
  const cplx expected = std::polar(1.0, -2.0 * std::numbers::pi * j / spec.n);
  const double phase_residual = std::abs(c - expected);
  if (phase_residual > tol) {
    throw precondition_error("translation eigenvalue is not an n-th root of unity", phase_residual);
  }
  return ((j % spec.n) + spec.n) % spec.n;
}

/// Momentum blocks B(q)_{ab} = (1/n) sum_{x,y} e^{iq(y-x)} M_{xa,yb}, q = 2 pi j / n.
struct MomentumBlocks {
  LatticeSpec spec;
  std::vector<Eigen::MatrixXcd> blocks;  // indexed by j
  int state_momentum = 0;
  double offdiagonal_residual = 0.0;     // largest |entry| of the q != p blocks of U^dagger M U

  int bands() const { return blocks.empty() ? 0 : static_cast<int>(blocks.front().rows()); }
  double q(int j) const { return 2.0 * std::numbers::pi * j / spec.n; }
};

namespace detail {

/// Unitary U_{(x a),(j a)} = e^{i q_j x} / sqrt(n) taking position to momentum labels.
inline Eigen::MatrixXcd fourier_unitary(int n, int per_site) {
  const Eigen::Index s = static_cast<Eigen::Index>(n) * per_site;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(s, s);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (int x = 0; x < n; ++x) {
    for (int j = 0; j < n; ++j) {
      const cplx phase = std::polar(norm, 2.0 * std::numbers::pi * j * x / n);
      for (int a = 0; a < per_site; ++a) u(x * per_site + a, j * per_site + a) = phase;
    }
  }
  return u;
}

}  // namespace detail

/// Blocks of a correlation matrix over a full periodic basis; the matrix must
/// be translation invariant so that every q != p block vanishes (checked to
/// 1e-10 relative to max|M|).
inline MomentumBlocks build_blocks(const CorrelationMatrix& m, int source_momentum = 0, double tol = 1e-10) {
  const LocalBasis& basis = *m.basis;
  const int n = basis.spec().n;
  const int per = basis.labels_per_site();
  const Eigen::MatrixXcd u = detail::fourier_unitary(n, per);
  const Eigen::MatrixXcd t = u.adjoint() * m.entries.cast<cplx>() * u;

  MomentumBlocks out;
  out.spec = basis.spec();
  out.state_momentum = source_momentum;
  for (int j = 0; j < n; ++j) {
    for (int p = 0; p < n; ++p) {
      if (p == j) continue;
      out.offdiagonal_residual =
          std::max(out.offdiagonal_residual, t.block(j * per, p * per, per, per).cwiseAbs().maxCoeff());
    }
    Eigen::MatrixXcd b = t.block(j * per, j * per, per, per);
    out.blocks.push_back(0.5 * (b + b.adjoint()));
  }
  const double scale = std::max(1.0, m.entries.cwiseAbs().maxCoeff());
  if (out.offdiagonal_residual > tol * scale) {
    throw precondition_error("correlation matrix is not block diagonal in momentum (residual " +
                                 std::to_string(out.offdiagonal_residual) + ")",
                             out.offdiagonal_residual);
  }
  return out;
}

/// Blocks for a zero-momentum state; nonzero momentum is rejected.
inline MomentumBlocks build_blocks(const Eigen::VectorXcd& v, std::shared_ptr<const LocalBasis> basis,
                                   double tol = 1e-10) {
  const int j = state_momentum(v, basis->spec());
  if (j != 0) throw precondition_error("state has momentum j=" + std::to_string(j) + ", zero required", j);
  return build_blocks(build_pure(v, std::move(basis)), 0, tol);
}

/// Translation-invariant correlation matrix assembled back from blocks.
inline Eigen::MatrixXd assemble_from_blocks(const MomentumBlocks& b) {
  const int n = b.spec.n;
  const int per = b.bands();
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(n * per, n * per);
  for (int j = 0; j < n; ++j) diag.block(j * per, j * per, per, per) = b.blocks[static_cast<std::size_t>(j)];
  const Eigen::MatrixXcd u = detail::fourier_unitary(n, per);
  return (u * diag * u.adjoint()).real();
}

struct GapReport {
  int band = 8;  // gap is measured between bands band-1 and band (0-based), i.e. above the lowest `band` bands
  double gap = 0.0;           // min_j lambda[band][j] - max_j lambda[band-1][j]
  int lower_max_j = 0;
  int upper_min_j = 0;
  double largest_gap = 0.0;   // the same quantity maximized over the band index
  int largest_gap_band = 0;
};

struct BandSpectrum {
  int n = 0;
  std::vector<std::vector<double>> lambda;  // [band][j], ascending in band at fixed j
  GapReport gap_report;

  int bands() const { return static_cast<int>(lambda.size()); }
  std::vector<double> flattened() const {
    std::vector<double> all;
    for (const auto& band : lambda) all.insert(all.end(), band.begin(), band.end());
    std::sort(all.begin(), all.end());
    return all;
  }
};

inline GapReport gap_between(const std::vector<std::vector<double>>& lambda, int band) {
  if (band < 1 || band >= static_cast<int>(lambda.size())) {
    throw std::invalid_argument("gap band index " + std::to_string(band) + " out of range");
  }
  const auto& lo = lambda[static_cast<std::size_t>(band - 1)];
  const auto& hi = lambda[static_cast<std::size_t>(band)];
  GapReport g;
  g.band = band;
  g.lower_max_j = static_cast<int>(std::max_element(lo.begin(), lo.end()) - lo.begin());
  g.upper_min_j = static_cast<int>(std::min_element(hi.begin(), hi.end()) - hi.begin());
  g.gap = hi[static_cast<std::size_t>(g.upper_min_j)] - lo[static_cast<std::size_t>(g.lower_max_j)];
  return g;
}

/// Per-momentum ascending eigenvalues sorted into bands, with the gap above band `gap_band`.
inline BandSpectrum band_spectrum(const MomentumBlocks& blocks, int gap_band = 8) {
  BandSpectrum out;
  out.n = blocks.spec.n;
  const int per = blocks.bands();
  out.lambda.assign(static_cast<std::size_t>(per), std::vector<double>(static_cast<std::size_t>(out.n)));
  for (int j = 0; j < out.n; ++j) {
    const auto e = eig_hermitian(blocks.blocks[static_cast<std::size_t>(j)], 1e-10);
    for (int a = 0; a < per; ++a) out.lambda[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] = e.values(a);
  }
  out.gap_report = gap_between(out.lambda, gap_band);
  for (int b = 1; b < per; ++b) {
    const GapReport g = gap_between(out.lambda, b);
    if (b == 1 || g.gap > out.gap_report.largest_gap) {
      out.gap_report.largest_gap = g.gap;
      out.gap_report.largest_gap_band = b;
    }
  }
  return out;
}

/// Kernel analysis of the real symmetric part of the q = 0 block; vectors live
/// in the per-anchor coefficient space.
inline ReconstructionResult recover_translation_invariant(const Eigen::MatrixXcd& b0,
                                                          double zero_tolerance = kDefaultZeroTolerance,
                                                          const std::optional<Eigen::VectorXd>& truth = std::nullopt) {
  if (hermiticity_defect(b0) > 1e-10) throw std::invalid_argument("q=0 block is not Hermitian");
  const Eigen::MatrixXd re = b0.real();
  return recover(Eigen::MatrixXd(0.5 * (re + re.transpose())), zero_tolerance, truth);
}

struct SmoothnessProfile {
  std::vector<double> roughness;           // per band, max over j of |lambda(j+1) - lambda(j)| with wrap
  std::vector<std::vector<double>> steps;  // [band][j] = |lambda(j+1 mod n) - lambda(j)|
};

inline SmoothnessProfile smoothness_profile(const BandSpectrum& bands) {
  if (bands.n < 6) throw std::invalid_argument("smoothness profile needs n >= 6");
  SmoothnessProfile out;
  for (const auto& band : bands.lambda) {
    std::vector<double> steps;
    for (int j = 0; j < bands.n; ++j) {
      steps.push_back(std::abs(band[static_cast<std::size_t>((j + 1) % bands.n)] - band[static_cast<std::size_t>(j)]));
    }
    out.roughness.push_back(*std::max_element(steps.begin(), steps.end()));
    out.steps.push_back(std::move(steps));
  }
  return out;
}

}  // namespace hamrec
