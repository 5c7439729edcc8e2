#pragma once

#include "hamrec/correlation.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace hamrec {

enum class Verdict { unique, non_unique, no_solution };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::unique: return "unique";
    case Verdict::non_unique: return "non_unique";
    case Verdict::no_solution: return "no_solution";
  }
  return "?";
}

struct ReconstructionResult {
  Verdict verdict = Verdict::no_solution;
  /// Unit columns: the kernel vector (unique), a kernel basis (non_unique),
  /// or the lambda_1 eigen-operator as a best-effort candidate (no_solution).
  Eigen::MatrixXd recovered;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::optional<double> angle_to_truth;
  CorrelationSpectrum spectrum;

  bool best_effort() const { return verdict == Verdict::no_solution; }
  Eigen::VectorXd vector() const { return recovered.col(0); }
};

/// Flips v so that its largest-magnitude coefficient is positive.
inline void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  if (v(at) < 0) v = -v;
}

/// Kernel analysis of a real symmetric matrix. With `truth`, the angle is
/// measured to the single recovered vector, or for non_unique from truth to
/// the kernel span.
inline ReconstructionResult recover(const Eigen::MatrixXd& m, double zero_tolerance = kDefaultZeroTolerance,
                                    const std::optional<Eigen::VectorXd>& truth = std::nullopt) {
  ReconstructionResult r;
  r.spectrum = correlation_spectrum(m, zero_tolerance);
  const auto& ev = r.spectrum.eigenvalues;
  r.lambda1 = ev.size() > 0 ? ev(0) : 0.0;
  r.lambda2 = ev.size() > 1 ? ev(1) : 0.0;
  const int kd = r.spectrum.kernel_dim;
  if (kd == 1) {
    r.verdict = Verdict::unique;
  } else if (kd == 0) {
    r.verdict = Verdict::no_solution;
  } else {
    r.verdict = Verdict::non_unique;
  }
  r.recovered = r.spectrum.eigen_operators.leftCols(std::max(kd, 1));
  for (Eigen::Index c = 0; c < r.recovered.cols(); ++c) canonical_sign(r.recovered.col(c));

  if (truth) {
    if (truth->size() != m.rows()) throw std::invalid_argument("truth vector length does not match the matrix");
    if (r.verdict == Verdict::non_unique) {
      r.angle_to_truth = containment_angle(truth->normalized(), r.recovered);
    } else {
      r.angle_to_truth = line_angle(*truth, r.recovered.col(0));
    }
  }
  return r;
}

inline ReconstructionResult recover(const CorrelationMatrix& m, double zero_tolerance = kDefaultZeroTolerance,
                                    const std::optional<Eigen::VectorXd>& truth = std::nullopt) {
  return recover(m.entries, zero_tolerance, truth);
}

/// Direction of a perturbation M' = M + epsilon * delta_M.
struct Perturbation {
  double epsilon = 0.0;
  Eigen::MatrixXd delta_M;

  /// Symmetric to 1e-12 and of unit operator norm to 1e-10.
  void validate() const {
    if (symmetry_defect(delta_M) > 1e-12) throw std::invalid_argument("perturbation direction is not symmetric");
    if (std::abs(symmetric_operator_norm(delta_M) - 1.0) > 1e-10) {
      throw std::invalid_argument("perturbation direction must have unit operator norm");
    }
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const { return m + epsilon * delta_M; }
};

/// SplitMix64 step, used to derive independent per-draw seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Gaussian symmetric direction scaled to unit operator norm.
inline Eigen::MatrixXd random_symmetric_direction(Eigen::Index s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(s, s);
  for (Eigen::Index j = 0; j < s; ++j) {
    for (Eigen::Index i = 0; i < s; ++i) a(i, j) = normal(rng);
  }
  Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  sym /= symmetric_operator_norm(sym);
  return 0.5 * (sym + sym.transpose());
}

inline Perturbation random_perturbation(Eigen::Index s, double epsilon, std::uint64_t seed) {
  return {epsilon, random_symmetric_direction(s, seed)};
}

/// First-order kernel vector of M + epsilon * delta_M, normalized:
/// H' = H - epsilon * sum_{i>1} <O_i|dM|H> / (lambda_i - lambda_1) O_i.
inline Eigen::VectorXd predict_first_order(const CorrelationSpectrum& spectrum, const Perturbation& p) {
  if (spectrum.kernel_dim != 1) {
    throw precondition_error("first-order prediction needs a one-dimensional kernel (kernel_dim " +
                                 std::to_string(spectrum.kernel_dim) + ")",
                             static_cast<double>(spectrum.kernel_dim));
  }
  const Eigen::MatrixXd& o = spectrum.eigen_operators;
  const Eigen::VectorXd h = o.col(0);
  const Eigen::VectorXd coupling = o.transpose() * (p.delta_M * h);
  Eigen::VectorXd out = h;
  for (Eigen::Index i = 1; i < o.cols(); ++i) {
    out -= p.epsilon * coupling(i) / (spectrum.eigenvalues(i) - spectrum.eigenvalues(0)) * o.col(i);
  }
  out.normalize();
  canonical_sign(out);
  return out;
}

inline Eigen::VectorXd predict_first_order(const Eigen::MatrixXd& m, const Perturbation& p,
                                           double zero_tolerance = kDefaultZeroTolerance) {
  return predict_first_order(correlation_spectrum(m, zero_tolerance), p);
}

/// epsilon * |dM| / lambda_2, an upper bound on (1/2) sin(2 theta).
inline double davis_kahan_bound(double lambda2, double epsilon, double delta_norm) {
  if (!(lambda2 > 0.0)) throw std::invalid_argument("Davis-Kahan bound needs lambda2 > 0");
  return epsilon * delta_norm / lambda2;
}

struct PrincipalAngles {
  std::vector<double> theta;            // arccos(1 - lambda^2)
  std::vector<double> sqrt2_lambda;     // small-lambda expansion of the formula
  std::vector<double> two_lambda;       // the alternative 2*lambda approximation
  int clamped = 0;                      // lambdas with 1 - lambda^2 outside [-1, 1]
};

/// theta_i = arccos(1 - lambda_i^2) for every lambda in the spectrum.
inline PrincipalAngles principal_angles(const Eigen::VectorXd& lambdas) {
  PrincipalAngles out;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas(i);
    double arg = 1.0 - l * l;
    if (arg < -1.0 || arg > 1.0) {
      ++out.clamped;
      arg = std::clamp(arg, -1.0, 1.0);
    }
    out.theta.push_back(std::acos(arg));
    out.sqrt2_lambda.push_back(std::sqrt(2.0) * l);
    out.two_lambda.push_back(2.0 * l);
  }
  return out;
}

inline PrincipalAngles principal_angles(const CorrelationSpectrum& s) { return principal_angles(s.eigenvalues); }

struct SensitivityRow {
  double epsilon = 0.0;
  double median_theta = 0.0;
  double max_theta = 0.0;
  double bound = 0.0;           // Davis-Kahan bound on (1/2) sin(2 theta)
  double max_half_sin2 = 0.0;   // largest measured (1/2) sin(2 theta)
  int violations = 0;           // draws with (1/2) sin(2 theta) > bound + 1e-12
  std::vector<double> thetas;
};

struct SensitivityReport {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int draws = 0;
  std::uint64_t master_seed = 0;
  std::vector<SensitivityRow> rows;
};

/// Angle between the unperturbed kernel vector and the lambda_1 eigenvector of
/// M + epsilon * dM over `draws` random unit directions per epsilon. Draw d
/// uses the same direction for every epsilon.
inline SensitivityReport sensitivity_report(const Eigen::MatrixXd& m, const std::vector<double>& epsilons, int draws,
                                            std::uint64_t master_seed,
                                            double zero_tolerance = kDefaultZeroTolerance) {
  if (draws < 1) throw std::invalid_argument("at least one perturbation draw is required");
  const auto base = correlation_spectrum(m, zero_tolerance);
  if (base.kernel_dim != 1) {
    throw precondition_error("sensitivity analysis needs a unique kernel at epsilon = 0",
                             static_cast<double>(base.kernel_dim));
  }
  const Eigen::VectorXd h = base.eigen_operators.col(0);
  SensitivityReport rep;
  rep.lambda1 = base.eigenvalues(0);
  rep.lambda2 = base.eigenvalues(1);
  rep.draws = draws;
  rep.master_seed = master_seed;

  std::vector<Eigen::MatrixXd> directions;
  for (int d = 0; d < draws; ++d) {
    directions.push_back(random_symmetric_direction(m.rows(), splitmix64(master_seed + static_cast<std::uint64_t>(d))));
  }
  for (double eps : epsilons) {
    SensitivityRow row;
    row.epsilon = eps;
    row.bound = davis_kahan_bound(rep.lambda2, eps, 1.0);
    for (const auto& dm : directions) {
      const auto pert = correlation_spectrum(Eigen::MatrixXd(m + eps * dm), zero_tolerance);
      const double theta = line_angle(h, pert.eigen_operators.col(0));
      const double half_sin2 = 0.5 * std::sin(2.0 * theta);
      row.thetas.push_back(theta);
      row.max_theta = std::max(row.max_theta, theta);
      row.max_half_sin2 = std::max(row.max_half_sin2, half_sin2);
      if (half_sin2 > row.bound + 1e-12) ++row.violations;
    }
    row.median_theta = median(row.thetas);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace hamrec
