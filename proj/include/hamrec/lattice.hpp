#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hamrec {

/// Raised when an input is well formed but violates a state-dependent
/// precondition (nonzero momentum, degenerate kernel, ...).
class precondition_error : public std::runtime_error {
public:
  explicit precondition_error(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

enum class Boundary { periodic, open };

inline std::string_view to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "open";
}

inline Boundary boundary_from_string(std::string_view s) {
  if (s == "periodic" || s == "pbc") return Boundary::periodic;
  if (s == "open" || s == "obc") return Boundary::open;
  throw std::invalid_argument("unknown boundary condition '" + std::string(s) + "'");
}

/// One-dimensional lattice of n sites with local dimension d and
/// interaction range k (contiguous sites).
struct LatticeSpec {
  int n = 0;
  int local_dim = 2;
  int k = 2;
  Boundary boundary = Boundary::periodic;

  /// Smallest ring for which every range-k support has a unique anchor.
  int min_periodic_sites() const { return k < 2 ? 3 : (2 * k - 1 > 3 ? 2 * k - 1 : 3); }

  void validate() const {
    if (n < 2) throw std::invalid_argument("lattice needs at least 2 sites, got " + std::to_string(n));
    if (local_dim < 2) throw std::invalid_argument("local_dim must be >= 2");
    if (k < 1) throw std::invalid_argument("interaction range k must be >= 1");
    if (k > n) {
      throw std::invalid_argument("interaction range k=" + std::to_string(k) + " exceeds site count n=" +
                                  std::to_string(n));
    }
    if (boundary == Boundary::periodic && n < min_periodic_sites()) {
      throw std::invalid_argument("periodic chain with k=" + std::to_string(k) + " needs n >= " +
                                  std::to_string(min_periodic_sites()) + " (bonds would be double counted), got n=" +
                                  std::to_string(n));
    }
    double log_dim = 0;
    for (int i = 0; i < n; ++i) log_dim += std::log2(static_cast<double>(local_dim));
    if (log_dim > 62) throw std::invalid_argument("Hilbert space dimension does not fit in 64 bits");
  }

  /// Total Hilbert space dimension local_dim^n.
  std::size_t dim() const {
    std::size_t d = 1;
    for (int i = 0; i < n; ++i) d *= static_cast<std::size_t>(local_dim);
    return d;
  }

  /// Site index with periodic wrap.
  int wrap(int site) const { return ((site % n) + n) % n; }

  bool operator==(const LatticeSpec&) const = default;
};

/// Integer power for small exponents.
inline std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace hamrec
