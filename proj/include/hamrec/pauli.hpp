#pragma once

#include "hamrec/linalg.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <string>

namespace hamrec {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Qubit Pauli string i^phase * prod_s P_s on up to 64 sites, stored as X/Z
/// bit masks. Site s is bit s of the computational-basis index; |0> is spin up.
class PauliString {
public:
  PauliString() = default;

  explicit PauliString(const std::map<int, Pauli>& letters, int phase = 0) : phase_(((phase % 4) + 4) % 4) {
    for (const auto& [site, p] : letters) set(site, p);
  }

  /// Parse "XIZY" (site 0 first); a leading sign or i is allowed ("-iXY").
  static PauliString parse(std::string_view text) {
    int phase = 0;
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
      if (text[pos] == '-') phase += 2;
      ++pos;
    }
    if (pos < text.size() && text[pos] == 'i') {
      phase += 1;
      ++pos;
    }
    PauliString p;
    p.phase_ = phase % 4;
    for (int site = 0; pos < text.size(); ++pos, ++site) {
      switch (text[pos]) {
        case 'I': break;
        case 'X': p.set(site, Pauli::X); break;
        case 'Y': p.set(site, Pauli::Y); break;
        case 'Z': p.set(site, Pauli::Z); break;
        default: throw std::invalid_argument("bad Pauli letter in '" + std::string(text) + "'");
      }
    }
    return p;
  }

  void set(int site, Pauli p) {
    if (site < 0 || site >= 64) throw std::invalid_argument("Pauli site out of range");
    const std::uint64_t bit = std::uint64_t{1} << site;
    x_ &= ~bit;
    z_ &= ~bit;
    if (p == Pauli::X || p == Pauli::Y) x_ |= bit;
    if (p == Pauli::Z || p == Pauli::Y) z_ |= bit;
  }

  Pauli at(int site) const {
    const bool x = (x_ >> site) & 1U;
    const bool z = (z_ >> site) & 1U;
    if (x && z) return Pauli::Y;
    if (x) return Pauli::X;
    if (z) return Pauli::Z;
    return Pauli::I;
  }

  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  int phase_exponent() const { return phase_; }
  cplx phase() const { return i_pow(phase_); }
  bool is_hermitian() const { return phase_ % 2 == 0; }
  int weight() const { return std::popcount(x_ | z_); }

  /// Product with the correct phase; closure of the Pauli group.
  PauliString operator*(const PauliString& rhs) const {
    // Each letter is stored as X^x Z^z with Y = i X Z.
    PauliString r;
    r.x_ = x_ ^ rhs.x_;
    r.z_ = z_ ^ rhs.z_;
    const int exponent = phase_ + rhs.phase_ + std::popcount(x_ & z_) + std::popcount(rhs.x_ & rhs.z_) +
                         2 * std::popcount(z_ & rhs.x_) - std::popcount(r.x_ & r.z_);
    r.phase_ = ((exponent % 4) + 4) % 4;
    return r;
  }

  bool operator==(const PauliString&) const = default;

  /// out += coeff * P * in, in O(N) without materializing P.
  void apply_add(std::span<const cplx> in, std::span<cplx> out, cplx coeff = 1.0) const {
    if (in.size() != out.size()) throw std::invalid_argument("PauliString::apply: size mismatch");
    check_dim(in.size());
    const cplx base = coeff * i_pow(phase_ + std::popcount(x_ & z_));
    for (std::size_t i = 0; i < in.size(); ++i) {
      const bool odd = std::popcount(static_cast<std::uint64_t>(i) & z_) & 1;
      out[i ^ x_] += (odd ? -base : base) * in[i];
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& state) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(state.size());
    apply_add({state.data(), static_cast<std::size_t>(state.size())},
              {out.data(), static_cast<std::size_t>(out.size())});
    return out;
  }

  Eigen::MatrixXcd dense(int n) const {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
      e(c) = 1.0;
      m.col(c) = apply(e);
    }
    return m;
  }

  std::string str(int n) const {
    static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
    std::string s;
    switch (phase_) {
      case 1: s = "i"; break;
      case 2: s = "-"; break;
      case 3: s = "-i"; break;
      default: break;
    }
    for (int site = 0; site < n; ++site) s += letters[static_cast<int>(at(site))];
    return s;
  }

private:
  static cplx i_pow(int e) {
    switch (((e % 4) + 4) % 4) {
      case 0: return {1, 0};
      case 1: return {0, 1};
      case 2: return {-1, 0};
      default: return {0, -1};
    }
  }

  void check_dim(std::size_t dim) const {
    if (dim == 0 || (dim & (dim - 1)) != 0) throw std::invalid_argument("qubit state length must be a power of 2");
    if (((x_ | z_) >> std::countr_zero(dim)) != 0) {
      throw std::invalid_argument("PauliString acts on sites beyond the state");
    }
  }

  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  int phase_ = 0;
};

/// Weighted sum of Pauli strings applied to a state.
inline Eigen::VectorXcd apply_operator(std::span<const std::pair<double, PauliString>> terms,
                                       const Eigen::VectorXcd& state) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(state.size());
  for (const auto& [w, p] : terms) {
    p.apply_add({state.data(), static_cast<std::size_t>(state.size())},
                {out.data(), static_cast<std::size_t>(out.size())}, w);
  }
  return out;
}

inline Eigen::VectorXcd apply_operator(const PauliString& p, const Eigen::VectorXcd& state) { return p.apply(state); }

}  // namespace hamrec
