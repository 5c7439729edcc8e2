#pragma once

#include "hamrec/lattice.hpp"
#include "hamrec/pauli.hpp"
#include "hamrec/product_operator.hpp"
#include "hamrec/site_operators.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hamrec {

/// A basis element supported in the window anchor, anchor+1, ..., anchor+k-1
/// (sites wrap on periodic chains). labels[t] is the single-site label on
/// site anchor+t; label 0 is the identity.
struct LocalOp {
  int anchor = 0;
  std::vector<int> labels;
};

using SiteLabels = std::vector<std::pair<int, int>>;  // (site, label), sorted by site, identity omitted

/// Checks that `region` is a contiguous run of distinct sites and returns it.
inline std::vector<int> validate_region(const LatticeSpec& spec, const std::vector<int>& region) {
  if (region.empty()) throw std::invalid_argument("region is empty");
  if (static_cast<int>(region.size()) > spec.n) throw std::invalid_argument("region larger than the lattice");
  for (std::size_t t = 0; t < region.size(); ++t) {
    if (region[t] < 0 || region[t] >= spec.n) throw std::invalid_argument("region site out of range");
    if (t == 0) continue;
    const int expected = spec.boundary == Boundary::periodic ? spec.wrap(region[t - 1] + 1) : region[t - 1] + 1;
    if (region[t] != expected) {
      throw std::invalid_argument("region is not contiguous at site " + std::to_string(region[t]));
    }
  }
  return region;
}

/// Contiguous region of `size` sites starting at `start`.
inline std::vector<int> make_region(const LatticeSpec& spec, int start, int size) {
  std::vector<int> r;
  for (int t = 0; t < size; ++t) r.push_back(spec.boundary == Boundary::periodic ? spec.wrap(start + t) : start + t);
  return validate_region(spec, r);
}

inline std::vector<int> full_region(const LatticeSpec& spec) { return make_region(spec, 0, spec.n); }

/// Ordered orthonormal basis {L_i} of the traceless range-k local operators.
///
/// Ordering: anchor site major, per-anchor label alpha minor, with alpha the
/// lexicographic rank of the label tuple (labels[0], ..., labels[k-1]).
/// Every anchor carries the tuples whose last label is not the identity, so
/// single-site terms sit at the right end of the window (for k = 2 and qubits,
/// sigma_a^x sigma_b^{x+1} with a in 0..3, b in 1..3). On open chains anchor 0
/// also carries the tuples ending in identities, which covers the single-site
/// terms of site 0.
class LocalBasis {
public:
  LocalBasis(LatticeSpec spec, std::shared_ptr<const SiteAlgebra> algebra, std::vector<LocalOp> ops,
             std::vector<int> alpha, std::vector<std::size_t> parent_index = {})
      : spec_(spec),
        algebra_(std::move(algebra)),
        ops_(std::move(ops)),
        alpha_(std::move(alpha)),
        parent_index_(std::move(parent_index)) {
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      SiteLabels key = support(i);
      if (key.empty()) throw std::invalid_argument("identity is not a basis element");
      if (!index_.emplace(std::move(key), i).second) {
        throw std::invalid_argument("duplicate basis element at index " + std::to_string(i));
      }
    }
  }

  const LatticeSpec& spec() const { return spec_; }
  const std::shared_ptr<const SiteAlgebra>& algebra() const { return algebra_; }
  std::size_t size() const { return ops_.size(); }
  const LocalOp& op(std::size_t i) const { return ops_.at(i); }
  const std::vector<LocalOp>& ops() const { return ops_; }
  int anchor(std::size_t i) const { return ops_.at(i).anchor; }
  int alpha(std::size_t i) const { return alpha_.at(i); }

  /// Index into the basis this one was restricted from (empty for full bases).
  const std::vector<std::size_t>& parent_index() const { return parent_index_; }
  bool is_restricted() const { return !parent_index_.empty() || ops_.size() != full_size(); }

  /// Labels per anchor site, S/n. Only meaningful for a full periodic basis.
  int labels_per_site() const {
    if (spec_.boundary != Boundary::periodic || is_restricted()) {
      throw std::logic_error("labels_per_site requires a full periodic basis");
    }
    return static_cast<int>(ops_.size()) / spec_.n;
  }

  /// Index of L_{x alpha} in a full periodic basis.
  std::size_t index(int anchor_site, int alpha_label) const {
    return static_cast<std::size_t>(anchor_site) * static_cast<std::size_t>(labels_per_site()) +
           static_cast<std::size_t>(alpha_label);
  }

  SiteLabels support(std::size_t i) const {
    const LocalOp& o = ops_.at(i);
    SiteLabels s;
    for (std::size_t t = 0; t < o.labels.size(); ++t) {
      if (o.labels[t] != 0) s.emplace_back(spec_.wrap(o.anchor + static_cast<int>(t)), o.labels[t]);
    }
    std::sort(s.begin(), s.end());
    return s;
  }

  /// Sites of the anchor window (wrapped), whether or not the labels there are trivial.
  std::vector<int> window(std::size_t i) const {
    std::vector<int> w;
    for (int t = 0; t < spec_.k; ++t) w.push_back(spec_.wrap(ops_.at(i).anchor + t));
    return w;
  }

  std::optional<std::size_t> find(SiteLabels key) const {
    for (auto& [site, label] : key) site = spec_.wrap(site);
    key.erase(std::remove_if(key.begin(), key.end(), [](const auto& p) { return p.second == 0; }), key.end());
    std::sort(key.begin(), key.end());
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    return std::nullopt;
  }

  /// L_i acting on the full n-site register.
  ProductOperator product_operator(std::size_t i) const {
    SiteLabels s = support(i);
    return ProductOperator(algebra_, s, spec_.n);
  }

  /// L_i acting on the register of a contiguous region (positions follow region order).
  ProductOperator product_operator(std::size_t i, const std::vector<int>& region) const {
    SiteLabels positioned;
    for (const auto& [site, label] : support(i)) {
      const auto it = std::find(region.begin(), region.end(), site);
      if (it == region.end()) {
        throw std::invalid_argument("basis operator " + name(i) + " is not supported inside the region");
      }
      positioned.emplace_back(static_cast<int>(it - region.begin()), label);
    }
    return ProductOperator(algebra_, positioned, static_cast<int>(region.size()));
  }

  bool supported_in(std::size_t i, const std::vector<int>& region) const {
    for (const auto& [site, label] : support(i)) {
      if (std::find(region.begin(), region.end(), site) == region.end()) return false;
    }
    return true;
  }

  PauliString pauli(std::size_t i) const {
    if (spec_.local_dim != 2) throw std::logic_error("pauli() requires qubits");
    std::map<int, Pauli> letters;
    for (const auto& [site, label] : support(i)) letters[site] = static_cast<Pauli>(label);
    return PauliString(letters);
  }

  Eigen::MatrixXcd dense(std::size_t i) const { return product_operator(i).dense(); }

  /// Human-readable name, e.g. "X3 Z4".
  std::string name(std::size_t i) const {
    std::string s;
    for (const auto& [site, label] : support(i)) {
      if (!s.empty()) s += ' ';
      s += algebra_->name(label) + std::to_string(site);
    }
    return s;
  }

  /// Size of the full basis for this spec.
  std::size_t full_size() const {
    const auto d2 = static_cast<std::size_t>(spec_.local_dim) * static_cast<std::size_t>(spec_.local_dim);
    const std::size_t per_anchor = ipow(d2, spec_.k - 1) * (d2 - 1);
    if (spec_.boundary == Boundary::periodic) return per_anchor * static_cast<std::size_t>(spec_.n);
    return per_anchor * static_cast<std::size_t>(spec_.n - spec_.k + 1) + (ipow(d2, spec_.k - 1) - 1);
  }

private:
  LatticeSpec spec_;
  std::shared_ptr<const SiteAlgebra> algebra_;
  std::vector<LocalOp> ops_;
  std::vector<int> alpha_;
  std::vector<std::size_t> parent_index_;
  std::map<SiteLabels, std::size_t> index_;
};

/// Builds the full local basis in the documented order.
inline LocalBasis build_local_basis(const LatticeSpec& spec) {
  spec.validate();
  auto algebra = SiteAlgebra::make(spec.local_dim);
  const int d2 = spec.local_dim * spec.local_dim;
  const std::size_t tuples = ipow(static_cast<std::size_t>(d2), spec.k);

  auto tuple_labels = [&](std::size_t code) {
    std::vector<int> labels(static_cast<std::size_t>(spec.k));
    for (int t = spec.k - 1; t >= 0; --t) {
      labels[static_cast<std::size_t>(t)] = static_cast<int>(code % static_cast<std::size_t>(d2));
      code /= static_cast<std::size_t>(d2);
    }
    return labels;
  };

  std::vector<LocalOp> ops;
  std::vector<int> alpha;
  const int anchors = spec.boundary == Boundary::periodic ? spec.n : spec.n - spec.k + 1;
  for (int x = 0; x < anchors; ++x) {
    const bool carries_left_edge = spec.boundary == Boundary::open && x == 0;
    int a = 0;
    for (std::size_t code = 1; code < tuples; ++code) {
      std::vector<int> labels = tuple_labels(code);
      if (labels.back() == 0 && !carries_left_edge) continue;
      ops.push_back({x, std::move(labels)});
      alpha.push_back(a++);
    }
  }
  return LocalBasis(spec, std::move(algebra), std::move(ops), std::move(alpha));
}

inline std::shared_ptr<const LocalBasis> make_basis(const LatticeSpec& spec) {
  return std::make_shared<const LocalBasis>(build_local_basis(spec));
}

/// Sub-basis of the operators whose support lies inside `region`, in parent order.
inline LocalBasis restrict_to_region(const LocalBasis& full, const std::vector<int>& region) {
  validate_region(full.spec(), region);
  std::vector<LocalOp> ops;
  std::vector<int> alpha;
  std::vector<std::size_t> parent;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (!full.supported_in(i, region)) continue;
    ops.push_back(full.op(i));
    alpha.push_back(full.alpha(i));
    parent.push_back(i);
  }
  if (ops.empty()) throw std::invalid_argument("no basis operator fits inside the region");
  return LocalBasis(full.spec(), full.algebra(), std::move(ops), std::move(alpha), std::move(parent));
}

/// Sub-basis of the operators whose whole anchor window lies inside `region`.
inline LocalBasis restrict_to_windows(const LocalBasis& full, const std::vector<int>& region) {
  validate_region(full.spec(), region);
  std::vector<LocalOp> ops;
  std::vector<int> alpha;
  std::vector<std::size_t> parent;
  for (std::size_t i = 0; i < full.size(); ++i) {
    bool inside = true;
    for (int s : full.window(i)) inside = inside && std::find(region.begin(), region.end(), s) != region.end();
    if (!inside) continue;
    ops.push_back(full.op(i));
    alpha.push_back(full.alpha(i));
    parent.push_back(i);
  }
  if (ops.empty()) throw std::invalid_argument("no operator window fits inside the region");
  return LocalBasis(full.spec(), full.algebra(), std::move(ops), std::move(alpha), std::move(parent));
}

}  // namespace hamrec
