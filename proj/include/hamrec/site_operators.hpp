#pragma once

#include "hamrec/linalg.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace hamrec {

/// A single-site operator with at most one nonzero per column:
/// op |s> = amp[s] |target[s]>. Every generalized Gell-Mann matrix has this form.
struct SiteOperator {
  std::vector<int> target;
  std::vector<cplx> amp;

  Eigen::MatrixXcd dense() const {
    const auto d = static_cast<Eigen::Index>(target.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index s = 0; s < d; ++s) {
      if (amp[s] != cplx(0)) m(target[s], s) += amp[s];
    }
    return m;
  }
};

/// Orthonormal Hermitian operator basis of one site: label 0 is the identity,
/// labels 1..d^2-1 are generalized Gell-Mann matrices scaled so that
/// (1/d) Tr(g_a g_b) = delta_ab. For d = 2 the labels are I, X, Y, Z.
///
/// Label order: for each pair j < k, symmetric then antisymmetric; then the
/// diagonal matrices l = 1..d-1.
class SiteAlgebra {
public:
  explicit SiteAlgebra(int d) : d_(d) {
    if (d < 2) throw std::invalid_argument("site dimension must be >= 2");
    const double scale = std::sqrt(d / 2.0);
    ops_.push_back(blank());
    for (int s = 0; s < d; ++s) ops_[0].amp[s] = 1.0;
    names_.push_back("I");
    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        SiteOperator sym = blank();
        sym.target[k] = j;
        sym.amp[k] = scale;
        sym.target[j] = k;
        sym.amp[j] = scale;
        ops_.push_back(sym);
        SiteOperator anti = blank();
        anti.target[k] = j;
        anti.amp[k] = cplx(0, -scale);
        anti.target[j] = k;
        anti.amp[j] = cplx(0, scale);
        ops_.push_back(anti);
        if (d == 2) {
          names_.push_back("X");
          names_.push_back("Y");
        } else {
          names_.push_back("S" + std::to_string(j) + std::to_string(k));
          names_.push_back("A" + std::to_string(j) + std::to_string(k));
        }
      }
    }
    for (int l = 1; l < d; ++l) {
      SiteOperator diag = blank();
      const double c = scale * std::sqrt(2.0 / (l * (l + 1.0)));
      for (int m = 0; m < l; ++m) diag.amp[m] = c;
      diag.amp[l] = -l * c;
      ops_.push_back(diag);
      names_.push_back(d == 2 ? "Z" : "D" + std::to_string(l));
    }
  }

  int dim() const { return d_; }
  int num_labels() const { return d_ * d_; }
  const SiteOperator& op(int label) const { return ops_.at(static_cast<std::size_t>(label)); }
  const std::string& name(int label) const { return names_.at(static_cast<std::size_t>(label)); }

  static std::shared_ptr<const SiteAlgebra> make(int d) { return std::make_shared<const SiteAlgebra>(d); }

private:
  SiteOperator blank() const {
    SiteOperator o;
    o.target.resize(static_cast<std::size_t>(d_));
    o.amp.assign(static_cast<std::size_t>(d_), cplx(0));
    for (int s = 0; s < d_; ++s) o.target[static_cast<std::size_t>(s)] = s;
    return o;
  }

  int d_;
  std::vector<SiteOperator> ops_;
  std::vector<std::string> names_;
};

}  // namespace hamrec
