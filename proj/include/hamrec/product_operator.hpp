#pragma once

#include "hamrec/lattice.hpp"
#include "hamrec/site_operators.hpp"

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace hamrec {

/// Tensor product of single-site operators acting on a register of
/// `num_sites` sites of dimension d (site p is digit p, least significant
/// first). Application is exact and matrix free: each basis state maps to at
/// most one basis state.
class ProductOperator {
public:
  struct Factor {
    int position;
    std::size_t stride;
    const SiteOperator* op;
  };

  ProductOperator(std::shared_ptr<const SiteAlgebra> algebra, const std::vector<std::pair<int, int>>& position_labels,
                  int num_sites)
      : algebra_(std::move(algebra)), num_sites_(num_sites) {
    const int d = algebra_->dim();
    dim_ = ipow(static_cast<std::size_t>(d), num_sites);
    for (const auto& [pos, label] : position_labels) {
      if (pos < 0 || pos >= num_sites) throw std::invalid_argument("ProductOperator: site outside register");
      if (label == 0) continue;
      factors_.push_back({pos, ipow(static_cast<std::size_t>(d), pos), &algebra_->op(label)});
    }
  }

  std::size_t dim() const { return dim_; }
  int num_sites() const { return num_sites_; }
  const std::vector<Factor>& factors() const { return factors_; }

  /// out += coeff * op * in.
  void apply_add(const cplx* in, cplx* out, cplx coeff = 1.0) const {
    const int d = algebra_->dim();
    if (d == 2) {
      for (std::size_t i = 0; i < dim_; ++i) {
        cplx a = coeff;
        std::size_t j = i;
        for (const auto& f : factors_) {
          const auto s = static_cast<int>((i >> f.position) & 1U);
          a *= f.op->amp[static_cast<std::size_t>(s)];
          j ^= static_cast<std::size_t>(s ^ f.op->target[static_cast<std::size_t>(s)]) << f.position;
        }
        if (a != cplx(0)) out[j] += a * in[i];
      }
      return;
    }
    const auto ud = static_cast<std::size_t>(d);
    for (std::size_t i = 0; i < dim_; ++i) {
      cplx a = coeff;
      std::size_t j = i;
      for (const auto& f : factors_) {
        const std::size_t s = (i / f.stride) % ud;
        a *= f.op->amp[s];
        j = j - s * f.stride + static_cast<std::size_t>(f.op->target[s]) * f.stride;
      }
      if (a != cplx(0)) out[j] += a * in[i];
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    check(static_cast<std::size_t>(v.size()));
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    apply_add(v.data(), out.data());
    return out;
  }

  /// op * m, column by column.
  Eigen::MatrixXcd apply_columns(const Eigen::MatrixXcd& m) const {
    check(static_cast<std::size_t>(m.rows()));
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) apply_add(m.col(c).data(), out.col(c).data());
    return out;
  }

  Eigen::MatrixXcd dense() const {
    return apply_columns(Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_)));
  }

private:
  void check(std::size_t n) const {
    if (n != dim_) {
      throw std::invalid_argument("operator/state dimension mismatch: expected " + std::to_string(dim_) + ", got " +
                                  std::to_string(n));
    }
  }

  std::shared_ptr<const SiteAlgebra> algebra_;
  int num_sites_ = 0;
  std::size_t dim_ = 1;
  std::vector<Factor> factors_;
};

/// Real linear combination of product operators on a common register.
class OperatorSum {
public:
  void add(double coeff, ProductOperator op) {
    if (!terms_.empty() && op.dim() != terms_.front().second.dim()) {
      throw std::invalid_argument("OperatorSum: mixed register dimensions");
    }
    terms_.emplace_back(coeff, std::move(op));
  }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const auto& terms() const { return terms_; }

  void apply_add(const cplx* in, cplx* out) const {
    for (const auto& [c, op] : terms_) {
      if (c != 0.0) op.apply_add(in, out, c);
    }
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    if (!terms_.empty() && static_cast<std::size_t>(v.size()) != terms_.front().second.dim()) {
      throw std::invalid_argument("OperatorSum: state dimension mismatch");
    }
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    apply_add(v.data(), out.data());
    return out;
  }

private:
  std::vector<std::pair<double, ProductOperator>> terms_;
};

inline Eigen::VectorXcd apply_operator(const ProductOperator& op, const Eigen::VectorXcd& state) {
  return op.apply(state);
}
inline Eigen::VectorXcd apply_operator(const OperatorSum& op, const Eigen::VectorXcd& state) {
  return op.apply(state);
}

/// Hilbert-Schmidt inner product (1/N) Re Tr(a^dagger b).
inline double hs_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw std::invalid_argument("hs_inner: dimension mismatch");
  }
  if (a.rows() == 0) return 0.0;
  return (a.conjugate().cwiseProduct(b)).sum().real() / static_cast<double>(a.rows());
}

}  // namespace hamrec
