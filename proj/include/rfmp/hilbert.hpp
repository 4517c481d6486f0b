#pragma once

#include <string_view>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace rfmp {

using Index = Eigen::Index;

/// Coordinates of a member of H in the chosen basis.
using Element = Eigen::VectorXd;

/// A vector in the data space R^l.
using DataVector = Eigen::VectorXd;

/// N-dimensional truncation of the solution space H.
///
/// The inner product is <u, v>_H = u^T G v for a symmetric positive-definite
/// metric G. Instances are immutable after construction.
class HilbertSpace {
 public:
  /// Euclidean space of dimension `dim` (G = I).
  explicit HilbertSpace(Index dim);

  /// Space with the given metric. Throws ContractError when the metric is not
  /// square, not symmetric to 1e-12 relative, or not positive definite.
  explicit HilbertSpace(Eigen::MatrixXd metric);

  Index dim() const { return metric_.rows(); }
  const Eigen::MatrixXd& metric() const { return metric_; }

  /// Lower Cholesky factor L with G = L L^T.
  const Eigen::MatrixXd& cholesky_factor() const { return factor_; }

  double inner_product(const Element& u, const Element& v) const;
  double norm(const Element& u) const;
  double squared_norm(const Element& u) const;

  /// Representer of a coordinate functional: solves G v = b.
  Element riesz(const Eigen::VectorXd& b) const;

  /// Column-wise riesz(): solves G X = B.
  Eigen::MatrixXd riesz_matrix(const Eigen::MatrixXd& b) const;

  /// Throws ContractError unless `u` has length dim() and finite entries.
  void check_element(const Element& u, std::string_view what) const;

  Element zero() const { return Element::Zero(dim()); }

 private:
  Eigen::MatrixXd metric_;
  Eigen::MatrixXd factor_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace rfmp
