#pragma once

#include <span>

#include <Eigen/Core>

#include "rfmp/hilbert.hpp"

namespace rfmp {

/// Relative numerical-rank cutoff applied to sigma_max.
inline constexpr double kDefaultRankTolerance = 1e-12;

/// Metric-aware singular value decomposition of F: H -> R^l.
///
/// Columns of `right` are H-orthonormal, columns of `left` Euclidean
/// orthonormal. The first `sigmas.size()` = min(l, N) columns of each are
/// paired (F x_j = sigma_j y_j, F* y_j = sigma_j x_j); the remaining right
/// columns complete a basis of ker F.
struct SingularSystem {
  Eigen::VectorXd sigmas;  // nonincreasing
  Eigen::MatrixXd right;   // N x N
  Eigen::MatrixXd left;    // l x l
  Index rank = 0;

  Element right_vector(Index j) const { return right.col(j); }
  DataVector left_vector(Index j) const { return left.col(j); }
};

/// Linear map F: H -> R^l acting on coordinates as u -> A u.
class ForwardOperator {
 public:
  ForwardOperator(HilbertSpace space, Eigen::MatrixXd matrix);

  const HilbertSpace& space() const { return space_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Index data_dim() const { return matrix_.rows(); }
  Index dim() const { return matrix_.cols(); }

  DataVector apply(const Element& u) const;

  /// F* w = G^{-1} A^T w, the H-adjoint.
  Element apply_adjoint(const DataVector& w) const;

  /// Coordinate matrix of F*F, i.e. G^{-1} A^T A.
  Eigen::MatrixXd normal_matrix() const;

  double operator_norm() const;

  SingularSystem singular_system(double rank_tolerance = kDefaultRankTolerance) const;

  /// Orthogonal projection of w onto rang F.
  DataVector range_projection(const DataVector& w,
                              double rank_tolerance = kDefaultRankTolerance) const;

  void check_data(const DataVector& w, std::string_view what) const;

 private:
  HilbertSpace space_;
  Eigen::MatrixXd matrix_;
};

/// H-orthogonal projection of u onto span{x_j : j in indices}.
/// Indices are 0-based columns of `sys.right`; duplicates are rejected.
Element subspace_projection(const HilbertSpace& space, const SingularSystem& sys,
                            std::span<const Index> indices, const Element& u);

/// Coordinate matrix of the projector onto span{x_j : j in indices}.
Eigen::MatrixXd subspace_projector(const HilbertSpace& space, const SingularSystem& sys,
                                   std::span<const Index> indices);

/// A closed subspace of the data space given by a spanning set.
///
/// The spanning columns are orthonormalized on construction; the stored basis
/// is Euclidean-orthonormal.
class DataSubspace {
 public:
  explicit DataSubspace(const Eigen::MatrixXd& spanning_columns,
                        double rank_tolerance = kDefaultRankTolerance);

  const Eigen::MatrixXd& basis() const { return basis_; }
  Index dimension() const { return basis_.cols(); }
  Index ambient_dim() const { return basis_.rows(); }

  DataVector project(const DataVector& w) const;

 private:
  Eigen::MatrixXd basis_;
};

}  // namespace rfmp
