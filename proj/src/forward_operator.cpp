#include "rfmp/forward_operator.hpp"

#include <string>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "rfmp/errors.hpp"

namespace rfmp {

ForwardOperator::ForwardOperator(HilbertSpace space, Eigen::MatrixXd matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1) throw ContractError("operator must have at least one row");
  if (matrix_.cols() != space_.dim()) {
    throw ContractError("operator has " + std::to_string(matrix_.cols()) +
                        " columns, space dimension " + std::to_string(space_.dim()));
  }
  if (!matrix_.allFinite()) throw ContractError("operator has non-finite entries");
}

DataVector ForwardOperator::apply(const Element& u) const {
  space_.check_element(u, "operand");
  return matrix_ * u;
}

Element ForwardOperator::apply_adjoint(const DataVector& w) const {
  check_data(w, "data vector");
  return space_.riesz(matrix_.transpose() * w);
}

Eigen::MatrixXd ForwardOperator::normal_matrix() const {
  return space_.riesz_matrix(matrix_.transpose() * matrix_);
}

double ForwardOperator::operator_norm() const {
  const auto sys = singular_system();
  return sys.sigmas.size() > 0 ? sys.sigmas(0) : 0.0;
}

SingularSystem ForwardOperator::singular_system(double rank_tolerance) const {
  if (!(rank_tolerance > 0.0)) throw ContractError("rank tolerance must be positive");
  const auto& l = space_.cholesky_factor();
  // B = A L^{-T}; the SVD of B is the Euclidean image of the H-metric problem.
  const Eigen::MatrixXd bt =
      l.triangularView<Eigen::Lower>().solve(matrix_.transpose());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bt.transpose(),
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("singular value decomposition failed; metric may be degenerate");
  }

  SingularSystem sys;
  sys.sigmas = svd.singularValues();
  sys.left = svd.matrixU();
  sys.right = l.transpose().triangularView<Eigen::Upper>().solve(svd.matrixV());
  if (!sys.sigmas.allFinite() || !sys.right.allFinite()) {
    throw NumericalError("singular system has non-finite entries");
  }
  const double sigma_max = sys.sigmas.size() > 0 ? sys.sigmas(0) : 0.0;
  for (Index j = 0; j < sys.sigmas.size(); ++j) {
    if (sys.sigmas(j) > rank_tolerance * sigma_max) ++sys.rank;
  }
  return sys;
}

DataVector ForwardOperator::range_projection(const DataVector& w,
                                             double rank_tolerance) const {
  check_data(w, "data vector");
  const auto sys = singular_system(rank_tolerance);
  const auto basis = sys.left.leftCols(sys.rank);
  return basis * (basis.transpose() * w);
}

void ForwardOperator::check_data(const DataVector& w, std::string_view what) const {
  if (w.size() != data_dim()) {
    throw ContractError(std::string(what) + " length " + std::to_string(w.size()) +
                        ", operator rows " + std::to_string(data_dim()));
  }
  if (!w.allFinite()) throw ContractError(std::string(what) + " has non-finite entries");
}

namespace {

Eigen::MatrixXd selected_columns(const SingularSystem& sys, std::span<const Index> indices) {
  const Index n = sys.right.cols();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  Eigen::MatrixXd cols(sys.right.rows(), static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index j = indices[k];
    if (j < 0 || j >= n) {
      throw ContractError("singular index " + std::to_string(j) + " out of range [0, " +
                          std::to_string(n) + ")");
    }
    if (seen[static_cast<std::size_t>(j)]) {
      throw ContractError("singular index " + std::to_string(j) + " repeated");
    }
    seen[static_cast<std::size_t>(j)] = true;
    cols.col(static_cast<Index>(k)) = sys.right.col(j);
  }
  return cols;
}

}  // namespace

Eigen::MatrixXd subspace_projector(const HilbertSpace& space, const SingularSystem& sys,
                                   std::span<const Index> indices) {
  if (sys.right.rows() != space.dim()) {
    throw ContractError("singular system does not belong to this space");
  }
  const Eigen::MatrixXd x = selected_columns(sys, indices);
  // P u = sum_j <u, x_j>_H x_j = X X^T G u
  return x * (x.transpose() * space.metric());
}

Element subspace_projection(const HilbertSpace& space, const SingularSystem& sys,
                            std::span<const Index> indices, const Element& u) {
  space.check_element(u, "operand");
  if (sys.right.rows() != space.dim()) {
    throw ContractError("singular system does not belong to this space");
  }
  const Eigen::MatrixXd x = selected_columns(sys, indices);
  return x * (x.transpose() * (space.metric() * u));
}

DataSubspace::DataSubspace(const Eigen::MatrixXd& spanning_columns, double rank_tolerance) {
  if (spanning_columns.rows() < 1) throw ContractError("data subspace needs ambient dimension");
  if (!spanning_columns.allFinite()) throw ContractError("spanning set has non-finite entries");
  if (spanning_columns.cols() == 0) {
    basis_ = Eigen::MatrixXd::Zero(spanning_columns.rows(), 0);
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(spanning_columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Index r = 0;
  for (Index j = 0; j < s.size(); ++j) {
    if (s(j) > rank_tolerance * s(0)) ++r;
  }
  basis_ = svd.matrixU().leftCols(r);
}

DataVector DataSubspace::project(const DataVector& w) const {
  if (w.size() != ambient_dim()) {
    throw ContractError("data vector length " + std::to_string(w.size()) +
                        ", subspace ambient dimension " + std::to_string(ambient_dim()));
  }
  return basis_ * (basis_.transpose() * w);
}

}  // namespace rfmp
