#include "rfmp/hilbert.hpp"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "rfmp/errors.hpp"

namespace rfmp {

HilbertSpace::HilbertSpace(Index dim) {
  if (dim < 1) throw ContractError("space dimension must be at least 1");
  metric_ = Eigen::MatrixXd::Identity(dim, dim);
  factor_ = metric_;
  llt_.compute(metric_);
}

HilbertSpace::HilbertSpace(Eigen::MatrixXd metric) : metric_(std::move(metric)) {
  if (metric_.rows() < 1 || metric_.rows() != metric_.cols()) {
    throw ContractError("metric must be a nonempty square matrix");
  }
  if (!metric_.allFinite()) throw ContractError("metric has non-finite entries");
  const double scale = metric_.cwiseAbs().maxCoeff();
  const double asym = (metric_ - metric_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) throw ContractError("metric not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(metric_, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 0.0)) {
    throw ContractError("metric not positive definite");
  }
  llt_.compute(metric_);
  if (llt_.info() != Eigen::Success) throw ContractError("metric not positive definite");
  factor_ = llt_.matrixL();
}

double HilbertSpace::inner_product(const Element& u, const Element& v) const {
  check_element(u, "left operand");
  check_element(v, "right operand");
  return u.dot(metric_ * v);
}

double HilbertSpace::squared_norm(const Element& u) const {
  check_element(u, "operand");
  // ||L^T u||^2 is nonnegative by construction, unlike u^T G u under rounding.
  return (factor_.transpose() * u).squaredNorm();
}

double HilbertSpace::norm(const Element& u) const { return std::sqrt(squared_norm(u)); }

Element HilbertSpace::riesz(const Eigen::VectorXd& b) const {
  if (b.size() != dim()) {
    throw ContractError("functional has length " + std::to_string(b.size()) +
                        ", space dimension " + std::to_string(dim()));
  }
  return llt_.solve(b);
}

Eigen::MatrixXd HilbertSpace::riesz_matrix(const Eigen::MatrixXd& b) const {
  if (b.rows() != dim()) {
    throw ContractError("functional block has " + std::to_string(b.rows()) +
                        " rows, space dimension " + std::to_string(dim()));
  }
  return llt_.solve(b);
}

void HilbertSpace::check_element(const Element& u, std::string_view what) const {
  if (u.size() != dim()) {
    throw ContractError(std::string(what) + " has length " + std::to_string(u.size()) +
                        ", space dimension " + std::to_string(dim()));
  }
  if (!u.allFinite()) throw ContractError(std::string(what) + " has non-finite entries");
}

}  // namespace rfmp
