#include "rfmp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>

#include "rfmp/errors.hpp"

namespace rfmp::oracle {

namespace {

void require_positive_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ContractError("lambda must be positive for a unique Tikhonov solution");
  }
}

double relative(double absolute, double scale) {
  return scale > 0.0 ? absolute / scale : absolute;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Tikhonov:
      return "tikhonov";
    case Method::RangeProjection:
      return "range-projection";
    case Method::SubspaceProjection:
      return "subspace-projection";
    case Method::Subspace:
      return "subspace";
  }
  return "unknown";
}

double tikhonov_functional(const ForwardOperator& op, const DataVector& y, double lambda,
                           const Element& x) {
  op.check_data(y, "data");
  const double misfit = (y - op.apply(x)).squaredNorm();
  return lambda == 0.0 ? misfit : misfit + lambda * op.space().squared_norm(x);
}

double normal_equation_residual(const ForwardOperator& op, const DataVector& y, double lambda,
                                const Element& x) {
  const DataVector r = y - op.apply(x);
  const Element g = op.apply_adjoint(r) - lambda * x;
  return op.space().norm(g);
}

OracleSolution tikhonov_solve(const ForwardOperator& op, const DataVector& y, double lambda) {
  require_positive_lambda(lambda);
  op.check_data(y, "data");
  const auto& a = op.matrix();
  const Eigen::MatrixXd system = a.transpose() * a + lambda * op.space().metric();
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("Tikhonov system factorization failed");

  OracleSolution out;
  out.method = Method::Tikhonov;
  out.element = llt.solve(a.transpose() * y);
  const double scale = op.space().norm(op.apply_adjoint(y));
  out.residual_of_characterization =
      relative(normal_equation_residual(op, y, lambda, out.element), scale);
  out.functional_value = tikhonov_functional(op, y, lambda, out.element);
  return out;
}

Element tikhonov_filter_solve(const ForwardOperator& op, const SingularSystem& sys,
                              const DataVector& y, double lambda) {
  require_positive_lambda(lambda);
  op.check_data(y, "data");
  Element x = op.space().zero();
  for (Index j = 0; j < sys.sigmas.size(); ++j) {
    const double s = sys.sigmas(j);
    x += (s / (s * s + lambda) * sys.left.col(j).dot(y)) * sys.right.col(j);
  }
  return x;
}

MinimizerReport minimizer_check(const ForwardOperator& op, const DataVector& y, double lambda,
                                const Element& candidate, int perturbations,
                                std::uint64_t seed) {
  if (!(lambda >= 0.0)) throw ContractError("lambda must be nonnegative");
  const auto& space = op.space();
  MinimizerReport rep;
  rep.value = tikhonov_functional(op, y, lambda, candidate);
  rep.min_perturbed_value = std::numeric_limits<double>::infinity();
  rep.perturbations = perturbations;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> exponent(-4.0, 0.0);
  const double base = 1.0 + space.norm(candidate);
  for (int k = 0; k < perturbations; ++k) {
    Element delta(space.dim());
    for (Index i = 0; i < delta.size(); ++i) delta(i) = normal(rng);
    const double nd = space.norm(delta);
    if (nd == 0.0) continue;
    delta *= base * std::pow(10.0, exponent(rng)) / nd;
    rep.min_perturbed_value =
        std::min(rep.min_perturbed_value, tikhonov_functional(op, y, lambda, candidate + delta));
  }
  const double slack = 1e-12 * (1.0 + std::abs(rep.value));
  rep.is_minimal = rep.value <= rep.min_perturbed_value + slack;
  return rep;
}

namespace {

Element pseudo_inverse_apply(const ForwardOperator& op, const SingularSystem& sys,
                             const DataVector& w) {
  Element x = op.space().zero();
  for (Index j = 0; j < sys.rank; ++j) {
    x += (sys.left.col(j).dot(w) / sys.sigmas(j)) * sys.right.col(j);
  }
  return x;
}

}  // namespace

OracleSolution range_solution(const ForwardOperator& op, const DataVector& y,
                              double rank_tolerance) {
  op.check_data(y, "data");
  const auto sys = op.singular_system(rank_tolerance);
  OracleSolution out;
  out.method = Method::RangeProjection;
  out.element = pseudo_inverse_apply(op, sys, y);
  const auto basis = sys.left.leftCols(sys.rank);
  const DataVector projected = basis * (basis.transpose() * y);
  out.residual_of_characterization =
      relative((op.apply(out.element) - projected).norm(), y.norm());
  out.functional_value = tikhonov_functional(op, y, 0.0, out.element);
  return out;
}

OracleSolution projection_solution(const ForwardOperator& op, const DataVector& y,
                                   const DataSubspace& target, double rank_tolerance) {
  op.check_data(y, "data");
  if (target.ambient_dim() != op.data_dim()) {
    throw ContractError("target subspace lives in a different data space");
  }
  const auto sys = op.singular_system(rank_tolerance);
  const auto range = sys.left.leftCols(sys.rank);
  const Eigen::MatrixXd outside =
      target.basis() - range * (range.transpose() * target.basis());
  if (target.dimension() > 0 && outside.cwiseAbs().maxCoeff() > 1e-8) {
    throw ContractError("target subspace is not contained in the range of the operator");
  }
  const DataVector projected = target.project(y);
  OracleSolution out;
  out.method = Method::SubspaceProjection;
  out.element = pseudo_inverse_apply(op, sys, projected);
  out.residual_of_characterization =
      relative((op.apply(out.element) - projected).norm(), y.norm());
  out.functional_value = tikhonov_functional(op, y, 0.0, out.element);
  return out;
}

double restricted_normal_equation_residual(const ForwardOperator& op, const DataVector& y,
                                           double lambda, const Eigen::MatrixXd& projector,
                                           const Element& x) {
  const Element px = projector * x;
  const Element lhs = projector * op.apply_adjoint(op.apply(px)) + lambda * x;
  const Element rhs = projector * op.apply_adjoint(y);
  return op.space().norm(lhs - rhs);
}

OracleSolution subspace_tikhonov(const ForwardOperator& op, const DataVector& y, double lambda,
                                 std::span<const Index> indices) {
  require_positive_lambda(lambda);
  const auto sys = op.singular_system();
  const Eigen::MatrixXd proj = subspace_projector(op.space(), sys, indices);
  const auto full = tikhonov_solve(op, y, lambda);

  OracleSolution out;
  out.method = Method::Subspace;
  out.element = proj * full.element;
  const double scale = op.space().norm(op.apply_adjoint(y));
  out.residual_of_characterization =
      relative(restricted_normal_equation_residual(op, y, lambda, proj, out.element), scale);
  out.functional_value = tikhonov_functional(op, y, lambda, out.element);
  return out;
}

}  // namespace rfmp::oracle
