#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "rfmp/forward_operator.hpp"
#include "rfmp/hilbert.hpp"

namespace rfmp::oracle {

// Direct (non-iterative) solvers for the limits of the greedy iteration.
// Each returns the limit element together with how well it satisfies its
// defining equation, so the ground truth checks itself.

enum class Method { Tikhonov, RangeProjection, SubspaceProjection, Subspace };

std::string_view to_string(Method m);

struct OracleSolution {
  Element element;
  Method method = Method::Tikhonov;
  /// Relative residual of the characterizing equation.
  double residual_of_characterization = 0.0;
  /// ||y - F x||^2 + lambda ||x||_H^2 at `element` (lambda = 0 for projections).
  double functional_value = 0.0;
};

/// ||y - F x||^2 + lambda ||x||_H^2.
double tikhonov_functional(const ForwardOperator& op, const DataVector& y, double lambda,
                           const Element& x);

/// ||(F*F + lambda I) x - F* y||_H, absolute.
double normal_equation_residual(const ForwardOperator& op, const DataVector& y, double lambda,
                                const Element& x);

/// Unique solution of (F*F + lambda I) x = F* y, lambda > 0, via a dense
/// Cholesky solve of (A^T A + lambda G) x = A^T y.
OracleSolution tikhonov_solve(const ForwardOperator& op, const DataVector& y, double lambda);

/// The same solution through the singular system:
/// x = sum_j sigma_j / (sigma_j^2 + lambda) <y, y_j> x_j.
Element tikhonov_filter_solve(const ForwardOperator& op, const SingularSystem& sys,
                              const DataVector& y, double lambda);

struct MinimizerReport {
  double value = 0.0;
  double min_perturbed_value = 0.0;
  int perturbations = 0;
  bool is_minimal = false;
};

/// Compares the Tikhonov functional at `candidate` against random
/// perturbations candidate + delta, with ||delta||_H spread over
/// [1e-4, 1] * (1 + ||candidate||_H).
MinimizerReport minimizer_check(const ForwardOperator& op, const DataVector& y, double lambda,
                                const Element& candidate, int perturbations = 100,
                                std::uint64_t seed = 0x5eed);

/// Minimum-norm x with F x = P_{rang F} y. The result lies in (ker F)^perp.
OracleSolution range_solution(const ForwardOperator& op, const DataVector& y,
                              double rank_tolerance = kDefaultRankTolerance);

/// Minimum-norm x with F x = P_G y for a closed subspace G of rang F.
/// Throws ContractError when G is not contained in rang F.
OracleSolution projection_solution(const ForwardOperator& op, const DataVector& y,
                                   const DataSubspace& target,
                                   double rank_tolerance = kDefaultRankTolerance);

/// P_V of the Tikhonov solution, V = span{x_j : j in indices}. The residual
/// reported is that of the restricted normal equation
/// (P_V F*F P_V + lambda I) x = P_V F* y, relative to ||F* y||_H.
OracleSolution subspace_tikhonov(const ForwardOperator& op, const DataVector& y, double lambda,
                                 std::span<const Index> indices);

/// Residual of the restricted normal equation for an arbitrary x in V.
double restricted_normal_equation_residual(const ForwardOperator& op, const DataVector& y,
                                           double lambda, const Eigen::MatrixXd& projector,
                                           const Element& x);

}  // namespace rfmp::oracle
