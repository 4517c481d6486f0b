#include "rfmp/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "rfmp/errors.hpp"

namespace rfmp {

Dictionary Dictionary::build(const ForwardOperator& op, Eigen::MatrixXd atoms) {
  const auto& space = op.space();
  if (atoms.cols() == 0) throw ContractError("dictionary must contain at least one atom");
  if (atoms.rows() != space.dim()) {
    throw ContractError("atoms have length " + std::to_string(atoms.rows()) +
                        ", space dimension " + std::to_string(space.dim()));
  }
  if (!atoms.allFinite()) throw ContractError("dictionary has non-finite entries");

  Dictionary d;
  d.atoms_ = std::move(atoms);
  const Index k = d.atoms_.cols();
  for (Index i = 0; i < k; ++i) {
    if (d.atoms_.col(i).isZero(0.0)) {
      throw ContractError("atom " + std::to_string(i) + " is zero");
    }
  }
  d.images_ = op.matrix() * d.atoms_;
  d.gram_ = d.atoms_.transpose() * (space.metric() * d.atoms_);
  // Symmetrize so gram(i, j) == gram(j, i) bit for bit.
  d.gram_ = (0.5 * (d.gram_ + d.gram_.transpose())).eval();
  d.image_norms_sq_ = d.images_.colwise().squaredNorm().transpose();
  d.atom_norms_sq_ = d.gram_.diagonal();

  for (Index i = 0; i < k; ++i) {
    for (Index j = i + 1; j < k; ++j) {
      if (d.atoms_.col(i) == d.atoms_.col(j)) d.duplicates_.emplace_back(i, j);
    }
  }
  return d;
}

Dictionary Dictionary::build(const ForwardOperator& op, std::span<const Element> atoms) {
  Eigen::MatrixXd m(op.dim(), static_cast<Index>(atoms.size()));
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != op.dim()) {
      throw ContractError("atom " + std::to_string(i) + " has length " +
                          std::to_string(atoms[i].size()) + ", space dimension " +
                          std::to_string(op.dim()));
    }
    m.col(static_cast<Index>(i)) = atoms[i];
  }
  return build(op, std::move(m));
}

namespace {

Eigen::VectorXd normalized_gram_eigenvalues(const Dictionary& dict) {
  const Eigen::VectorXd inv = dict.atom_norms_sq().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd g = inv.asDiagonal() * dict.gram() * inv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("Gram eigenvalue computation failed");
  return eig.eigenvalues();
}

double gram_rank_cutoff(const Eigen::VectorXd& eigenvalues) {
  const double top = eigenvalues(eigenvalues.size() - 1);
  return 1e-12 * std::max(top, 1.0) * static_cast<double>(eigenvalues.size());
}

}  // namespace

Index Dictionary::span_dimension() const {
  const auto ev = normalized_gram_eigenvalues(*this);
  const double cutoff = gram_rank_cutoff(ev);
  return static_cast<Index>((ev.array() > cutoff).count());
}

std::pair<double, Index> c1_value(const Dictionary& dict, double lambda) {
  if (!(lambda >= 0.0)) throw ContractError("lambda must be nonnegative");
  const Eigen::VectorXd denom = dict.image_norms_sq() + lambda * dict.atom_norms_sq();
  Index arg = 0;
  const double c1 = denom.minCoeff(&arg);
  return {c1, arg};
}

DictionaryDiagnostics diagnostics(const Dictionary& dict, double lambda) {
  DictionaryDiagnostics out;
  out.lambda_used = lambda;
  std::tie(out.c1, out.c1_atom) = c1_value(dict, lambda);
  out.c2 = std::sqrt(dict.atom_norms_sq().maxCoeff());

  const auto ev = normalized_gram_eigenvalues(dict);
  double lo = ev(0);
  const double hi = ev(ev.size() - 1);
  if (lo <= gram_rank_cutoff(ev)) lo = 0.0;
  out.gram_min_eig = lo;
  out.gram_max_eig = hi;
  out.semi_frame_c = std::min(lo, 1.0 / hi);
  return out;
}

GateResult check_c1_positive(const DictionaryDiagnostics& diag, double c1_floor) {
  if (diag.c1 > c1_floor) return {true, "condition C1 > 0 holds"};
  std::ostringstream msg;
  msg << "condition C1 > 0 violated by atom " << diag.c1_atom << " (c1 = " << diag.c1
      << ", lambda = " << diag.lambda_used << ")";
  return {false, msg.str()};
}

}  // namespace rfmp
