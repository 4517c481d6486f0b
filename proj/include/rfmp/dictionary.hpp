#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rfmp/forward_operator.hpp"
#include "rfmp/hilbert.hpp"

namespace rfmp {

/// Finite set of nonzero trial elements with the per-atom quantities the
/// greedy selection needs precomputed: images F d_i, squared norms in both
/// spaces and the H-Gram matrix.
class Dictionary {
 public:
  /// Atoms are the columns of `atoms` (N x K). Throws ContractError on a
  /// dimension mismatch, an empty set, or a zero atom.
  static Dictionary build(const ForwardOperator& op, Eigen::MatrixXd atoms);
  static Dictionary build(const ForwardOperator& op, std::span<const Element> atoms);

  Index size() const { return atoms_.cols(); }
  Index dim() const { return atoms_.rows(); }
  Index data_dim() const { return images_.rows(); }

  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::MatrixXd& images() const { return images_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& image_norms_sq() const { return image_norms_sq_; }
  const Eigen::VectorXd& atom_norms_sq() const { return atom_norms_sq_; }

  Element atom(Index i) const { return atoms_.col(i); }
  DataVector image(Index i) const { return images_.col(i); }

  /// Index pairs (i < j) of atoms that coincide exactly.
  const std::vector<std::pair<Index, Index>>& duplicates() const { return duplicates_; }

  /// Largest number of linearly independent atoms (numerical rank of the Gram).
  Index span_dimension() const;

 private:
  Dictionary() = default;

  Eigen::MatrixXd atoms_;
  Eigen::MatrixXd images_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd image_norms_sq_;
  Eigen::VectorXd atom_norms_sq_;
  std::vector<std::pair<Index, Index>> duplicates_;
};

struct DictionaryDiagnostics {
  double c1 = 0.0;          // min_i ||F d_i||^2 + lambda ||d_i||^2
  Index c1_atom = 0;        // the minimizing atom
  double c2 = 0.0;          // max_i ||d_i||_H
  double semi_frame_c = 0.0;
  double gram_min_eig = 0.0;  // extreme eigenvalues of the normalized Gram
  double gram_max_eig = 0.0;
  double lambda_used = 0.0;
};

/// C1, C2 and the semi-frame estimate for the given regularization.
///
/// semi_frame_c is min(mu_min, 1 / mu_max) for the extreme eigenvalues of the
/// unit-diagonal Gram S Gram S, S = diag(1 / ||d_i||_H). It is a valid
/// constant c in c ||sum b_i d_i||^2 <= (max_i ||d_i||^2) sum b_i^2 for
/// single-use expansions, and 0 when the atoms are linearly dependent.
DictionaryDiagnostics diagnostics(const Dictionary& dict, double lambda);

/// C1 alone, without the Gram eigenproblem: (value, minimizing atom).
std::pair<double, Index> c1_value(const Dictionary& dict, double lambda);

inline constexpr double kDefaultC1Floor = 1e-14;

struct GateResult {
  bool passed = false;
  std::string message;
};

GateResult check_c1_positive(const DictionaryDiagnostics& diag,
                             double c1_floor = kDefaultC1Floor);

}  // namespace rfmp
