#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rfmp/dictionary.hpp"
#include "rfmp/forward_operator.hpp"
#include "rfmp/hilbert.hpp"

namespace rfmp {

enum class TieBreak { LowestIndex, HighestIndex };

/// Run parameters for the regularized functional matching pursuit.
///
/// Stopping rules are combined by OR and evaluated on the candidate step
/// before it is applied: |alpha| < stop_alpha_tol, or the energy decrease
/// (the candidate's score) < stop_energy_tol. A zero tolerance disables its
/// rule. The default energy tolerance is the smallest normal double, which
/// only halts once no atom decreases the energy at all.
struct RfmpConfig {
  double lambda = 0.0;
  Index repetition_cap = 1000;
  std::optional<Element> initial;  // F_0; zero when absent
  Index max_iterations = 10000;
  double stop_alpha_tol = 0.0;
  double stop_energy_tol = std::numeric_limits<double>::min();
  TieBreak tie_break = TieBreak::LowestIndex;
  double c1_floor = kDefaultC1Floor;

  void validate() const;
};

struct IterationRecord {
  Index n = 0;         // iteration number after the step
  Index atom = 0;      // chosen dictionary index
  double alpha = 0.0;
  double energy = 0.0;  // tracked: previous energy minus the selected score
  double residual_norm = 0.0;
  double score = 0.0;  // selection score of the chosen atom
  double wall_seconds = 0.0;
};

/// Iteration state F_n, R^n and the caches the selection rule reads.
class RfmpState {
 public:
  /// R^0 = y - F F_0 and <F_0, d_i>_H for every atom.
  RfmpState(const ForwardOperator& op, const DataVector& y, const Dictionary& dict,
            const RfmpConfig& config);

  const Element& approx() const { return approx_; }
  const DataVector& residual() const { return residual_; }
  Index iteration() const { return iteration_; }
  double lambda() const { return lambda_; }
  double energy() const { return energy_; }
  // ||R^n||^2 + lambda ||F_n||_H^2 evaluated from the current iterate.
  double direct_energy(const HilbertSpace& space) const;
  const std::vector<IterationRecord>& history() const { return history_; }
  const std::vector<Index>& usage_counts() const { return usage_counts_; }
  const Eigen::VectorXd& fn_dot_atoms() const { return fn_dot_atoms_; }
  Index max_usage() const;

  /// <R^n, F d_i> - lambda <F_n, d_i>_H for every atom.
  Eigen::VectorXd numerators(const Dictionary& dict) const;

 private:
  friend void apply_step(RfmpState&, const Dictionary&, Index, double,
                         double);

  Element approx_;
  DataVector residual_;
  Index iteration_ = 0;
  double lambda_ = 0.0;
  double energy_ = 0.0;
  std::vector<IterationRecord> history_;
  std::vector<Index> usage_counts_;
  Eigen::VectorXd fn_dot_atoms_;
  std::chrono::steady_clock::time_point started_;
};

/// Selection quotient (<R^n, F d_i> - lambda <F_n, d_i>)^2 / (||F d_i||^2 + lambda ||d_i||^2).
/// Throws HypothesisError when the denominator vanishes.
double selection_score(const RfmpState& state, const Dictionary& dict, double lambda,
                       Index atom);

/// Step size for `atom`; its square times the denominator equals the score.
double step_coefficient(const RfmpState& state, const Dictionary& dict, double lambda,
                        Index atom);

struct Selection {
  Index atom = 0;
  double score = 0.0;
  double alpha = 0.0;
};

/// Maximizer of the selection score over atoms used fewer than
/// repetition_cap times; std::nullopt when every atom is at the cap.
std::optional<Selection> select_atom(const RfmpState& state, const Dictionary& dict,
                                     const RfmpConfig& config);

/// F_{n+1} = F_n + alpha d, R^{n+1} = R^n - alpha F d, with incremental cache
/// updates and a history record.
void apply_step(RfmpState& state, const Dictionary& dict,
                Index atom, double alpha, double score);

/// One greedy step. Throws CapExhaustedError when no atom is eligible.
void iterate(RfmpState& state, const Dictionary& dict,
             const RfmpConfig& config);

class CapExhaustedError : public std::runtime_error {
 public:
  CapExhaustedError() : std::runtime_error("repetition cap exhausted") {}
};

enum class Termination {
  MaxIterations,
  AlphaBelowTolerance,
  EnergyDecreaseBelowTolerance,
  RepetitionCapExhausted,
};

std::string_view to_string(Termination reason);

struct RfmpResult {
  RfmpState state;
  Termination termination;
};

/// Runs the iteration to termination. Throws HypothesisError when C1 does not
/// exceed config.c1_floor, NumericalError on non-finite values.
RfmpResult solve(const ForwardOperator& op, const DataVector& y, const Dictionary& dict,
                 const RfmpConfig& config);

}  // namespace rfmp
