#include "rfmp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "rfmp/errors.hpp"

namespace rfmp {

void RfmpConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ContractError("lambda must be finite and nonnegative");
  }
  if (repetition_cap < 1) throw ContractError("repetition cap must be at least 1");
  if (max_iterations < 0) throw ContractError("max_iterations must be nonnegative");
  if (!(stop_alpha_tol >= 0.0) || !(stop_energy_tol >= 0.0)) {
    throw ContractError("stopping tolerances must be nonnegative");
  }
}

RfmpState::RfmpState(const ForwardOperator& op, const DataVector& y, const Dictionary& dict,
                     const RfmpConfig& config)
    : lambda_(config.lambda), started_(std::chrono::steady_clock::now()) {
  const auto& space = op.space();
  op.check_data(y, "data");
  if (dict.dim() != op.dim() || dict.data_dim() != op.data_dim()) {
    throw ContractError("dictionary was built for a different operator shape");
  }
  approx_ = config.initial ? *config.initial : space.zero();
  space.check_element(approx_, "initial approximation");
  residual_ = y - op.matrix() * approx_;
  fn_dot_atoms_ = dict.atoms().transpose() * (space.metric() * approx_);
  usage_counts_.assign(static_cast<std::size_t>(dict.size()), 0);
  energy_ = residual_.squaredNorm() + lambda_ * space.squared_norm(approx_);
  if (!std::isfinite(energy_)) throw NumericalError("initial energy is not finite");
}

Index RfmpState::max_usage() const {
  Index m = 0;
  for (Index c : usage_counts_) m = std::max(m, c);
  return m;
}

Eigen::VectorXd RfmpState::numerators(const Dictionary& dict) const {
  return dict.images().transpose() * residual_ - lambda_ * fn_dot_atoms_;
}

namespace {

void check_atom(const Dictionary& dict, Index atom) {
  if (atom < 0 || atom >= dict.size()) {
    throw ContractError("atom index " + std::to_string(atom) + " out of range [0, " +
                        std::to_string(dict.size()) + ")");
  }
}

double denominator(const Dictionary& dict, double lambda, Index atom) {
  const double d = dict.image_norms_sq()(atom) + lambda * dict.atom_norms_sq()(atom);
  if (!(d > 0.0)) {
    throw HypothesisError("condition C1 > 0 violated by atom " + std::to_string(atom) +
                          ": zero selection denominator");
  }
  return d;
}

double numerator(const RfmpState& state, const Dictionary& dict, double lambda, Index atom) {
  return dict.images().col(atom).dot(state.residual()) - lambda * state.fn_dot_atoms()(atom);
}

}  // namespace

double selection_score(const RfmpState& state, const Dictionary& dict, double lambda,
                       Index atom) {
  check_atom(dict, atom);
  const double den = denominator(dict, lambda, atom);
  const double num = numerator(state, dict, lambda, atom);
  return num * num / den;
}

double step_coefficient(const RfmpState& state, const Dictionary& dict, double lambda,
                        Index atom) {
  check_atom(dict, atom);
  const double den = denominator(dict, lambda, atom);
  return numerator(state, dict, lambda, atom) / den;
}

std::optional<Selection> select_atom(const RfmpState& state, const Dictionary& dict,
                                     const RfmpConfig& config) {
  const Eigen::VectorXd num = state.numerators(dict);
  const auto& counts = state.usage_counts();
  const bool prefer_high = config.tie_break == TieBreak::HighestIndex;

  std::optional<Selection> best;
  for (Index i = 0; i < dict.size(); ++i) {
    if (counts[static_cast<std::size_t>(i)] >= config.repetition_cap) continue;
    const double den = denominator(dict, config.lambda, i);
    const double score = num(i) * num(i) / den;
    if (std::isnan(score)) throw NumericalError("selection score is NaN at atom " + std::to_string(i));
    if (!best || score > best->score || (prefer_high && score == best->score)) {
      best = Selection{i, score, num(i) / den};
    }
  }
  return best;
}

double RfmpState::direct_energy(const HilbertSpace& space) const {
  return residual_.squaredNorm() + lambda_ * space.squared_norm(approx_);
}

void apply_step(RfmpState& state, const Dictionary& dict,
                Index atom, double alpha, double score) {
  check_atom(dict, atom);
  if (!std::isfinite(alpha)) throw NumericalError("non-finite step coefficient");

  state.approx_.noalias() += alpha * dict.atoms().col(atom);
  state.residual_.noalias() -= alpha * dict.images().col(atom);
  state.fn_dot_atoms_.noalias() += alpha * dict.gram().col(atom);
  ++state.usage_counts_[static_cast<std::size_t>(atom)];
  ++state.iteration_;

  // Tracked by the exact decrease; the score cannot exceed the energy, so
  // only rounding could push it below zero.
  state.energy_ = std::max(0.0, state.energy_ - score);
  const double rnorm_sq = state.residual_.squaredNorm();
  if (!std::isfinite(state.energy_) || !std::isfinite(rnorm_sq)) {
    throw NumericalError("energy became non-finite at iteration " +
                         std::to_string(state.iteration_));
  }

  IterationRecord rec;
  rec.n = state.iteration_;
  rec.atom = atom;
  rec.alpha = alpha;
  rec.energy = state.energy_;
  rec.residual_norm = std::sqrt(rnorm_sq);
  rec.score = score;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - state.started_).count();
  state.history_.push_back(rec);
}

void iterate(RfmpState& state, const Dictionary& dict,
             const RfmpConfig& config) {
  const auto sel = select_atom(state, dict, config);
  if (!sel) throw CapExhaustedError();
  apply_step(state, dict, sel->atom, sel->alpha, sel->score);
}

std::string_view to_string(Termination reason) {
  switch (reason) {
    case Termination::MaxIterations:
      return "maximum iterations reached";
    case Termination::AlphaBelowTolerance:
      return "step coefficient below tolerance";
    case Termination::EnergyDecreaseBelowTolerance:
      return "energy decrease below tolerance";
    case Termination::RepetitionCapExhausted:
      return "repetition cap exhausted";
  }
  return "unknown";
}

RfmpResult solve(const ForwardOperator& op, const DataVector& y, const Dictionary& dict,
                 const RfmpConfig& config) {
  config.validate();
  DictionaryDiagnostics diag;
  diag.lambda_used = config.lambda;
  std::tie(diag.c1, diag.c1_atom) = c1_value(dict, config.lambda);
  if (const auto gate = check_c1_positive(diag, config.c1_floor); !gate.passed) {
    throw HypothesisError(gate.message);
  }

  RfmpState state(op, y, dict, config);
  Termination reason = Termination::MaxIterations;
  while (true) {
    if (state.iteration() >= config.max_iterations) {
      reason = Termination::MaxIterations;
      break;
    }
    const auto sel = select_atom(state, dict, config);
    if (!sel) {
      reason = Termination::RepetitionCapExhausted;
      break;
    }
    if (std::abs(sel->alpha) < config.stop_alpha_tol) {
      reason = Termination::AlphaBelowTolerance;
      break;
    }
    if (sel->score < config.stop_energy_tol) {
      reason = Termination::EnergyDecreaseBelowTolerance;
      break;
    }
    apply_step(state, dict, sel->atom, sel->alpha, sel->score);
  }
  return RfmpResult{std::move(state), reason};
}

}  // namespace rfmp
