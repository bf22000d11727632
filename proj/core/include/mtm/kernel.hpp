#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtm/common.hpp"
#include "mtm/proposals.hpp"
#include "mtm/targets.hpp"
#include "mtm/weights.hpp"

namespace mtm {

enum class AcceptancePath {
  /// Always evaluate the full ratio with selection probabilities.
  kGeneral,
  /// Use the weight-sum ratio whenever the weight is of restricted form.
  kRestrictedAuto,
};

struct KernelConfig {
  std::shared_ptr<const Target> target;
  ProposalConfig proposal;  ///< proposal.M is the number of candidates
  WeightSpec weight;
  AcceptancePath acceptance_path = AcceptancePath::kRestrictedAuto;
  /// Keep the candidate/reverse draws of every step in StepResult::trials.
  bool keep_trials = false;
};

/// log pi(y) + log T_J(x|y) + log p(J | x*, y) - log pi(x) - log T_J(y|x) - log p(J | y, x).
/// Unclamped; callers take min(0, .) themselves.
double general_acceptance_log_ratio(double log_pi_x, double log_pi_y, double log_T_J_xy,
                                    double log_T_J_yx, double log_p_J_forward,
                                    double log_p_J_backward);

/// One realization of a step's auxiliary randomness and everything derived from it.
template <class Point>
struct Trial {
  std::vector<Point> candidates;  ///< y_1..y_M
  std::vector<Point> reverse;     ///< x*_1..x*_M, reverse[J] is the current state
  std::size_t selected = 0;       ///< J
  std::vector<double> candidate_log_targets;
  std::vector<double> forward_log_weights;
  std::vector<double> backward_log_weights;
  double log_ratio_general = kNegInf;
  double log_ratio_restricted = kNegInf;
};

/// Candidate record kept when KernelConfig::keep_trials is set. Points are
/// full state vectors; for component-wise steps only `coordinate` differs.
struct TrialRecord {
  std::optional<std::size_t> coordinate;
  std::vector<Vector> candidates;
  std::vector<Vector> reverse;
  std::size_t selected = 0;
  std::vector<double> forward_log_weights;
  std::vector<double> backward_log_weights;
  double log_ratio_general = kNegInf;
  double log_ratio_restricted = kNegInf;
};

struct StepResult {
  Vector next_state;
  /// Full moves: the proposal was accepted. Component-wise: at least one coordinate moved.
  bool accepted = false;
  /// Empty when every candidate had zero weight. Component-wise: last coordinate.
  std::optional<std::size_t> selected_index;
  /// log of min(1, ratio); component-wise: last coordinate.
  double log_accept_prob = kNegInf;
  std::size_t accepted_moves = 0;
  std::vector<TrialRecord> trials;
};

// ---------------------------------------------------------------- moves
//
// A move supplies the point type and the densities the MTM ratio needs:
//
//   Point draw(std::size_t m, const Point& from, Rng&) const;
//   double log_target(const Point&) const;
//   double log_proposal(std::size_t m, const Point& from, const Point& to) const;
//   std::span<const double> coords(const Point&) const;   // for jump distances
//
// The same evaluation code then serves full-vector steps, component-wise
// sub-steps and the exact discrete enumeration in the balance verifier.

struct FullMove {
  using Point = Vector;
  const Target* target;
  const Proposal* proposal;

  Point draw(std::size_t m, const Point& from, Rng& rng) const { return proposal->draw(m, from, rng); }
  double log_target(const Point& p) const { return target->log_density(p); }
  double log_proposal(std::size_t m, const Point& from, const Point& to) const {
    return proposal->log_density(m, from, to);
  }
  std::span<const double> coords(const Point& p) const {
    return {p.data(), static_cast<std::size_t>(p.size())};
  }
};

/// Scalar move on coordinate i with the other coordinates taken from `base`.
struct CoordinateMove {
  using Point = double;
  const Target* target;
  const Proposal* proposal;
  const Vector* base;
  std::size_t i;

  Point draw(std::size_t m, const Point& from, Rng& rng) const {
    return proposal->draw_coordinate(i, m, from, rng);
  }
  double log_target(const Point& p) const { return coordinate_log_density(*target, *base, i, p); }
  double log_proposal(std::size_t m, const Point& from, const Point& to) const {
    return proposal->coordinate_log_density(i, m, from, to);
  }
  std::span<const double> coords(const Point& p) const { return {&p, 1}; }
};

namespace detail {

template <class Move>
void forward_weights(const Move& move, const WeightSpec& weight, const typename Move::Point& x,
                     Trial<typename Move::Point>& trial) {
  const std::size_t M = trial.candidates.size();
  trial.candidate_log_targets.resize(M);
  trial.forward_log_weights.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& y = trial.candidates[m];
    const double lp = move.log_target(y);
    trial.candidate_log_targets[m] = lp;
    trial.forward_log_weights[m] =
        log_weight(weight, move.coords(y), move.coords(x), lp, move.log_proposal(m, x, y),
                   move.log_proposal(m, y, x));
  }
}

template <class Move>
void backward_weights_and_ratios(const Move& move, const WeightSpec& weight,
                                 const typename Move::Point& x, double log_pi_x,
                                 Trial<typename Move::Point>& trial) {
  const std::size_t M = trial.candidates.size();
  const std::size_t J = trial.selected;
  const auto& yJ = trial.candidates[J];
  trial.backward_log_weights.resize(M);
  for (std::size_t m = 0; m < M; ++m) {
    const auto& xs = trial.reverse[m];
    const double lp = m == J ? log_pi_x : move.log_target(xs);
    trial.backward_log_weights[m] =
        log_weight(weight, move.coords(xs), move.coords(yJ), lp, move.log_proposal(m, yJ, xs),
                   move.log_proposal(m, xs, yJ));
  }
  const double forward_total = log_sum_exp(trial.forward_log_weights);
  const double backward_total = log_sum_exp(trial.backward_log_weights);
  trial.log_ratio_general = general_acceptance_log_ratio(
      log_pi_x, trial.candidate_log_targets[J], move.log_proposal(J, yJ, x),
      move.log_proposal(J, x, yJ), trial.forward_log_weights[J] - forward_total,
      trial.backward_log_weights[J] - backward_total);
  trial.log_ratio_restricted = forward_total - backward_total;
}

}  // namespace detail

/// Computes weights and both acceptance log-ratios for fixed candidates,
/// selection and reverse draws. `log_pi_x` is move.log_target(x).
template <class Move>
void evaluate_trial(const Move& move, const WeightSpec& weight, const typename Move::Point& x,
                    double log_pi_x, Trial<typename Move::Point>& trial) {
  detail::forward_weights(move, weight, x, trial);
  detail::backward_weights_and_ratios(move, weight, x, log_pi_x, trial);
}

struct StepOutcome {
  bool accepted = false;
  bool zero_weight = false;
  double log_accept_prob = kNegInf;
};

/// Runs one MTM transition for `move` from x: draw candidates, select J,
/// draw reverse samples, then accept with log U < log-ratio. Randomness is
/// consumed in exactly that order. With all weights zero the step rejects
/// before any reverse draw.
template <class Move>
StepOutcome mtm_transition(const Move& move, const WeightSpec& weight, bool restricted,
                           std::size_t M, const typename Move::Point& x, double log_pi_x,
                           Rng& rng, Trial<typename Move::Point>& trial) {
  trial.candidates.clear();
  trial.reverse.clear();
  for (std::size_t m = 0; m < M; ++m) trial.candidates.push_back(move.draw(m, x, rng));
  detail::forward_weights(move, weight, x, trial);

  StepOutcome outcome;
  std::vector<double> log_probs;
  try {
    log_probs = selection_log_probs(trial.forward_log_weights);
  } catch (const ZeroWeightError&) {
    outcome.zero_weight = true;
    return outcome;
  }
  trial.selected = sample_candidate(log_probs, rng);
  const auto& yJ = trial.candidates[trial.selected];
  for (std::size_t m = 0; m < M; ++m) {
    trial.reverse.push_back(m == trial.selected ? x : move.draw(m, yJ, rng));
  }
  detail::backward_weights_and_ratios(move, weight, x, log_pi_x, trial);
  const double ratio = restricted ? trial.log_ratio_restricted : trial.log_ratio_general;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_u = std::log(unif(rng));
  outcome.log_accept_prob = std::min(0.0, ratio);
  outcome.accepted = log_u < ratio;
  return outcome;
}

// ---------------------------------------------------------------- kernel

/// A configured MTM kernel and its proposal adaptation state.
class Kernel {
 public:
  explicit Kernel(KernelConfig config);

  const KernelConfig& config() const { return config_; }
  const Target& target() const { return *config_.target; }
  const Proposal& proposal() const { return proposal_; }
  Proposal& proposal() { return proposal_; }

  /// Whether accept/reject uses the weight-sum ratio.
  bool uses_restricted_path() const { return restricted_; }

  /// Dispatches to mtm_step or cw_mtm_step by proposal kind.
  StepResult step(const Vector& x, Rng& rng);

 private:
  KernelConfig config_;
  Proposal proposal_;
  bool restricted_;
};

/// Full-vector MTM step. Throws StateError when log pi(x) = -inf.
StepResult mtm_step(Kernel& kernel, const Vector& x, Rng& rng);

/// Component-wise MTM: one scalar MTM step per coordinate, in order, each
/// starting from the state left by the previous one. Het-cw selections are
/// recorded in the proposal's counters.
StepResult cw_mtm_step(Kernel& kernel, const Vector& x, Rng& rng);

// ---------------------------------------------------------------- chains

struct Budget {
  std::optional<std::size_t> iterations;
  std::optional<double> seconds;
  /// Hard cap for time budgets so a chain always terminates.
  std::size_t max_iterations = 100'000'000;

  static Budget of_iterations(std::size_t n) { return Budget{n, std::nullopt}; }
  static Budget of_seconds(double s, std::size_t cap = 100'000'000) {
    return Budget{std::nullopt, s, cap};
  }
};

/// States of a chain stored row-major, one row per recorded state.
struct ChainRun {
  std::size_t dim = 0;
  std::vector<double> values;          ///< (n_iter + 1) x dim, row 0 is x0
  std::vector<std::uint8_t> accepted;  ///< per state, 0 for row 0
  std::size_t n_iter = 0;
  std::size_t n_accept = 0;
  double wall_s = 0.0;
  std::uint64_t seed = 0;

  std::vector<std::string> trace_columns;
  std::vector<std::size_t> trace_iterations;
  std::vector<std::vector<double>> trace_values;

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> states()
      const {
    return {values.data(), static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(dim)};
  }
  Vector state(std::size_t row) const {
    return Eigen::Map<const Vector>(values.data() + row * dim, static_cast<Eigen::Index>(dim));
  }
};

struct ChainOptions {
  Budget budget = Budget::of_iterations(1000);
  std::uint64_t seed = 0;
  /// Record proposal adaptation parameters every this many iterations; 0 disables.
  std::size_t trace_every = 0;
};

/// Applies the kernel repeatedly from x0, adapting the proposal after every
/// accept/reject with the new state. Deterministic given the seed under
/// iteration budgets. Throws ConfigError for a non-positive time budget and
/// StateError when x0 is off-support.
ChainRun run_chain(const KernelConfig& config, const Vector& x0, const ChainOptions& options);

// ---------------------------------------------------------------- chain files

/// CSV columns: iteration,<coordinate names>,accepted
void write_chain_csv(std::ostream& out, const ChainRun& chain,
                     const std::vector<std::string>& coordinate_names);

/// Binary chain layout, little-endian:
///
///   offset 0   char[8]  "MTMCHAIN"
///   offset 8   uint32   version (1)
///   offset 12  uint32   dim
///   offset 16  uint64   number of rows
///   offset 24  rows of (dim + 2) float64: iteration, x_1..x_dim, accepted (0 or 1)
void write_chain_binary(std::ostream& out, const ChainRun& chain);
ChainRun read_chain_binary(std::istream& in);

/// CSV columns: iteration,<Proposal::trace_columns()>
void write_trace_csv(std::ostream& out, const ChainRun& chain);

}  // namespace mtm
