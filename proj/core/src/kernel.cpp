#include "mtm/kernel.hpp"

#include <chrono>

namespace mtm {
namespace {

TrialRecord full_record(const Trial<Vector>& trial) {
  TrialRecord r;
  r.candidates = trial.candidates;
  r.reverse = trial.reverse;
  r.selected = trial.selected;
  r.forward_log_weights = trial.forward_log_weights;
  r.backward_log_weights = trial.backward_log_weights;
  r.log_ratio_general = trial.log_ratio_general;
  r.log_ratio_restricted = trial.log_ratio_restricted;
  return r;
}

TrialRecord coordinate_record(const Trial<double>& trial, const Vector& base, std::size_t i) {
  TrialRecord r;
  r.coordinate = i;
  const auto expand = [&](double v) {
    Vector p = base;
    p[static_cast<Eigen::Index>(i)] = v;
    return p;
  };
  for (double v : trial.candidates) r.candidates.push_back(expand(v));
  for (double v : trial.reverse) r.reverse.push_back(expand(v));
  r.selected = trial.selected;
  r.forward_log_weights = trial.forward_log_weights;
  r.backward_log_weights = trial.backward_log_weights;
  r.log_ratio_general = trial.log_ratio_general;
  r.log_ratio_restricted = trial.log_ratio_restricted;
  return r;
}

double checked_log_density(const Target& target, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != target.dim()) {
    throw StateError("state has dimension " + std::to_string(x.size()) + ", target expects " +
                     std::to_string(target.dim()));
  }
  const double lp = target.log_density(x);
  if (!(lp > kNegInf)) throw StateError("current state is outside the target's support");
  return lp;
}

}  // namespace

double general_acceptance_log_ratio(double log_pi_x, double log_pi_y, double log_T_J_xy,
                                    double log_T_J_yx, double log_p_J_forward,
                                    double log_p_J_backward) {
  return (log_pi_y + log_T_J_xy + log_p_J_backward) - (log_pi_x + log_T_J_yx + log_p_J_forward);
}

Kernel::Kernel(KernelConfig config)
    : config_(std::move(config)),
      proposal_(config_.proposal, config_.target ? config_.target->dim() : 0) {
  if (!config_.target) throw ConfigError("kernel: no target");
  restricted_ = config_.acceptance_path == AcceptancePath::kRestrictedAuto &&
                is_restricted_form(config_.weight, proposal_.symmetric());
}

StepResult Kernel::step(const Vector& x, Rng& rng) {
  return proposal_.component_wise() ? cw_mtm_step(*this, x, rng) : mtm_step(*this, x, rng);
}

StepResult mtm_step(Kernel& kernel, const Vector& x, Rng& rng) {
  const double log_pi_x = checked_log_density(kernel.target(), x);
  const FullMove move{&kernel.target(), &kernel.proposal()};
  Trial<Vector> trial;
  const auto outcome = mtm_transition(move, kernel.config().weight, kernel.uses_restricted_path(),
                                      kernel.proposal().size(), x, log_pi_x, rng, trial);
  StepResult result;
  result.accepted = outcome.accepted;
  result.log_accept_prob = outcome.log_accept_prob;
  if (!outcome.zero_weight) result.selected_index = trial.selected;
  result.accepted_moves = outcome.accepted ? 1 : 0;
  result.next_state = outcome.accepted ? trial.candidates[trial.selected] : x;
  if (kernel.config().keep_trials) result.trials.push_back(full_record(trial));
  return result;
}

StepResult cw_mtm_step(Kernel& kernel, const Vector& x, Rng& rng) {
  checked_log_density(kernel.target(), x);
  const Target& target = kernel.target();
  Proposal& proposal = kernel.proposal();
  StepResult result;
  result.next_state = x;
  Vector& state = result.next_state;
  Trial<double> trial;
  for (std::size_t i = 0; i < target.dim(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const CoordinateMove move{&target, &proposal, &state, i};
    const double xi = state[k];
    const double log_pi_x = move.log_target(xi);
    const auto outcome = mtm_transition(move, kernel.config().weight, kernel.uses_restricted_path(),
                                        proposal.size(), xi, log_pi_x, rng, trial);
    if (kernel.config().keep_trials) result.trials.push_back(coordinate_record(trial, state, i));
    result.log_accept_prob = outcome.log_accept_prob;
    if (outcome.zero_weight) {
      result.selected_index.reset();
      continue;
    }
    result.selected_index = trial.selected;
    proposal.record_selection(i, trial.selected);
    if (outcome.accepted) {
      state[k] = trial.candidates[trial.selected];
      ++result.accepted_moves;
    }
  }
  result.accepted = result.accepted_moves > 0;
  return result;
}

ChainRun run_chain(const KernelConfig& config, const Vector& x0, const ChainOptions& options) {
  const auto& budget = options.budget;
  if (budget.seconds && !(*budget.seconds > 0.0)) {
    throw ConfigError("run_chain: time budget must be positive");
  }
  if (!budget.seconds && !budget.iterations) throw ConfigError("run_chain: no budget given");

  Kernel kernel(config);
  checked_log_density(kernel.target(), x0);
  Rng rng(options.seed);

  ChainRun run;
  run.dim = static_cast<std::size_t>(x0.size());
  run.seed = options.seed;
  const std::size_t limit = budget.iterations ? *budget.iterations : budget.max_iterations;
  if (budget.iterations) run.values.reserve((limit + 1) * run.dim);
  run.values.insert(run.values.end(), x0.data(), x0.data() + x0.size());
  run.accepted.push_back(0);
  if (options.trace_every > 0) {
    run.trace_columns = kernel.proposal().trace_columns();
    run.trace_iterations.push_back(0);
    run.trace_values.push_back(kernel.proposal().trace_values());
  }

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto deadline =
      budget.seconds ? start + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(*budget.seconds))
                     : Clock::time_point::max();
  Vector x = x0;
  for (std::size_t n = 1; n <= limit; ++n) {
    if (budget.seconds && Clock::now() >= deadline) break;
    StepResult step = kernel.step(x, rng);
    x = std::move(step.next_state);
    kernel.proposal().adapt(x, n, rng);
    run.values.insert(run.values.end(), x.data(), x.data() + x.size());
    run.accepted.push_back(step.accepted ? 1 : 0);
    run.n_accept += step.accepted ? 1 : 0;
    run.n_iter = n;
    if (options.trace_every > 0 && n % options.trace_every == 0) {
      run.trace_iterations.push_back(n);
      run.trace_values.push_back(kernel.proposal().trace_values());
    }
  }
  run.wall_s = std::chrono::duration<double>(Clock::now() - start).count();
  return run;
}

}  // namespace mtm
