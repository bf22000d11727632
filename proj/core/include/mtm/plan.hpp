#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtm/proposals.hpp"
#include "mtm/weights.hpp"

namespace mtm {

/// Experiments the harness knows how to build targets and metrics for.
/// The meaning of a cell's target parameter depends on the experiment:
///
///   banana         B
///   funnel         beta
///   mixture        dimension d
///   regression     dataset seed
///   lighthouse     unused (0)
///   eight-schools  unused (0)
///   custom         dimension of a standard Gaussian
inline constexpr std::string_view kExperiments[] = {
    "banana", "funnel", "mixture", "regression", "lighthouse", "eight-schools", "custom"};

bool is_known_experiment(std::string_view name);

/// A full-factorial experiment: every combination of proposal kind, weight,
/// M and target parameter is one cell, run `replicates` times.
struct ExperimentPlan {
  std::string experiment = "custom";
  std::vector<ProposalKind> proposals;
  std::vector<WeightSpec> weights;
  std::vector<std::size_t> M;
  std::vector<double> target_params;

  std::size_t replicates = 50;
  std::optional<std::size_t> budget_iterations;
  std::optional<double> budget_seconds;
  /// Iteration cap applied to time budgets.
  std::size_t max_iterations = 10'000'000;
  std::uint64_t master_seed = 1;

  /// Banana d or funnel d (number of x coordinates); 0 picks 10 and 9.
  std::size_t dim = 0;
  /// Data file for eight-schools (optional) or lighthouse (required).
  std::string data;
  /// Observations per simulated regression dataset.
  std::size_t regression_n = 1000;
  /// Size of the direct mixture sample used as the KS baseline.
  std::size_t baseline_size = 100'000;

  double scaling = 2.38;
  double het_spread = 1.0;
  std::size_t n0 = 100;
  CovarianceRule covariance_rule = CovarianceRule::kRobbinsMonro;

  /// Throws ConfigError for empty grids, unknown experiments, zero
  /// replicates, or anything other than exactly one budget.
  void validate() const;
};

/// Paper-scale wall-clock budget in seconds for each experiment.
double preset_budget_seconds(std::string_view experiment);

/// The full-scale design for an experiment: all four proposal kinds,
/// the four studied weights, the experiment's M grid and parameter grid,
/// 50 replicates and the preset time budget.
ExperimentPlan default_plan(std::string_view experiment);

/// Plan files are line-oriented `key = value` text. `#` starts a comment,
/// blank lines are ignored, list values are comma-separated and numbers may
/// be written as `10^x`. Recognised keys:
///
///   experiment, proposals, weights, M, target_param, replicates,
///   budget_iterations | budget_seconds, max_iterations, master_seed, dim,
///   data, regression_n, baseline_size, scaling, het_spread, n0,
///   covariance_rule
///
/// Unknown keys and malformed values throw ConfigError naming the line.
ExperimentPlan parse_plan(std::istream& in);
ExperimentPlan read_plan_file(const std::string& path);
void write_plan(std::ostream& out, const ExperimentPlan& plan);

/// One experiment cell.
struct Cell {
  std::string experiment;
  double target_param = 0.0;
  ProposalKind proposal = ProposalKind::kHomFull;
  WeightSpec weight;
  std::size_t M = 1;

  /// "experiment|target_param|proposal|weight|M", with target_param in
  /// shortest round-trip form.
  std::string id() const;
};

struct PlanExpansion {
  /// Size of the full Cartesian product.
  std::size_t settings = 0;
  /// Runnable cells, i.e. without het-cw at M = 1, in plan order.
  std::vector<Cell> cells;
};

/// Cells ordered by target parameter, proposal, weight, then M.
/// Throws ConfigError when no runnable cell remains.
PlanExpansion expand_plan(const ExperimentPlan& plan);

/// Shortest decimal string that parses back to the same double.
std::string format_number(double v);

}  // namespace mtm
