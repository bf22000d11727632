#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string_view>
#include <vector>

#include "mtm/kernel.hpp"
#include "mtm/plan.hpp"
#include "mtm/results.hpp"
#include "mtm/targets.hpp"

namespace mtm {

/// FNV-1a over the bytes followed by the splitmix64 finalizer.
std::uint64_t hash64(std::string_view bytes);

/// Seed of replicate r in a cell: hash64("master_seed|cell id|r").
std::uint64_t replicate_seed(std::uint64_t master_seed, const Cell& cell, std::size_t r);

/// Everything a plan's cells share: targets per parameter value, loaded data
/// files and mixture baselines. Built once, then read concurrently.
class ExperimentContext {
 public:
  explicit ExperimentContext(ExperimentPlan plan);

  const ExperimentPlan& plan() const { return plan_; }
  std::shared_ptr<const Target> target(double target_param) const;
  /// On-support starting point: zeros, with scale parameters and the funnel's
  /// x block set to 1.
  Vector initial_state(double target_param) const;
  /// Direct mixture sample for dimension d (mixture experiment only).
  const Matrix& baseline(std::size_t d) const;
  KernelConfig kernel_config(const Cell& cell) const;
  Budget budget() const;

 private:
  ExperimentPlan plan_;
  std::map<double, std::shared_ptr<const Target>> targets_;
  std::map<std::size_t, Matrix> baselines_;
};

/// Runs replicate r of a cell and returns its metric rows. Exceptions from
/// the chain become a single row with metric "failed" and value NaN; a
/// metric that cannot be computed is written as NaN.
std::vector<ResultRow> run_replicate(const ExperimentContext& context, const Cell& cell,
                                     std::size_t r);

/// Cell-level rows (run = -1) derived from the replicate rows: for every
/// "mean[p]" metric, "mcse[p]" over the runs left by the IQR filter and
/// "discarded[p]", the number of runs the filter removed.
std::vector<ResultRow> cell_aggregates(const Cell& cell, const std::vector<ResultRow>& replicate_rows);

/// All replicates of one cell followed by its aggregates.
std::vector<ResultRow> run_cell(const ExperimentContext& context, const Cell& cell);

struct RunOptions {
  /// Worker threads; 0 uses std::thread::hardware_concurrency().
  std::size_t threads = 1;
  /// Called after each finished replicate with (done, total); may be called
  /// from worker threads, one call at a time.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs every (cell, replicate) job on a worker pool. Rows come back in plan
/// order regardless of thread count.
std::vector<ResultRow> run_plan(const ExperimentPlan& plan, const RunOptions& options = {});

/// key=value lines describing the machine, build and definitional choices,
/// written next to a results file.
void write_run_metadata(std::ostream& out, const ExperimentPlan& plan, std::size_t threads,
                        double elapsed_seconds);

}  // namespace mtm
