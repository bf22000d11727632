#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mtm {

/// One (run, metric) observation. Cell-level aggregates use run = -1.
struct ResultRow {
  std::string experiment;
  double target_param = 0.0;
  std::string proposal;
  std::string weight;
  std::size_t M = 1;
  long run = 0;
  std::uint64_t seed = 0;
  std::size_t n_iter = 0;
  std::size_t n_accept = 0;
  std::size_t burn_in = 0;
  double wall_s = 0.0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Metric name written for a chain that threw instead of finishing; its value is NaN.
inline constexpr const char* kFailedMetric = "failed";

/// Columns: experiment,target_param,proposal,weight,M,run,seed,n_iter,
/// n_accept,burn_in,wall_s,metric,value. Doubles use shortest round-trip text.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct SummaryRow {
  std::string experiment;
  double target_param = 0.0;
  std::string proposal;
  std::string weight;
  std::size_t M = 1;
  std::string metric;
  std::size_t n = 0;            ///< finite values summarized
  std::size_t n_nonfinite = 0;  ///< NaN or infinite values left out
  double median = 0.0;
  double q05 = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q95 = 0.0;
};

/// Groups rows by cell and metric, in order of first appearance, and reports
/// the median and the 5/25/75/95% type-7 quantiles of the finite values.
/// Throws std::invalid_argument for empty input.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

/// Columns: experiment,target_param,proposal,weight,M,metric,n,n_nonfinite,
/// median,q05,q25,q75,q95
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace mtm
