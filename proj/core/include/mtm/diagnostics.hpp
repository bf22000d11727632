#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mtm/common.hpp"
#include "mtm/targets.hpp"

namespace mtm {

/// Quantile by linear interpolation between order statistics (R's type 7).
/// Throws std::invalid_argument for an empty input or p outside [0, 1].
double quantile_type7(std::span<const double> values, double p);
/// Same, for input that is already sorted ascending.
double quantile_type7_sorted(std::span<const double> sorted, double p);

struct BurnInResult {
  std::size_t burn_in_index = 0;       ///< N0
  std::vector<double> retained_sample;  ///< chain[N0..N)
};

/// Block-walk burn-in for one scalar sequence.
///
/// Splits the chain into 20 blocks of length b = floor(N / 20), starts from
/// the final block and walks backward one block at a time. A block whose mean
/// lies inside the retained sample's empirical 2.5%/97.5% interval (inclusive)
/// is absorbed and N0 moves to its start; the walk stops after two
/// consecutive blocks fall outside. Chains with N < 20 return N0 = 0.
BurnInResult auto_burn_in(std::span<const double> chain);

/// Largest per-column N0 of an N x d chain.
std::size_t auto_burn_in(const Matrix& chain);

/// Multivariate effective sample size N (det Lambda / det Sigma_bm)^(1/d)
/// with Lambda the sample covariance and Sigma_bm the batch-means estimate of
/// the asymptotic covariance, batch size floor(sqrt(N)).
/// Throws DegenerateSampleError when N <= d^2, N < 100 or either matrix is singular.
double mess(const Matrix& sample);

/// Batch-means standard error of the mean of one scalar sequence.
double batch_means_mcse(std::span<const double> chain);

/// Two-sample Kolmogorov-Smirnov statistic for scalar samples.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Maximum over coordinates of the per-coordinate two-sample KS statistic.
/// Throws std::invalid_argument for empty samples or mismatched widths.
double ks_distance(const Matrix& a, const Matrix& b);

/// Smallest ks_distance between the chain with 25%, 50% or 75% of its rows
/// dropped and the baseline.
double best_ks_over_burnins(const Matrix& chain, const Matrix& baseline);

/// n x d direct draws: component by weight, then N(mu_k, I).
Matrix mixture_direct_sample(const MixtureParams& params, std::size_t n, std::uint64_t seed);

/// Sample standard deviation (denominator R - 1) of per-run posterior means.
double mcse_across_runs(std::span<const double> posterior_means);

struct OutlierFilterResult {
  std::vector<double> retained;
  std::vector<std::size_t> discarded;  ///< indices into the input
  double lower_fence = kNegInf;
  double upper_fence = kInf;
};

/// Drops values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] (type-7 quartiles).
/// Fewer than four values are returned unfiltered.
OutlierFilterResult iqr_outlier_filter(std::span<const double> values);

}  // namespace mtm
