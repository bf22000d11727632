#include "mtm/diagnostics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace mtm {
namespace {

constexpr std::size_t kBurnInBlocks = 20;

/// Mean computed around the first element, so a constant block returns that constant exactly.
double shifted_mean(std::span<const double> xs) {
  const double ref = xs.front();
  double acc = 0.0;
  for (double v : xs) acc += v - ref;
  return ref + acc / static_cast<double>(xs.size());
}

std::vector<double> column(const Matrix& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
  return out;
}

double log_det_spd(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DegenerateSampleError(std::string(what) + " is not positive definite");
  }
  const double v = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  if (!std::isfinite(v)) throw DegenerateSampleError(std::string(what) + " is singular");
  return v;
}

}  // namespace

double quantile_type7_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile_type7(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_type7_sorted(sorted, p);
}

BurnInResult auto_burn_in(std::span<const double> chain) {
  const std::size_t N = chain.size();
  BurnInResult result;
  if (N < kBurnInBlocks) {
    result.retained_sample.assign(chain.begin(), chain.end());
    return result;
  }
  const std::size_t b = N / kBurnInBlocks;
  const auto boundary = [b](std::size_t j) { return j * b; };

  std::size_t n0 = boundary(kBurnInBlocks - 1);
  std::vector<double> sorted(chain.begin() + static_cast<std::ptrdiff_t>(n0), chain.end());
  std::sort(sorted.begin(), sorted.end());
  double lower = quantile_type7_sorted(sorted, 0.025);
  double upper = quantile_type7_sorted(sorted, 0.975);

  std::size_t misses = 0;
  for (std::size_t j = kBurnInBlocks - 1; j >= 1; --j) {
    const auto block = chain.subspan(boundary(j - 1), b);
    const double mu = shifted_mean(block);
    if (mu >= lower && mu <= upper) {
      misses = 0;
      n0 = boundary(j - 1);
      sorted.insert(sorted.end(), block.begin(), block.end());
      std::sort(sorted.begin(), sorted.end());
      lower = quantile_type7_sorted(sorted, 0.025);
      upper = quantile_type7_sorted(sorted, 0.975);
    } else if (++misses == 2) {
      break;
    }
  }
  result.burn_in_index = n0;
  result.retained_sample.assign(chain.begin() + static_cast<std::ptrdiff_t>(n0), chain.end());
  return result;
}

std::size_t auto_burn_in(const Matrix& chain) {
  std::size_t n0 = 0;
  for (Eigen::Index j = 0; j < chain.cols(); ++j) {
    n0 = std::max(n0, auto_burn_in(column(chain, j)).burn_in_index);
  }
  return n0;
}

double mess(const Matrix& sample) {
  const auto N = static_cast<std::size_t>(sample.rows());
  const auto d = static_cast<std::size_t>(sample.cols());
  if (d == 0) throw DegenerateSampleError("mess: sample has no columns");
  if (N <= d * d || N < 100) {
    throw DegenerateSampleError("mess: need N > d^2 and N >= 100, got N = " + std::to_string(N));
  }
  const Vector mean = sample.colwise().mean();
  const Matrix centred = sample.rowwise() - mean.transpose();
  const Matrix lambda = centred.transpose() * centred / static_cast<double>(N - 1);

  const auto b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(N))));
  const std::size_t a = N / b;
  Matrix sigma = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < a; ++k) {
    const Vector batch_mean =
        sample.middleRows(static_cast<Eigen::Index>(k * b), static_cast<Eigen::Index>(b))
            .colwise()
            .mean();
    const Vector r = batch_mean - mean;
    sigma += r * r.transpose();
  }
  sigma *= static_cast<double>(b) / static_cast<double>(a - 1);

  const double log_ratio =
      log_det_spd(lambda, "sample covariance") - log_det_spd(sigma, "batch-means covariance");
  return static_cast<double>(N) * std::exp(log_ratio / static_cast<double>(d));
}

double batch_means_mcse(std::span<const double> chain) {
  const std::size_t N = chain.size();
  if (N < 4) throw DegenerateSampleError("batch_means_mcse: need at least 4 values");
  const auto b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(N))));
  const std::size_t a = N / b;
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(N);
  double ss = 0.0;
  for (std::size_t k = 0; k < a; ++k) {
    const auto batch = chain.subspan(k * b, b);
    const double bm = std::accumulate(batch.begin(), batch.end(), 0.0) / static_cast<double>(b);
    ss += (bm - mean) * (bm - mean);
  }
  const double sigma2 = static_cast<double>(b) * ss / static_cast<double>(a - 1);
  return std::sqrt(sigma2 / static_cast<double>(N));
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("ks_distance: empty sample");
  if (a.cols() != b.cols()) throw std::invalid_argument("ks_distance: column counts differ");
  double d = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    d = std::max(d, ks_statistic(column(a, j), column(b, j)));
  }
  return d;
}

double best_ks_over_burnins(const Matrix& chain, const Matrix& baseline) {
  const Eigen::Index N = chain.rows();
  if (N < 4) throw std::invalid_argument("best_ks_over_burnins: chain shorter than 4");
  double best = kInf;
  for (double fraction : {0.25, 0.5, 0.75}) {
    const auto start = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(N)));
    best = std::min(best, ks_distance(chain.bottomRows(N - start), baseline));
  }
  return best;
}

Matrix mixture_direct_sample(const MixtureParams& params, std::size_t n, std::uint64_t seed) {
  const auto weights = params.normalized_weights();
  std::array<double, 5> cumulative{};
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(params.d);
  Matrix out(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double u = unif(rng);
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = params.component_means[k][j] + normal(rng);
  }
  return out;
}

double mcse_across_runs(std::span<const double> posterior_means) {
  const std::size_t R = posterior_means.size();
  if (R < 2) throw std::invalid_argument("mcse_across_runs: need at least 2 runs");
  const double mean =
      std::accumulate(posterior_means.begin(), posterior_means.end(), 0.0) / static_cast<double>(R);
  double ss = 0.0;
  for (double v : posterior_means) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(R - 1));
}

OutlierFilterResult iqr_outlier_filter(std::span<const double> values) {
  OutlierFilterResult out;
  if (values.size() < 4) {
    out.retained.assign(values.begin(), values.end());
    return out;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_type7_sorted(sorted, 0.25);
  const double q3 = quantile_type7_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  out.lower_fence = q1 - 1.5 * iqr;
  out.upper_fence = q3 + 1.5 * iqr;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= out.lower_fence && values[i] <= out.upper_fence) {
      out.retained.push_back(values[i]);
    } else {
      out.discarded.push_back(i);
    }
  }
  return out;
}

}  // namespace mtm
