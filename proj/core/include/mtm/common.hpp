#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mtm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Every chain owns exactly one of these; all randomness in a step comes from it.
using Rng = std::mt19937_64;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class for the library's domain errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Proposal adaptation produced an unusable state (e.g. a covariance that is
/// no longer positive definite).
class AdaptationError : public Error {
 public:
  using Error::Error;
};

/// Every candidate weight was zero, so no selection distribution exists.
class ZeroWeightError : public Error {
 public:
  using Error::Error;
};

/// The chain was asked to move from a state outside the target's support.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Invalid sampler or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The finite-difference Jacobian of an involution was singular.
class DegenerateTransformError : public Error {
 public:
  using Error::Error;
};

/// Both extended-space densities were zero, so the Metropolis ratio is 0/0.
class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

/// A sample was too short or too collinear for the requested statistic.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// log(sum(exp(values))) without overflow; returns -inf for an all -inf input.
template <class Range>
double log_sum_exp(const Range& values) {
  double max_value = kNegInf;
  for (double v : values) max_value = std::max(max_value, v);
  if (max_value == kNegInf) return kNegInf;
  if (max_value == kInf) return kInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

}  // namespace mtm
