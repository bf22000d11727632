#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mtm/common.hpp"

namespace mtm {

/// Unnormalized log-density over R^d.
///
/// Implementations are immutable after construction, so a single instance may
/// be shared by any number of chains running on different threads.
/// `log_density` returns a finite value on the support and exactly -inf off it.
class Target {
 public:
  virtual ~Target() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;

  virtual double log_density(const Vector& x) const = 0;

  /// Analytic gradient of `log_density`; only meaningful on the support.
  virtual Vector gradient(const Vector& x) const = 0;

  /// Display names for each coordinate, used as metric labels.
  virtual std::vector<std::string> coordinate_names() const;

  /// True when `partial_log_density` is cheaper than a full evaluation for at
  /// least some coordinates.
  virtual bool supports_coordinate_eval() const { return false; }

  /// log pi(x with x[i] = xi_new) up to an additive constant that may depend on
  /// x[j], j != i, but not on x[i]. The default is a full evaluation.
  virtual double partial_log_density(const Vector& x, std::size_t i, double xi_new) const;

 protected:
  void check_dim(const Vector& x) const;
};

/// Evaluates `target` with coordinate `i` of `x` replaced by `xi_new`.
///
/// Uses the target's fast path when it has one and a full evaluation otherwise;
/// the two agree up to a constant independent of coordinate i.
/// Throws std::out_of_range for a bad index.
double coordinate_log_density(const Target& target, const Vector& x, std::size_t i, double xi_new);

// --------------------------------------------------------------------------
// Banana

struct BananaParams {
  double B = 0.01;    ///< non-Gaussianity, >= 0
  std::size_t d = 10; ///< >= 2
};

/// pi(x) ~ exp[-x1^2/200 - (x2 + B x1^2 - 100 B)^2 / 2 - (x3^2 + ... + xd^2) / 2]
class BananaTarget final : public Target {
 public:
  explicit BananaTarget(BananaParams params);

  std::string name() const override { return "banana"; }
  std::size_t dim() const override { return params_.d; }
  double log_density(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool supports_coordinate_eval() const override { return true; }
  double partial_log_density(const Vector& x, std::size_t i, double xi_new) const override;

  const BananaParams& params() const { return params_; }

 private:
  BananaParams params_;
};

double banana_log_density(const Vector& x, const BananaParams& params);

// --------------------------------------------------------------------------
// Neal's funnel

struct FunnelParams {
  double beta = 1.0;  ///< scale, > 0
  std::size_t d = 9;  ///< number of x coordinates; the state has d + 1 entries
};

/// State layout (y, x_1, ..., x_d) with y ~ N(0, 3^2) and x_i | y ~ N(0, exp(y/beta)^2).
/// Gaussian normalizing constants are kept because they depend on y.
class FunnelTarget final : public Target {
 public:
  explicit FunnelTarget(FunnelParams params);

  std::string name() const override { return "funnel"; }
  std::size_t dim() const override { return params_.d + 1; }
  double log_density(const Vector& state) const override;
  Vector gradient(const Vector& state) const override;
  std::vector<std::string> coordinate_names() const override;
  bool supports_coordinate_eval() const override { return true; }
  double partial_log_density(const Vector& state, std::size_t i, double xi_new) const override;

  const FunnelParams& params() const { return params_; }

 private:
  FunnelParams params_;
};

double funnel_log_density(const Vector& state, const FunnelParams& params);

// --------------------------------------------------------------------------
// Five-component Gaussian mixture

struct MixtureParams {
  std::size_t d = 2;
  std::array<Vector, 5> component_means;
  std::array<double, 5> component_weights{1, 2, 4, 2, 1};

  /// Means 0, 3, -3, (3,-3,3,...), (-3,3,-3,...) in d dimensions with
  /// unnormalized weights (1, 2, 4, 2, 1).
  static MixtureParams standard(std::size_t d);

  /// Weights divided by their sum.
  std::array<double, 5> normalized_weights() const;
};

/// log sum_k w_k N(x; mu_k, I_d), evaluated with log-sum-exp.
class MixtureTarget final : public Target {
 public:
  explicit MixtureTarget(MixtureParams params);

  std::string name() const override { return "mixture"; }
  std::size_t dim() const override { return params_.d; }
  double log_density(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;

  const MixtureParams& params() const { return params_; }

 private:
  MixtureParams params_;
  std::array<double, 5> log_weights_{};
};

double mixture_log_density(const Vector& x, const MixtureParams& params);

// --------------------------------------------------------------------------
// Bayesian linear regression

struct RegressionDataset {
  Matrix X;  ///< n x d predictors
  Vector y;  ///< n responses

  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(X.cols()); }
};

/// y_i = beta0 + beta^T x_i + eps_i, eps_i ~ N(0, sigma^2), x_i ~ N(0, I) i.i.d.
/// The same seed always produces the same dataset.
RegressionDataset make_regression_dataset(std::uint64_t seed, std::size_t n, double beta0,
                                          const Vector& beta, double sigma);

/// Shape and scale of the inverse-gamma prior on sigma (mean 1, variance 100).
struct InverseGammaPrior {
  double shape = 2.01;
  double scale = 1.01;
};

/// Posterior over theta = (beta0, beta_1..beta_d, sigma), sigma on its natural
/// scale. Priors: N(0, 100^2) on every coefficient, inverse-gamma on sigma.
class RegressionTarget final : public Target {
 public:
  explicit RegressionTarget(RegressionDataset data, double coefficient_prior_sd = 100.0,
                            InverseGammaPrior sigma_prior = {});

  std::string name() const override { return "regression"; }
  std::size_t dim() const override { return data_.d() + 2; }
  double log_density(const Vector& theta) const override;
  Vector gradient(const Vector& theta) const override;
  std::vector<std::string> coordinate_names() const override;

  const RegressionDataset& data() const { return data_; }

 private:
  RegressionDataset data_;
  double prior_sd_;
  InverseGammaPrior sigma_prior_;
};

double regression_log_posterior(const Vector& theta, const RegressionDataset& data);

// --------------------------------------------------------------------------
// Gull's lighthouse

struct LighthouseData {
  std::array<double, 3> flashes{};
};

/// Bounds of the flat prior on (x0, y). The lower bound on y is exclusive.
struct LighthouseBox {
  double x0_min = -1e6;
  double x0_max = 1e6;
  double y_max = 1e6;
};

/// Posterior over theta = (x0, y): product of three Cauchy(x0, y) densities,
/// flat prior on the box.
class LighthouseTarget final : public Target {
 public:
  explicit LighthouseTarget(LighthouseData data, LighthouseBox box = {});

  std::string name() const override { return "lighthouse"; }
  std::size_t dim() const override { return 2; }
  double log_density(const Vector& theta) const override;
  Vector gradient(const Vector& theta) const override;
  std::vector<std::string> coordinate_names() const override;

 private:
  LighthouseData data_;
  LighthouseBox box_;
};

double lighthouse_log_posterior(const Vector& theta, const LighthouseData& data,
                                const LighthouseBox& box = {});

// --------------------------------------------------------------------------
// Eight schools

struct EightSchoolsData {
  std::vector<double> effects;
  std::vector<double> sds;

  /// The classical coaching-study values (Rubin, 1981).
  static EightSchoolsData rubin();
};

/// Posterior over theta = (mu, tau, theta_1..theta_8):
/// mu ~ N(0, 5^2), tau ~ Cauchy(0, 5) on tau > 0, theta_i ~ N(mu, tau^2),
/// y_i ~ N(theta_i, sigma_i^2).
class EightSchoolsTarget final : public Target {
 public:
  explicit EightSchoolsTarget(EightSchoolsData data);

  std::string name() const override { return "eight-schools"; }
  std::size_t dim() const override { return 10; }
  double log_density(const Vector& theta) const override;
  Vector gradient(const Vector& theta) const override;
  std::vector<std::string> coordinate_names() const override;
  bool supports_coordinate_eval() const override { return true; }
  double partial_log_density(const Vector& theta, std::size_t i, double xi_new) const override;

 private:
  EightSchoolsData data_;
};

double eight_schools_log_posterior(const Vector& theta, const EightSchoolsData& data);

// --------------------------------------------------------------------------
// Standard Gaussian, used for sanity runs and the "custom" experiment.

class GaussianTarget final : public Target {
 public:
  explicit GaussianTarget(std::size_t d);

  std::string name() const override { return "gaussian"; }
  std::size_t dim() const override { return d_; }
  double log_density(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  bool supports_coordinate_eval() const override { return true; }
  double partial_log_density(const Vector& x, std::size_t i, double xi_new) const override;

 private:
  std::size_t d_;
};

// --------------------------------------------------------------------------
// Data files. All are CSV with a header row and one record per line.

/// Columns: school,effect,sd
EightSchoolsData read_eight_schools_csv(std::istream& in);
EightSchoolsData read_eight_schools_csv(const std::string& path);
void write_eight_schools_csv(std::ostream& out, const EightSchoolsData& data);

/// Column: flash (exactly three records)
LighthouseData read_lighthouse_csv(std::istream& in);
LighthouseData read_lighthouse_csv(const std::string& path);
void write_lighthouse_csv(std::ostream& out, const LighthouseData& data);

/// Columns: y,x1,...,xd
RegressionDataset read_regression_csv(std::istream& in);
void write_regression_csv(std::ostream& out, const RegressionDataset& data);

}  // namespace mtm
