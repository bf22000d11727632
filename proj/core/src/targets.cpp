#include "mtm/targets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mtm {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * z * z;
}

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace

std::vector<std::string> Target::coordinate_names() const {
  std::vector<std::string> names;
  names.reserve(dim());
  for (std::size_t i = 0; i < dim(); ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

double Target::partial_log_density(const Vector& x, std::size_t i, double xi_new) const {
  Vector copy = x;
  copy[static_cast<Eigen::Index>(i)] = xi_new;
  return log_density(copy);
}

void Target::check_dim(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw std::invalid_argument(name() + ": expected a state of dimension " +
                                std::to_string(dim()) + ", got " + std::to_string(x.size()));
  }
}

double coordinate_log_density(const Target& target, const Vector& x, std::size_t i,
                              double xi_new) {
  if (i >= target.dim()) {
    throw std::out_of_range("coordinate index " + std::to_string(i) + " out of range for " +
                            target.name());
  }
  if (target.supports_coordinate_eval()) return target.partial_log_density(x, i, xi_new);
  return target.Target::partial_log_density(x, i, xi_new);
}

// ---------------------------------------------------------------- banana

BananaTarget::BananaTarget(BananaParams params) : params_(params) {
  require(params_.B >= 0.0, "banana: B must be non-negative");
  require(params_.d >= 2, "banana: dimension must be at least 2");
}

double banana_log_density(const Vector& x, const BananaParams& p) {
  if (static_cast<std::size_t>(x.size()) != p.d) {
    throw std::invalid_argument("banana: dimension mismatch");
  }
  const double r = x[1] + p.B * x[0] * x[0] - 100.0 * p.B;
  double tail = 0.0;
  for (Eigen::Index i = 2; i < x.size(); ++i) tail += x[i] * x[i];
  return -x[0] * x[0] / 200.0 - 0.5 * r * r - 0.5 * tail;
}

double BananaTarget::log_density(const Vector& x) const {
  return banana_log_density(x, params_);
}

Vector BananaTarget::gradient(const Vector& x) const {
  check_dim(x);
  const double B = params_.B;
  const double r = x[1] + B * x[0] * x[0] - 100.0 * B;
  Vector g = -x;
  g[0] = -x[0] / 100.0 - r * 2.0 * B * x[0];
  g[1] = -r;
  return g;
}

double BananaTarget::partial_log_density(const Vector& x, std::size_t i, double xi_new) const {
  if (i >= 2) return -0.5 * xi_new * xi_new;
  const double x1 = i == 0 ? xi_new : x[0];
  const double x2 = i == 1 ? xi_new : x[1];
  const double r = x2 + params_.B * x1 * x1 - 100.0 * params_.B;
  return -x1 * x1 / 200.0 - 0.5 * r * r;
}

// ---------------------------------------------------------------- funnel

FunnelTarget::FunnelTarget(FunnelParams params) : params_(params) {
  require(params_.beta > 0.0, "funnel: beta must be positive");
}

double funnel_log_density(const Vector& state, const FunnelParams& p) {
  if (static_cast<std::size_t>(state.size()) != p.d + 1) {
    throw std::invalid_argument("funnel: dimension mismatch");
  }
  const double y = state[0];
  const double log_scale = y / p.beta;
  const double precision = std::exp(-2.0 * log_scale);
  double lp = normal_log_pdf(y, 0.0, 3.0);
  for (Eigen::Index i = 1; i < state.size(); ++i) {
    lp += -0.5 * kLog2Pi - log_scale - 0.5 * state[i] * state[i] * precision;
  }
  return lp;
}

double FunnelTarget::log_density(const Vector& state) const {
  return funnel_log_density(state, params_);
}

Vector FunnelTarget::gradient(const Vector& state) const {
  check_dim(state);
  const double beta = params_.beta;
  const double precision = std::exp(-2.0 * state[0] / beta);
  Vector g(state.size());
  g[0] = -state[0] / 9.0;
  for (Eigen::Index i = 1; i < state.size(); ++i) {
    g[0] += (-1.0 + state[i] * state[i] * precision) / beta;
    g[i] = -state[i] * precision;
  }
  return g;
}

std::vector<std::string> FunnelTarget::coordinate_names() const {
  std::vector<std::string> names{"y"};
  for (std::size_t i = 1; i <= params_.d; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

double FunnelTarget::partial_log_density(const Vector& state, std::size_t i,
                                         double xi_new) const {
  if (i == 0) return Target::partial_log_density(state, i, xi_new);
  const double log_scale = state[0] / params_.beta;
  return -log_scale - 0.5 * xi_new * xi_new * std::exp(-2.0 * log_scale);
}

// ---------------------------------------------------------------- mixture

MixtureParams MixtureParams::standard(std::size_t d) {
  require(d >= 1, "mixture: dimension must be at least 1");
  MixtureParams p;
  p.d = d;
  const auto n = static_cast<Eigen::Index>(d);
  Vector alternating(n);
  for (Eigen::Index i = 0; i < n; ++i) alternating[i] = (i % 2 == 0) ? 3.0 : -3.0;
  p.component_means = {Vector::Zero(n), Vector::Constant(n, 3.0), Vector::Constant(n, -3.0),
                       alternating, -alternating};
  return p;
}

std::array<double, 5> MixtureParams::normalized_weights() const {
  double total = 0.0;
  for (double w : component_weights) total += w;
  std::array<double, 5> out{};
  for (std::size_t k = 0; k < 5; ++k) out[k] = component_weights[k] / total;
  return out;
}

MixtureTarget::MixtureTarget(MixtureParams params) : params_(std::move(params)) {
  require(params_.d >= 1, "mixture: dimension must be at least 1");
  for (std::size_t k = 0; k < 5; ++k) {
    require(params_.component_weights[k] > 0.0, "mixture: weights must be positive");
    require(static_cast<std::size_t>(params_.component_means[k].size()) == params_.d,
            "mixture: component mean has the wrong dimension");
  }
  const auto w = params_.normalized_weights();
  for (std::size_t k = 0; k < 5; ++k) log_weights_[k] = std::log(w[k]);
}

double MixtureTarget::log_density(const Vector& x) const {
  check_dim(x);
  const double norm = -0.5 * static_cast<double>(params_.d) * kLog2Pi;
  std::array<double, 5> terms{};
  for (std::size_t k = 0; k < 5; ++k) {
    terms[k] = log_weights_[k] + norm - 0.5 * (x - params_.component_means[k]).squaredNorm();
  }
  return log_sum_exp(terms);
}

Vector MixtureTarget::gradient(const Vector& x) const {
  check_dim(x);
  std::array<double, 5> terms{};
  for (std::size_t k = 0; k < 5; ++k) {
    terms[k] = log_weights_[k] - 0.5 * (x - params_.component_means[k]).squaredNorm();
  }
  const double total = log_sum_exp(terms);
  Vector g = Vector::Zero(x.size());
  for (std::size_t k = 0; k < 5; ++k) {
    g += std::exp(terms[k] - total) * (params_.component_means[k] - x);
  }
  return g;
}

double mixture_log_density(const Vector& x, const MixtureParams& params) {
  return MixtureTarget(params).log_density(x);
}

// ---------------------------------------------------------------- regression

RegressionDataset make_regression_dataset(std::uint64_t seed, std::size_t n, double beta0,
                                          const Vector& beta, double sigma) {
  require(n >= 1, "regression: need at least one observation");
  require(sigma >= 0.0, "regression: noise scale must be non-negative");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RegressionDataset data;
  const auto rows = static_cast<Eigen::Index>(n);
  data.X.resize(rows, beta.size());
  data.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) data.X(i, j) = normal(rng);
    const double noise = normal(rng);
    data.y[i] = beta0 + data.X.row(i).dot(beta) + sigma * noise;
  }
  return data;
}

RegressionTarget::RegressionTarget(RegressionDataset data, double coefficient_prior_sd,
                                   InverseGammaPrior sigma_prior)
    : data_(std::move(data)), prior_sd_(coefficient_prior_sd), sigma_prior_(sigma_prior) {
  require(data_.n() > 0, "regression: empty dataset");
  require(static_cast<std::size_t>(data_.y.size()) == data_.n(),
          "regression: X and y disagree on the number of rows");
  require(data_.X.allFinite() && data_.y.allFinite(), "regression: non-finite data");
  require(prior_sd_ > 0.0, "regression: prior sd must be positive");
}

double RegressionTarget::log_density(const Vector& theta) const {
  check_dim(theta);
  if (!theta.allFinite()) throw std::invalid_argument("regression: non-finite parameter");
  const auto d = static_cast<Eigen::Index>(data_.d());
  const double sigma = theta[d + 1];
  if (sigma <= 0.0) return kNegInf;

  const double n = static_cast<double>(data_.n());
  const Vector residual = (data_.y - data_.X * theta.segment(1, d)).array() - theta[0];
  const double loglik =
      -0.5 * n * kLog2Pi - n * std::log(sigma) - 0.5 * residual.squaredNorm() / (sigma * sigma);

  const double var = prior_sd_ * prior_sd_;
  const double coefficient_prior = -0.5 * static_cast<double>(d + 1) * (kLog2Pi + std::log(var)) -
                                   0.5 * theta.head(d + 1).squaredNorm() / var;

  const double a = sigma_prior_.shape;
  const double b = sigma_prior_.scale;
  const double sigma_prior =
      a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(sigma) - b / sigma;

  return loglik + coefficient_prior + sigma_prior;
}

Vector RegressionTarget::gradient(const Vector& theta) const {
  check_dim(theta);
  const auto d = static_cast<Eigen::Index>(data_.d());
  const double sigma = theta[d + 1];
  const Vector residual = (data_.y - data_.X * theta.segment(1, d)).array() - theta[0];
  const double s2 = sigma * sigma;
  const double var = prior_sd_ * prior_sd_;
  Vector g(theta.size());
  g[0] = residual.sum() / s2 - theta[0] / var;
  g.segment(1, d) = data_.X.transpose() * residual / s2 - theta.segment(1, d) / var;
  const double n = static_cast<double>(data_.n());
  g[d + 1] = -n / sigma + residual.squaredNorm() / (s2 * sigma) -
             (sigma_prior_.shape + 1.0) / sigma + sigma_prior_.scale / s2;
  return g;
}

std::vector<std::string> RegressionTarget::coordinate_names() const {
  std::vector<std::string> names{"beta0"};
  for (std::size_t j = 1; j <= data_.d(); ++j) names.push_back("beta" + std::to_string(j));
  names.push_back("sigma");
  return names;
}

double regression_log_posterior(const Vector& theta, const RegressionDataset& data) {
  return RegressionTarget(data).log_density(theta);
}

// ---------------------------------------------------------------- lighthouse

LighthouseTarget::LighthouseTarget(LighthouseData data, LighthouseBox box)
    : data_(data), box_(box) {
  require(box_.x0_min < box_.x0_max && box_.y_max > 0.0, "lighthouse: empty prior box");
}

double lighthouse_log_posterior(const Vector& theta, const LighthouseData& data,
                                const LighthouseBox& box) {
  if (theta.size() != 2) throw std::invalid_argument("lighthouse: dimension mismatch");
  const double x0 = theta[0];
  const double y = theta[1];
  if (!(y > 0.0) || y > box.y_max || x0 < box.x0_min || x0 > box.x0_max) return kNegInf;
  double lp = 0.0;
  for (double flash : data.flashes) {
    const double dx = flash - x0;
    lp += std::log(y / std::numbers::pi) - std::log(y * y + dx * dx);
  }
  return lp;
}

double LighthouseTarget::log_density(const Vector& theta) const {
  return lighthouse_log_posterior(theta, data_, box_);
}

Vector LighthouseTarget::gradient(const Vector& theta) const {
  check_dim(theta);
  const double x0 = theta[0];
  const double y = theta[1];
  Vector g = Vector::Zero(2);
  for (double flash : data_.flashes) {
    const double dx = flash - x0;
    const double denom = y * y + dx * dx;
    g[0] += 2.0 * dx / denom;
    g[1] += 1.0 / y - 2.0 * y / denom;
  }
  return g;
}

std::vector<std::string> LighthouseTarget::coordinate_names() const { return {"x0", "y"}; }

// ---------------------------------------------------------------- eight schools

EightSchoolsData EightSchoolsData::rubin() {
  return {{28, 8, -3, 7, -1, 1, 18, 12}, {15, 10, 16, 11, 9, 11, 10, 18}};
}

EightSchoolsTarget::EightSchoolsTarget(EightSchoolsData data) : data_(std::move(data)) {
  require(data_.effects.size() == 8 && data_.sds.size() == 8,
          "eight-schools: expected exactly 8 effects and 8 standard deviations");
  for (double s : data_.sds) require(s > 0.0, "eight-schools: standard deviations must be positive");
}

double eight_schools_log_posterior(const Vector& theta, const EightSchoolsData& data) {
  return EightSchoolsTarget(data).log_density(theta);
}

double EightSchoolsTarget::log_density(const Vector& theta) const {
  check_dim(theta);
  const double mu = theta[0];
  const double tau = theta[1];
  if (!(tau > 0.0)) return kNegInf;
  double lp = normal_log_pdf(mu, 0.0, 5.0);
  lp += -std::log(std::numbers::pi * 5.0) - std::log1p((tau / 5.0) * (tau / 5.0));
  for (std::size_t i = 0; i < 8; ++i) {
    const double t = theta[static_cast<Eigen::Index>(i) + 2];
    lp += normal_log_pdf(t, mu, tau) + normal_log_pdf(data_.effects[i], t, data_.sds[i]);
  }
  return lp;
}

Vector EightSchoolsTarget::gradient(const Vector& theta) const {
  check_dim(theta);
  const double mu = theta[0];
  const double tau = theta[1];
  const double tau2 = tau * tau;
  Vector g(10);
  g[0] = -mu / 25.0;
  g[1] = -2.0 * tau / (25.0 + tau2);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto k = static_cast<Eigen::Index>(i) + 2;
    const double dev = theta[k] - mu;
    g[0] += dev / tau2;
    g[1] += -1.0 / tau + dev * dev / (tau2 * tau);
    g[k] = -dev / tau2 + (data_.effects[i] - theta[k]) / (data_.sds[i] * data_.sds[i]);
  }
  return g;
}

std::vector<std::string> EightSchoolsTarget::coordinate_names() const {
  std::vector<std::string> names{"mu", "tau"};
  for (int i = 1; i <= 8; ++i) names.push_back("theta" + std::to_string(i));
  return names;
}

double EightSchoolsTarget::partial_log_density(const Vector& theta, std::size_t i,
                                               double xi_new) const {
  if (i < 2) return Target::partial_log_density(theta, i, xi_new);
  const std::size_t school = i - 2;
  return normal_log_pdf(xi_new, theta[0], theta[1]) +
         normal_log_pdf(data_.effects[school], xi_new, data_.sds[school]);
}

// ---------------------------------------------------------------- gaussian

GaussianTarget::GaussianTarget(std::size_t d) : d_(d) {
  require(d >= 1, "gaussian: dimension must be at least 1");
}

double GaussianTarget::log_density(const Vector& x) const {
  check_dim(x);
  return -0.5 * static_cast<double>(d_) * kLog2Pi - 0.5 * x.squaredNorm();
}

Vector GaussianTarget::gradient(const Vector& x) const {
  check_dim(x);
  return -x;
}

double GaussianTarget::partial_log_density(const Vector&, std::size_t, double xi_new) const {
  return -0.5 * xi_new * xi_new;
}

}  // namespace mtm
