#include "mtm/proposals.hpp"

#include <cmath>

namespace mtm {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// log2-spaced ladder centred on 1: 2^(m - (M - 1) / 2) for m = 0..M-1.
double centred_ladder(std::size_t m, std::size_t M) {
  return std::exp2(static_cast<double>(m) - 0.5 * static_cast<double>(M - 1));
}

}  // namespace

std::string to_string(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::kHomFull: return "hom-full";
    case ProposalKind::kHetFull: return "het-full";
    case ProposalKind::kHomCW: return "hom-cw";
    case ProposalKind::kHetCW: return "het-cw";
  }
  return "unknown";
}

ProposalKind parse_proposal_kind(std::string_view text) {
  if (text == "hom-full") return ProposalKind::kHomFull;
  if (text == "het-full") return ProposalKind::kHetFull;
  if (text == "hom-cw") return ProposalKind::kHomCW;
  if (text == "het-cw") return ProposalKind::kHetCW;
  throw ConfigError("unknown proposal kind '" + std::string(text) +
                    "' (expected hom-full, het-full, hom-cw or het-cw)");
}

bool is_component_wise(ProposalKind kind) {
  return kind == ProposalKind::kHomCW || kind == ProposalKind::kHetCW;
}

std::string to_string(CovarianceRule rule) {
  return rule == CovarianceRule::kRobbinsMonro ? "robbins-monro" : "literal";
}

CovarianceRule parse_covariance_rule(std::string_view text) {
  if (text == "robbins-monro") return CovarianceRule::kRobbinsMonro;
  if (text == "literal") return CovarianceRule::kLiteral;
  throw ConfigError("unknown covariance rule '" + std::string(text) + "'");
}

void ProposalConfig::validate() const {
  if (M == 0) throw ConfigError("proposal: M must be at least 1");
  if (kind == ProposalKind::kHetCW && M < 2) {
    throw ConfigError("proposal: het-cw needs M >= 2 for its selection-rate adaptation");
  }
  if (!(scaling > 0.0)) throw ConfigError("proposal: scaling must be positive");
  if (!(het_spread > 0.0)) throw ConfigError("proposal: het_spread must be positive");
  if (!(initial_variance > 0.0)) throw ConfigError("proposal: initial variance must be positive");
  if (beta_period == 0) throw ConfigError("proposal: adaptation period must be positive");
  if (eps_exp > L_exp) throw ConfigError("proposal: empty sigma bounds");
}

// ---------------------------------------------------------------- adaptive metropolis

AdaptiveState AdaptiveState::initial(std::size_t dim, std::size_t n0, CovarianceRule rule,
                                     bool diagonal, double initial_variance) {
  AdaptiveState s;
  const auto d = static_cast<Eigen::Index>(dim);
  s.covariance = Matrix::Identity(d, d) * initial_variance;
  s.mean = Vector::Zero(d);
  s.n0 = n0;
  s.rule = rule;
  s.diagonal = diagonal;
  return s;
}

void adapt_metropolis(AdaptiveState& state, const Vector& x, std::size_t n) {
  if (n <= state.n0) return;
  const double gamma = std::pow(static_cast<double>(n), -0.6);
  const Vector residual = x - state.mean;
  const bool decay = state.rule == CovarianceRule::kRobbinsMonro;
  if (state.diagonal) {
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      double& v = state.covariance(i, i);
      v += gamma * (residual[i] * residual[i] - (decay ? v : 0.0));
    }
  } else {
    Matrix update = residual * residual.transpose();
    if (decay) update -= state.covariance;
    state.covariance += gamma * update;
    // Keep exact symmetry against rounding drift.
    state.covariance = 0.5 * (state.covariance + state.covariance.transpose()).eval();
  }
  state.mean += gamma * residual;
}

// ---------------------------------------------------------------- balanced selection rate

BalancedState BalancedState::initial(std::size_t dim, std::size_t M, std::size_t beta_period,
                                     int eps_exp, int L_exp) {
  BalancedState s;
  const auto d = static_cast<Eigen::Index>(dim);
  const auto m = static_cast<Eigen::Index>(M);
  s.sigmas.resize(d, m);
  s.counters = decltype(s.counters)::Zero(d, m);
  s.beta_period = beta_period;
  s.eps_exp = eps_exp;
  s.L_exp = L_exp;
  const double lo = std::exp2(eps_exp);
  const double hi = std::exp2(L_exp);
  for (Eigen::Index j = 0; j < m; ++j) {
    s.sigmas.col(j).setConstant(std::clamp(centred_ladder(static_cast<std::size_t>(j), M), lo, hi));
  }
  return s;
}

double BalancedState::selection_rate(std::size_t i, std::size_t m) const {
  const auto row = static_cast<Eigen::Index>(i);
  const std::uint64_t total = counters.row(row).sum();
  if (total == 0) return 0.0;
  return static_cast<double>(counters(row, static_cast<Eigen::Index>(m))) /
         static_cast<double>(total);
}

void BalancedState::respace(std::size_t i) {
  const auto row = static_cast<Eigen::Index>(i);
  const Eigen::Index M = sigmas.cols();
  if (M < 2) return;
  const double lo = std::log2(sigmas(row, 0));
  const double hi = std::log2(sigmas(row, M - 1));
  for (Eigen::Index m = 1; m + 1 < M; ++m) {
    sigmas(row, m) = std::exp2(lo + (hi - lo) * static_cast<double>(m) / static_cast<double>(M - 1));
  }
}

void record_selection(BalancedState& state, std::size_t i, std::size_t m) {
  state.counters(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) += 1;
}

bool adapt_balanced(BalancedState& state, std::size_t n, Rng& rng) {
  const std::size_t M = state.size();
  if (M < 2) throw ConfigError("balanced selection rate needs M >= 2");
  if (n % state.beta_period != 0) return false;
  const double a = (static_cast<double>(n) - static_cast<double>(state.beta_period)) /
                   static_cast<double>(state.beta_period);
  if (!(a > 0.0)) return false;
  const double p = std::max(std::pow(0.99, a - 1.0), 1.0 / std::sqrt(a));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (!(unif(rng) < p)) return false;

  const double lo = std::exp2(state.eps_exp);
  const double hi = std::exp2(state.L_exp);
  const double high_rate = 2.0 / static_cast<double>(M);
  const double low_rate = 1.0 / (2.0 * static_cast<double>(M));
  const auto last = static_cast<Eigen::Index>(M - 1);

  for (std::size_t i = 0; i < state.dim(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (state.counters.row(row).sum() == 0) continue;
    const double rate_last = state.selection_rate(i, M - 1);
    const double rate_first = state.selection_rate(i, 0);
    double& s_first = state.sigmas(row, 0);
    double& s_last = state.sigmas(row, last);

    if (rate_last > high_rate) {
      s_last = std::min(2.0 * s_last, hi);
      state.respace(i);
    } else if (rate_last < low_rate && s_last / 2.0 > s_first) {
      s_last = std::max(s_last / 2.0, lo);
      state.respace(i);
    }
    if (rate_first > high_rate) {
      s_first = std::max(s_first / 2.0, lo);
      state.respace(i);
    } else if (rate_first < low_rate && 2.0 * s_first < s_last) {
      s_first = std::min(2.0 * s_first, hi);
      state.respace(i);
    }
  }
  state.counters.setZero();
  return true;
}

// ---------------------------------------------------------------- proposal family

Proposal::Proposal(ProposalConfig config, std::size_t dim) : config_(config), dim_(dim) {
  config_.validate();
  if (dim_ == 0) throw ConfigError("proposal: dimension must be positive");
  if (config_.kind == ProposalKind::kHetCW) {
    state_ = BalancedState::initial(dim_, config_.M, config_.beta_period, config_.eps_exp,
                                    config_.L_exp);
  } else {
    state_ = AdaptiveState::initial(dim_, config_.n0, config_.rule,
                                    config_.kind == ProposalKind::kHomCW,
                                    config_.initial_variance);
  }
  const double c = config_.scaling / std::sqrt(static_cast<double>(dim_));
  scales_.resize(config_.M);
  for (std::size_t m = 0; m < config_.M; ++m) {
    scales_[m] = config_.kind == ProposalKind::kHetFull
                     ? c * std::pow(centred_ladder(m, config_.M), config_.het_spread)
                     : c;
  }
  refresh();
}

double Proposal::candidate_scale(std::size_t m) const { return scales_.at(m); }

void Proposal::refresh() {
  const auto* adaptive = adaptive_state();
  if (adaptive == nullptr) return;
  Eigen::LLT<Matrix> llt(adaptive->covariance);
  if (llt.info() != Eigen::Success) {
    throw AdaptationError("proposal covariance is not positive definite");
  }
  cholesky_ = llt.matrixL();
  log_det_ = 2.0 * cholesky_.diagonal().array().log().sum();
  if (!std::isfinite(log_det_)) throw AdaptationError("proposal covariance is degenerate");
}

Vector Proposal::draw(std::size_t m, const Vector& from, Rng& rng) const {
  if (balanced_state() != nullptr) throw ConfigError("het-cw has no full-vector proposal");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(from.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return from + std::sqrt(scales_[m]) * (cholesky_ * z);
}

std::vector<Vector> Proposal::propose_candidates(const Vector& x, Rng& rng) const {
  std::vector<Vector> out;
  out.reserve(config_.M);
  for (std::size_t m = 0; m < config_.M; ++m) out.push_back(draw(m, x, rng));
  return out;
}

double Proposal::log_density(std::size_t m, const Vector& from, const Vector& to) const {
  if (balanced_state() != nullptr) throw ConfigError("het-cw has no full-vector proposal");
  const Vector w = cholesky_.triangularView<Eigen::Lower>().solve(to - from);
  const double d = static_cast<double>(dim_);
  const double s = scales_[m];
  return -0.5 * d * kLog2Pi - 0.5 * (d * std::log(s) + log_det_) - 0.5 * w.squaredNorm() / s;
}

double Proposal::coordinate_sd(std::size_t i, std::size_t m) const {
  if (const auto* balanced = balanced_state()) {
    return balanced->sigmas(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
  }
  const auto* adaptive = adaptive_state();
  const auto k = static_cast<Eigen::Index>(i);
  return std::sqrt(scales_[m] * adaptive->covariance(k, k));
}

double Proposal::draw_coordinate(std::size_t i, std::size_t m, double from, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  return from + coordinate_sd(i, m) * normal(rng);
}

std::vector<double> Proposal::propose_coordinate(std::size_t i, double from, Rng& rng) const {
  std::vector<double> out;
  out.reserve(config_.M);
  for (std::size_t m = 0; m < config_.M; ++m) out.push_back(draw_coordinate(i, m, from, rng));
  return out;
}

double Proposal::coordinate_log_density(std::size_t i, std::size_t m, double from,
                                        double to) const {
  const double sd = coordinate_sd(i, m);
  const double z = (to - from) / sd;
  return -0.5 * kLog2Pi - std::log(sd) - 0.5 * z * z;
}

void Proposal::record_selection(std::size_t i, std::size_t m) {
  if (auto* balanced = balanced_state()) mtm::record_selection(*balanced, i, m);
}

void Proposal::adapt(const Vector& x, std::size_t n, Rng& rng) {
  if (!config_.adapt) return;
  if (auto* balanced = balanced_state()) {
    adapt_balanced(*balanced, n, rng);
    return;
  }
  auto* adaptive = adaptive_state();
  if (n <= adaptive->n0) return;
  adapt_metropolis(*adaptive, x, n);
  if (adaptive->diagonal) {
    if (!(adaptive->covariance.diagonal().array() > 0.0).all()) {
      throw AdaptationError("component-wise proposal variance collapsed to zero");
    }
  }
  refresh();
}

std::vector<std::string> Proposal::trace_columns() const {
  std::vector<std::string> cols;
  if (const auto* balanced = balanced_state()) {
    for (std::size_t i = 0; i < balanced->dim(); ++i) {
      for (std::size_t m = 0; m < balanced->size(); ++m) {
        cols.push_back("sigma_" + std::to_string(i + 1) + "_" + std::to_string(m + 1));
      }
    }
  } else {
    for (std::size_t i = 0; i < dim_; ++i) cols.push_back("cov_" + std::to_string(i + 1));
  }
  return cols;
}

std::vector<double> Proposal::trace_values() const {
  std::vector<double> values;
  if (const auto* balanced = balanced_state()) {
    for (Eigen::Index i = 0; i < balanced->sigmas.rows(); ++i) {
      for (Eigen::Index m = 0; m < balanced->sigmas.cols(); ++m) {
        values.push_back(balanced->sigmas(i, m));
      }
    }
  } else {
    const auto& cov = adaptive_state()->covariance;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) values.push_back(cov(i, i));
  }
  return values;
}

}  // namespace mtm
