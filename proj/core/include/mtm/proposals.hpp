#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>

#include "mtm/common.hpp"

namespace mtm {

/// Homogeneous/Heterogeneous candidates crossed with Full/Component-wise moves.
enum class ProposalKind { kHomFull, kHetFull, kHomCW, kHetCW };

/// "hom-full", "het-full", "hom-cw", "het-cw".
std::string to_string(ProposalKind kind);
ProposalKind parse_proposal_kind(std::string_view text);
bool is_component_wise(ProposalKind kind);

/// How the adaptive-Metropolis covariance absorbs a new state.
enum class CovarianceRule {
  /// Sigma += gamma * ((x - mu)(x - mu)^T - Sigma)
  kRobbinsMonro,
  /// Sigma += gamma * (x - mu)(x - mu)^T, with no decay term. Grows without bound.
  kLiteral,
};

std::string to_string(CovarianceRule rule);
CovarianceRule parse_covariance_rule(std::string_view text);

struct ProposalConfig {
  ProposalKind kind = ProposalKind::kHomFull;
  std::size_t M = 1;
  /// Covariance multiplier is scaling / sqrt(d).
  double scaling = 2.38;
  /// Multiplier on the log2 spacing of the heterogeneous-full scale ladder.
  double het_spread = 1.0;
  bool adapt = true;

  // Adaptive Metropolis (hom-full, het-full, hom-cw)
  CovarianceRule rule = CovarianceRule::kRobbinsMonro;
  std::size_t n0 = 100;
  double initial_variance = 1.0;

  // Balanced selection rate (het-cw)
  std::size_t beta_period = 100;
  int eps_exp = -15;
  int L_exp = 50;

  /// Throws ConfigError for M = 0, het-cw with M < 2, or non-positive scales.
  void validate() const;
};

/// Adaptive Metropolis state: proposal covariance and running mean.
/// With `diagonal` set only per-coordinate variances are tracked (hom-cw).
struct AdaptiveState {
  Matrix covariance;
  Vector mean;
  std::size_t n0 = 100;
  CovarianceRule rule = CovarianceRule::kRobbinsMonro;
  bool diagonal = false;

  static AdaptiveState initial(std::size_t dim, std::size_t n0, CovarianceRule rule,
                               bool diagonal, double initial_variance = 1.0);
};

/// One adaptive-Metropolis update with learning rate gamma = n^-0.6.
///
/// Identity for n <= n0. Otherwise the covariance is updated first with the
/// residual against the pre-update mean, then the mean moves toward x.
void adapt_metropolis(AdaptiveState& state, const Vector& x, std::size_t n);

/// Per-coordinate, per-candidate standard deviation ladder with selection counts.
///
/// Invariants: 2^eps_exp <= sigmas(i, m) <= 2^L_exp and each row is equally
/// spaced on the log2 scale.
struct BalancedState {
  Matrix sigmas;  ///< d x M
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> counters;  ///< d x M
  std::size_t beta_period = 100;
  int eps_exp = -15;
  int L_exp = 50;

  /// Centered ladder sigma(i, m) = 2^(m - (M - 1) / 2), m = 0..M-1, clamped.
  static BalancedState initial(std::size_t dim, std::size_t M, std::size_t beta_period = 100,
                               int eps_exp = -15, int L_exp = 50);

  std::size_t dim() const { return static_cast<std::size_t>(sigmas.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(sigmas.cols()); }

  /// Selection rate of candidate m for coordinate i since the last reset;
  /// zero when nothing has been recorded.
  double selection_rate(std::size_t i, std::size_t m) const;

  /// Re-spaces row i between its current endpoints, equally on the log2 scale.
  void respace(std::size_t i);
};

void record_selection(BalancedState& state, std::size_t i, std::size_t m);

/// Balanced-selection-rate adaptation. Acts only when n is a multiple of the
/// period, a = (n - period) / period > 0 and U < max(0.99^(a-1), a^(-1/2)).
/// Resets the counters after acting. Returns true when an adaptation happened.
bool adapt_balanced(BalancedState& state, std::size_t n, Rng& rng);

/// A Gaussian random-walk family of M candidate proposals together with its
/// adaptation state.
///
/// Full kinds propose whole vectors: candidate m ~ N(x, s_m * c * Sigma) with
/// c = scaling / sqrt(d), s_m = 1 (hom-full) or 2^(het_spread * (m - (M - 1) / 2))
/// (het-full, m = 0..M-1). Component-wise kinds propose one coordinate at a
/// time: N(x_i, c * Sigma_ii) for hom-cw and N(x_i, sigma(i, m)^2) for het-cw.
class Proposal {
 public:
  Proposal(ProposalConfig config, std::size_t dim);

  const ProposalConfig& config() const { return config_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return config_.M; }
  bool component_wise() const { return is_component_wise(config_.kind); }
  /// Every family here is a Gaussian random walk.
  bool symmetric() const { return true; }

  /// Multiplier s_m * c applied to Sigma for full candidate m.
  double candidate_scale(std::size_t m) const;

  // Full-vector moves.
  Vector draw(std::size_t m, const Vector& from, Rng& rng) const;
  std::vector<Vector> propose_candidates(const Vector& x, Rng& rng) const;
  double log_density(std::size_t m, const Vector& from, const Vector& to) const;

  // Component-wise moves on coordinate i.
  double coordinate_sd(std::size_t i, std::size_t m) const;
  double draw_coordinate(std::size_t i, std::size_t m, double from, Rng& rng) const;
  std::vector<double> propose_coordinate(std::size_t i, double from, Rng& rng) const;
  double coordinate_log_density(std::size_t i, std::size_t m, double from, double to) const;

  /// Counts a het-cw selection; no-op for the other kinds.
  void record_selection(std::size_t i, std::size_t m);

  /// Runs the configured adaptation after a full kernel application at
  /// iteration n (1-based) that ended in state x.
  void adapt(const Vector& x, std::size_t n, Rng& rng);

  const AdaptiveState* adaptive_state() const { return std::get_if<AdaptiveState>(&state_); }
  const BalancedState* balanced_state() const { return std::get_if<BalancedState>(&state_); }
  AdaptiveState* adaptive_state() { return std::get_if<AdaptiveState>(&state_); }
  BalancedState* balanced_state() { return std::get_if<BalancedState>(&state_); }

  /// Re-factorizes the covariance after external edits of the adaptive state.
  void refresh();

  /// Column names and current values for the adaptation trace.
  std::vector<std::string> trace_columns() const;
  std::vector<double> trace_values() const;

 private:
  ProposalConfig config_;
  std::size_t dim_;
  std::variant<AdaptiveState, BalancedState> state_;
  Matrix cholesky_;         ///< lower factor of Sigma (full kinds)
  double log_det_ = 0.0;    ///< log |Sigma|
  std::vector<double> scales_;
};

}  // namespace mtm
