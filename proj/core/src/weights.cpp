#include "mtm/weights.hpp"

#include <charconv>
#include <cmath>

namespace mtm {

std::string to_string(const WeightSpec& spec) {
  switch (spec.kind) {
    case WeightKind::kConstant: return "constant";
    case WeightKind::kImportance: return "importance";
    case WeightKind::kProportional: return "proportional";
    case WeightKind::kLocallyBalanced: return "locally-balanced";
    case WeightKind::kJumpDistance: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), spec.alpha);
      return "jump-distance(" + std::string(buf, res.ptr) + ")";
    }
  }
  return "unknown";
}

WeightSpec parse_weight_spec(std::string_view text) {
  if (text == "constant") return {WeightKind::kConstant};
  if (text == "importance") return {WeightKind::kImportance};
  if (text == "proportional") return {WeightKind::kProportional};
  if (text == "locally-balanced") return {WeightKind::kLocallyBalanced};
  constexpr std::string_view jump = "jump-distance";
  if (text.substr(0, jump.size()) == jump) {
    auto rest = text.substr(jump.size());
    if (rest.empty()) return {WeightKind::kJumpDistance, 3.0};
    if (rest.front() == '(' && rest.back() == ')') {
      rest = rest.substr(1, rest.size() - 2);
      double alpha = 0.0;
      const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), alpha);
      if (res.ec == std::errc() && res.ptr == rest.data() + rest.size() && std::isfinite(alpha)) {
        return {WeightKind::kJumpDistance, alpha};
      }
    }
  }
  throw ConfigError("unknown weight function '" + std::string(text) + "'");
}

double log_weight(const WeightSpec& spec, std::span<const double> y, std::span<const double> x,
                  double log_pi_y, double log_T_y_given_x, double log_T_x_given_y) {
  if (log_pi_y == kNegInf) return kNegInf;
  switch (spec.kind) {
    case WeightKind::kConstant: return log_pi_y + log_T_x_given_y;
    case WeightKind::kImportance: return log_pi_y - log_T_y_given_x;
    case WeightKind::kProportional: return log_pi_y;
    case WeightKind::kLocallyBalanced: return 0.5 * log_pi_y;
    case WeightKind::kJumpDistance: {
      double sq = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) sq += (y[i] - x[i]) * (y[i] - x[i]);
      if (sq == 0.0) return spec.alpha > 0.0 ? kNegInf : (spec.alpha == 0.0 ? log_pi_y : kInf);
      return log_pi_y + 0.5 * spec.alpha * std::log(sq);
    }
  }
  return kNegInf;
}

std::vector<double> selection_log_probs(std::span<const double> log_weights) {
  const double total = log_sum_exp(log_weights);
  if (total == kNegInf) throw ZeroWeightError("every candidate has zero weight");
  std::vector<double> out(log_weights.begin(), log_weights.end());
  for (double& v : out) v -= total;
  return out;
}

std::size_t sample_candidate(std::span<const double> log_probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t m = 0; m < log_probs.size(); ++m) {
    const double p = std::exp(log_probs[m]);
    if (p > 0.0) last_positive = m;
    cumulative += p;
    if (u < cumulative) return m;
  }
  // Rounding left the cumulative sum just below u.
  return last_positive;
}

bool is_restricted_form(const WeightSpec& spec, bool proposal_symmetric) {
  switch (spec.kind) {
    case WeightKind::kConstant: return true;
    case WeightKind::kImportance: return true;
    case WeightKind::kProportional: return proposal_symmetric;
    case WeightKind::kJumpDistance: return proposal_symmetric;
    case WeightKind::kLocallyBalanced: return false;
  }
  return false;
}

}  // namespace mtm
