#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtm/common.hpp"

namespace mtm {

enum class WeightKind { kConstant, kImportance, kProportional, kLocallyBalanced, kJumpDistance };

/// Candidate weight function u(y, x), evaluated in log space.
///
///   constant          pi(y) T(x|y)
///   importance        pi(y) / T(y|x)
///   proportional      pi(y)
///   locally-balanced  sqrt(pi(y))
///   jump-distance     pi(y) ||y - x||^alpha
struct WeightSpec {
  WeightKind kind = WeightKind::kProportional;
  double alpha = 3.0;  ///< jump-distance exponent
};

/// "constant", "importance", "proportional", "locally-balanced", "jump-distance(alpha)".
std::string to_string(const WeightSpec& spec);
/// Accepts the forms produced by `to_string`; a bare "jump-distance" uses alpha = 3.
WeightSpec parse_weight_spec(std::string_view text);

/// Log weight of candidate y proposed from x.
///
/// `y` and `x` are only read by the jump-distance weight; for component-wise
/// moves pass the single active coordinate of each. A zero jump gets weight
/// -inf when alpha > 0. -inf target values propagate to -inf weights.
double log_weight(const WeightSpec& spec, std::span<const double> y, std::span<const double> x,
                  double log_pi_y, double log_T_y_given_x, double log_T_x_given_y);

/// Log of the normalized selection probabilities (log-softmax).
/// Throws ZeroWeightError when every entry is -inf.
std::vector<double> selection_log_probs(std::span<const double> log_weights);

/// Categorical draw from log-probabilities produced by `selection_log_probs`.
std::size_t sample_candidate(std::span<const double> log_probs, Rng& rng);

/// True when the weight can be written pi(y) T(x|y) lambda(y, x) with a
/// symmetric lambda, so the acceptance ratio reduces to a ratio of weight sums.
bool is_restricted_form(const WeightSpec& spec, bool proposal_symmetric);

}  // namespace mtm
