#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtm/common.hpp"
#include "mtm/kernel.hpp"
#include "mtm/proposals.hpp"
#include "mtm/targets.hpp"
#include "mtm/weights.hpp"

namespace mtm {

/// One named block of an extended state.
struct ExtendedBlock {
  std::string role;
  std::size_t size = 0;
  bool continuous = true;
};

/// An extended state space with its joint density and involution. Points are
/// flat vectors laid out block by block; discrete blocks hold integer codes.
struct ExtendedSpaceSpec {
  std::vector<ExtendedBlock> blocks;
  std::function<double(const Vector&)> log_joint;
  std::function<Vector(const Vector&)> involution;

  std::size_t size() const;
  std::vector<std::size_t> continuous_indices() const;
  /// Name of the block that owns flat index k.
  const std::string& role_of(std::size_t k) const;
};

struct CheckResult {
  std::string check;
  double max_violation = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  void add(CheckResult result) { checks.push_back(std::move(result)); }
};

void write_report_text(std::ostream& out, const VerificationReport& report);
/// CSV columns: check,max_violation,passed
void write_report_csv(std::ostream& out, const VerificationReport& report);

// ---------------------------------------------------------------- continuous checks

/// Max |g(g(p)) - p| over the samples; fails above `tolerance` and names the
/// block holding the worst entry.
CheckResult check_involution(const ExtendedSpaceSpec& spec, std::span<const Vector> samples,
                             double tolerance = 1e-12);

/// log |det| of the Jacobian of g restricted to the continuous blocks, by
/// central differences with step 1e-5 * max(1, |coordinate|).
/// Throws DegenerateTransformError when the Jacobian is singular.
double jacobian_log_abs(const ExtendedSpaceSpec& spec, const Vector& point);

/// log pi~(g(p)) - log pi~(p) + log |J|, unclamped.
/// Throws UndefinedRatioError when both densities are zero.
double acceptance_log_ratio_from_spec(const ExtendedSpaceSpec& spec, const Vector& point);

/// min(1, exp(acceptance_log_ratio_from_spec)).
double acceptance_from_spec(const ExtendedSpaceSpec& spec, const Vector& point);

/// [x, y] with pi~ = pi(x) T(y|x) and g swapping the two blocks.
/// Uses candidate 0 of `proposal`.
ExtendedSpaceSpec mh_extended_spec(std::shared_ptr<const Target> target,
                                   std::shared_ptr<const Proposal> proposal);

/// [x, y_1..y_M, J, x*_{-J}] with
/// pi~ = pi(x) prod_m T_m(y_m|x) p(J|y, x) prod_{m != J} T_m(x*_m|y_J)
/// and g exchanging y_J with x and the other candidates with their reverse
/// counterparts. J is stored 0-based.
ExtendedSpaceSpec mtm_extended_spec(std::shared_ptr<const Target> target,
                                    std::shared_ptr<const Proposal> proposal, WeightSpec weight);

/// Draws an MTM extended point from pi~ given x: candidates, selection and
/// reverse samples exactly as one kernel step would. Returns an empty vector
/// when every candidate weight is zero.
Vector sample_mtm_extended_point(const Target& target, const Proposal& proposal,
                                 const WeightSpec& weight, const Vector& x, Rng& rng);

/// One-dimensional g(x) = c / x on x > 0 with an exponential log-joint; its
/// Jacobian is not a permutation, so it exercises the finite-difference path.
ExtendedSpaceSpec reciprocal_extended_spec(double c);

// ---------------------------------------------------------------- discrete kernels

/// A target and candidate proposals on a finite set of points.
struct DiscreteKernelSpec {
  std::vector<Vector> states;
  Vector target_probs;
  /// One stochastic matrix per candidate; a single matrix is shared by all candidates.
  std::vector<Matrix> proposal_probs;

  std::size_t size() const { return states.size(); }
  const Matrix& proposal(std::size_t m) const {
    return proposal_probs.size() == 1 ? proposal_probs.front() : proposal_probs.at(m);
  }
  /// Every T_m equals its transpose.
  bool symmetric() const;
  /// Throws ConfigError when pi or any T_m is not a probability table of the right shape.
  void validate() const;
};

/// Five points 0..4 with T(i -> i +- 1) = 1/2; a move off either end stays put.
DiscreteKernelSpec line_walk_spec(const Vector& target_probs);

/// Exact transition matrix of one MTM step, summing over every candidate
/// tuple, selection, reverse tuple and the accept/reject outcome.
/// Bounded to |states| <= 12 and M <= 3.
Matrix enumerate_mtm_transition_matrix(const DiscreteKernelSpec& spec, std::size_t M,
                                       const WeightSpec& weight,
                                       AcceptancePath path = AcceptancePath::kRestrictedAuto);

/// max_{i,j} |pi_i P_ij - pi_j P_ji| < tolerance.
CheckResult check_detailed_balance(const Matrix& P, const Vector& pi, double tolerance = 1e-10);
/// max_j |(pi P)_j - pi_j| < tolerance.
CheckResult check_stationarity(const Matrix& P, const Vector& pi, double tolerance = 1e-10);
/// max_i |sum_j P_ij - 1| < tolerance.
CheckResult check_row_sums(const Matrix& P, double tolerance = 1e-12);

/// Sums pi~ over y_{1:M}, J and x*_{-J} for every x and compares with pi(x).
CheckResult check_marginality(const DiscreteKernelSpec& spec, std::size_t M,
                              const WeightSpec& weight, double tolerance = 1e-10);

/// Every built-in check: involutions, Jacobian and ratio reciprocity on random
/// extended points, and the exact discrete oracles for all weight kinds,
/// M = 1, 2, 3 and two targets on the five-point line.
VerificationReport run_verification_suite(std::uint64_t seed = 1, std::size_t n_points = 1000);

}  // namespace mtm
