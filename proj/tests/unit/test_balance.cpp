#include <cmath>
#include <memory>
#include <sstream>

#include <gtest/gtest.h>

#include "mtm/balance.hpp"
#include "test_support.hpp"

namespace mtm {
namespace {

const WeightSpec kAllWeights[] = {{WeightKind::kConstant},
                                  {WeightKind::kImportance},
                                  {WeightKind::kProportional},
                                  {WeightKind::kLocallyBalanced},
                                  {WeightKind::kJumpDistance, 3.0}};

Vector uniform_pi() { return Vector::Constant(5, 0.2); }

Vector uneven_pi() {
  Vector pi(5);
  pi << 0.4, 0.1, 0.2, 0.1, 0.2;
  return pi;
}

std::shared_ptr<const Proposal> full_proposal(ProposalKind kind, std::size_t M, std::size_t d) {
  ProposalConfig c;
  c.kind = kind;
  c.M = M;
  c.adapt = false;
  return std::make_shared<Proposal>(c, d);
}

/// Independent Metropolis-Hastings matrix for a single proposal table.
Matrix mh_matrix(const Vector& pi, const Matrix& T) {
  const auto n = pi.size();
  Matrix P = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || T(i, j) == 0.0) continue;
      P(i, j) = T(i, j) * std::min(1.0, pi[j] * T(j, i) / (pi[i] * T(i, j)));
    }
    P(i, i) = 1.0 - P.row(i).sum();
  }
  return P;
}

ExtendedSpaceSpec shift_spec() {
  ExtendedSpaceSpec s;
  s.blocks = {{"x", 1, true}};
  s.log_joint = [](const Vector& p) { return -0.5 * p[0] * p[0]; };
  s.involution = [](const Vector& p) { return Vector::Constant(1, p[0] + 1.0); };
  return s;
}

TEST(LineWalk, ReflectingProposal) {
  const auto spec = line_walk_spec(uneven_pi());
  spec.validate();
  const Matrix& T = spec.proposal(0);
  EXPECT_DOUBLE_EQ(T(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(T(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(T(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(T(2, 3), 0.5);
  EXPECT_DOUBLE_EQ(T(4, 4), 0.5);
  EXPECT_TRUE(spec.symmetric());
}

TEST(Enumeration, SingleCandidateIsMetropolisHastings) {
  for (const Vector& pi : {uniform_pi(), uneven_pi()}) {
    const auto spec = line_walk_spec(pi);
    const Matrix expected = mh_matrix(pi, spec.proposal(0));
    for (const auto& w : kAllWeights) {
      const Matrix P = enumerate_mtm_transition_matrix(spec, 1, w);
      EXPECT_LT((P - expected).cwiseAbs().maxCoeff(), 1e-14) << to_string(w);
    }
  }
}

TEST(Enumeration, UniformTargetGivesSymmetricMatrix) {
  const auto spec = line_walk_spec(uniform_pi());
  for (std::size_t M = 1; M <= 3; ++M) {
    for (const auto& w : kAllWeights) {
      const Matrix P = enumerate_mtm_transition_matrix(spec, M, w);
      EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-14) << to_string(w) << " M=" << M;
    }
  }
}

TEST(Enumeration, ProportionalWeightsTwoCandidatesStationary) {
  const auto spec = line_walk_spec(uneven_pi());
  const Matrix P = enumerate_mtm_transition_matrix(spec, 2, {WeightKind::kProportional});
  EXPECT_LT((uneven_pi().transpose() * P - uneven_pi().transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Enumeration, AllWeightsAllPathsReversible) {
  for (const Vector& pi : {uniform_pi(), uneven_pi()}) {
    const auto spec = line_walk_spec(pi);
    for (const auto& w : kAllWeights) {
      for (std::size_t M = 1; M <= 3; ++M) {
        for (auto path : {AcceptancePath::kGeneral, AcceptancePath::kRestrictedAuto}) {
          const Matrix P = enumerate_mtm_transition_matrix(spec, M, w, path);
          EXPECT_TRUE(check_row_sums(P).passed);
          EXPECT_TRUE(check_stationarity(P, pi).passed) << to_string(w) << " M=" << M;
          EXPECT_TRUE(check_detailed_balance(P, pi).passed) << to_string(w) << " M=" << M;
        }
      }
    }
  }
}

TEST(Enumeration, HeterogeneousTablesStayReversible) {
  auto spec = line_walk_spec(uneven_pi());
  Matrix lazy = 0.5 * Matrix::Identity(5, 5) + 0.5 * spec.proposal(0);
  spec.proposal_probs = {spec.proposal(0), lazy, lazy * lazy};
  spec.validate();
  for (const auto& w : kAllWeights) {
    const Matrix P = enumerate_mtm_transition_matrix(spec, 3, w);
    EXPECT_TRUE(check_detailed_balance(P, uneven_pi()).passed) << to_string(w);
  }
}

TEST(Enumeration, SizeBounds) {
  const auto spec = line_walk_spec(uniform_pi());
  EXPECT_THROW(enumerate_mtm_transition_matrix(spec, 4, {}), ConfigError);
  DiscreteKernelSpec big;
  for (int k = 0; k < 13; ++k) big.states.push_back(Vector::Constant(1, k));
  big.target_probs = Vector::Constant(13, 1.0 / 13);
  big.proposal_probs = {Matrix::Constant(13, 13, 1.0 / 13)};
  EXPECT_THROW(enumerate_mtm_transition_matrix(big, 1, {}), ConfigError);
}

TEST(DetailedBalance, IdentityPasses) {
  EXPECT_TRUE(check_detailed_balance(Matrix::Identity(5, 5), uneven_pi()).passed);
}

TEST(DetailedBalance, MetropolisHastingsMatrixPasses) {
  const auto spec = line_walk_spec(uneven_pi());
  EXPECT_TRUE(check_detailed_balance(mh_matrix(uneven_pi(), spec.proposal(0)), uneven_pi()).passed);
}

TEST(DetailedBalance, CyclicKernelFailsWithLocation) {
  Matrix P = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) P(i, (i + 1) % 5) = 1.0;
  const auto r = check_detailed_balance(P, uniform_pi());
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.max_violation, 0.2, 1e-15);
  EXPECT_FALSE(r.detail.empty());
  EXPECT_TRUE(check_stationarity(P, uniform_pi()).passed);
}

TEST(Marginality, LineWalkPasses) {
  const auto spec = line_walk_spec(uneven_pi());
  for (const auto& w : kAllWeights) {
    for (std::size_t M = 1; M <= 3; ++M) EXPECT_TRUE(check_marginality(spec, M, w).passed);
  }
}

TEST(Marginality, UnnormalizedProposalFails) {
  auto spec = line_walk_spec(uneven_pi());
  spec.proposal_probs[0] *= 1.1;
  EXPECT_FALSE(check_marginality(spec, 1, {}).passed);
  EXPECT_FALSE(check_marginality(spec, 2, {}).passed);
}

TEST(Involution, MetropolisHastingsSwapPasses) {
  auto target = std::make_shared<BananaTarget>(BananaParams{0.1, 2});
  const auto spec = mh_extended_spec(target, full_proposal(ProposalKind::kHomFull, 1, 2));
  Rng rng(1);
  std::vector<Vector> pts;
  for (int k = 0; k < 1000; ++k) pts.push_back(test::gaussian_vector(rng, 4, 3.0));
  EXPECT_TRUE(check_involution(spec, pts).passed);
  const Vector g = spec.involution(pts[0]);
  EXPECT_EQ(g.head(2), pts[0].tail(2));
  EXPECT_EQ(g.tail(2), pts[0].head(2));
}

TEST(Involution, MtmPermutationPasses) {
  auto target = std::make_shared<BananaTarget>(BananaParams{0.1, 2});
  for (std::size_t M : {1, 2, 3, 5}) {
    const auto proposal = full_proposal(ProposalKind::kHetFull, M, 2);
    const auto spec = mtm_extended_spec(target, proposal, {WeightKind::kLocallyBalanced});
    Rng rng(M);
    std::vector<Vector> pts;
    while (pts.size() < 1000) {
      auto p = sample_mtm_extended_point(*target, *proposal, {WeightKind::kLocallyBalanced},
                                         test::gaussian_vector(rng, 2), rng);
      if (p.size() > 0) pts.push_back(std::move(p));
    }
    EXPECT_EQ(static_cast<std::size_t>(pts[0].size()), spec.size());
    EXPECT_TRUE(check_involution(spec, pts).passed) << "M=" << M;
  }
}

TEST(Involution, ShiftFailsAndNamesBlock) {
  const std::vector<Vector> pts = {Vector::Constant(1, 0.5)};
  const auto r = check_involution(shift_spec(), pts);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.max_violation, 2.0, 1e-15);
  EXPECT_NE(r.detail.find('x'), std::string::npos);
}

TEST(Jacobian, PermutationsHaveUnitDeterminant) {
  auto target = std::make_shared<GaussianTarget>(3);
  const auto proposal = full_proposal(ProposalKind::kHomFull, 3, 3);
  const auto spec = mtm_extended_spec(target, proposal, {WeightKind::kProportional});
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    const auto p = sample_mtm_extended_point(*target, *proposal, {WeightKind::kProportional},
                                             test::gaussian_vector(rng, 3), rng);
    EXPECT_NEAR(jacobian_log_abs(spec, p), 0.0, 1e-8);
  }
}

TEST(Jacobian, ReciprocalMatchesAnalyticDerivative) {
  const double c = 2.5;
  const auto spec = reciprocal_extended_spec(c);
  for (double x : {0.3, 1.0, 2.0, 7.5}) {
    EXPECT_NEAR(jacobian_log_abs(spec, Vector::Constant(1, x)), std::log(c / (x * x)), 1e-6);
  }
}

TEST(Jacobian, Reciprocity) {
  const auto spec = reciprocal_extended_spec(3.0);
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.05, 20.0);
  for (int k = 0; k < 1000; ++k) {
    const Vector p = Vector::Constant(1, u(rng));
    EXPECT_NEAR(jacobian_log_abs(spec, p) + jacobian_log_abs(spec, spec.involution(p)), 0.0, 1e-6);
  }
}

TEST(Jacobian, SingularTransformThrows) {
  ExtendedSpaceSpec s;
  s.blocks = {{"x", 2, true}};
  s.log_joint = [](const Vector&) { return 0.0; };
  s.involution = [](const Vector& p) { return Vector::Constant(2, p.sum()); };
  EXPECT_THROW(jacobian_log_abs(s, Vector::Ones(2)), DegenerateTransformError);
}

TEST(AcceptanceFromSpec, SymmetricDensityGivesOne) {
  ExtendedSpaceSpec s;
  s.blocks = {{"x", 1, true}, {"y", 1, true}};
  s.log_joint = [](const Vector& p) { return -0.5 * (p[0] * p[0] + p[1] * p[1]); };
  s.involution = [](const Vector& p) { return Vector{{p[1], p[0]}}; };
  EXPECT_DOUBLE_EQ(acceptance_from_spec(s, Vector{{0.3, -1.2}}), 1.0);
}

TEST(AcceptanceFromSpec, BothDensitiesZeroIsUndefined) {
  ExtendedSpaceSpec s = shift_spec();
  s.log_joint = [](const Vector&) { return kNegInf; };
  EXPECT_THROW(acceptance_log_ratio_from_spec(s, Vector::Constant(1, 0.0)), UndefinedRatioError);
}

TEST(AcceptanceFromSpec, MetropolisHastingsRatio) {
  auto target = std::make_shared<BananaTarget>(BananaParams{0.1, 2});
  const auto proposal = full_proposal(ProposalKind::kHomFull, 1, 2);
  const auto spec = mh_extended_spec(target, proposal);
  test::for_cases(1000, 5, [&](Rng& rng, std::size_t) {
    const Vector x = test::gaussian_vector(rng, 2, 2.0);
    const Vector y = x + test::gaussian_vector(rng, 2);
    Vector p(4);
    p << x, y;
    const double expected = target->log_density(y) + proposal->log_density(0, y, x) -
                            target->log_density(x) - proposal->log_density(0, x, y);
    EXPECT_NEAR(acceptance_log_ratio_from_spec(spec, p), expected, 1e-12);
    EXPECT_NEAR(acceptance_from_spec(spec, p), std::min(1.0, std::exp(expected)), 1e-12);
  });
}

TEST(AcceptanceFromSpec, RatioReciprocity) {
  auto target = std::make_shared<BananaTarget>(BananaParams{0.1, 2});
  for (const auto& w : kAllWeights) {
    const auto proposal = full_proposal(ProposalKind::kHetFull, 3, 2);
    const auto spec = mtm_extended_spec(target, proposal, w);
    Rng rng(6);
    int checked = 0;
    while (checked < 200) {
      const auto p = sample_mtm_extended_point(*target, *proposal, w, test::gaussian_vector(rng, 2), rng);
      if (p.size() == 0) continue;
      const double r = acceptance_log_ratio_from_spec(spec, p);
      const double r_back = acceptance_log_ratio_from_spec(spec, spec.involution(p));
      EXPECT_NEAR(r + r_back, 0.0, 1e-8) << to_string(w);
      ++checked;
    }
  }
}

TEST(AcceptanceFromSpec, MtmSpecMatchesKernelRatio) {
  auto target = std::make_shared<GaussianTarget>(2);
  const auto proposal = full_proposal(ProposalKind::kHetFull, 3, 2);
  const WeightSpec w{WeightKind::kLocallyBalanced};
  const FullMove move{target.get(), proposal.get()};
  test::for_cases(100, 3, [&](Rng& rng, std::size_t) {
    const Vector x = test::gaussian_vector(rng, 2);
    Trial<Vector> trial;
    mtm_transition(move, w, false, 3, x, target->log_density(x), rng, trial);
    const auto spec = mtm_extended_spec(target, proposal, w);
    // Layout [x, y_1..y_M, J, x*_{-J}].
    Vector p(2 + 6 + 1 + 4);
    p.head(2) = x;
    for (int m = 0; m < 3; ++m) p.segment(2 + 2 * m, 2) = trial.candidates[static_cast<std::size_t>(m)];
    p[8] = static_cast<double>(trial.selected);
    int slot = 0;
    for (std::size_t m = 0; m < 3; ++m) {
      if (m == trial.selected) continue;
      p.segment(9 + 2 * slot, 2) = trial.reverse[m];
      ++slot;
    }
    EXPECT_NEAR(acceptance_log_ratio_from_spec(spec, p), trial.log_ratio_general, 1e-9);
  });
}

TEST(VerificationSuite, AllChecksPass) {
  const auto report = run_verification_suite(1, 200);
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.check << " " << c.max_violation;
  EXPECT_TRUE(report.passed());
  std::ostringstream csv;
  write_report_csv(csv, report);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "check,max_violation,passed");
  std::ostringstream text;
  write_report_text(text, report);
  EXPECT_NE(text.str().find("checks passed"), std::string::npos);
}

TEST(VerificationReport, AnyFailureFailsReport) {
  VerificationReport r;
  r.add({"a", 0.0, true, ""});
  EXPECT_TRUE(r.passed());
  r.add({"b", 1.0, false, ""});
  EXPECT_FALSE(r.passed());
}

}  // namespace
}  // namespace mtm
