#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "mtm/targets.hpp"
#include "test_support.hpp"

namespace mtm {
namespace {

using test::normal_log_pdf;

double banana_oracle(const Vector& x, double B) {
  double s = -x[0] * x[0] / 200.0;
  const double t = x[1] + B * x[0] * x[0] - 100.0 * B;
  s -= 0.5 * t * t;
  for (Eigen::Index i = 2; i < x.size(); ++i) s -= 0.5 * x[i] * x[i];
  return s;
}

double mixture_oracle(const Vector& x, const MixtureParams& p) {
  const double w[5] = {0.1, 0.2, 0.4, 0.2, 0.1};
  double total = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    double density = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double z = x[i] - p.component_means[k][i];
      density *= std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    }
    total += w[k] * density;
  }
  return std::log(total);
}

RegressionDataset small_dataset() {
  Vector beta(2);
  beta << 0.5, -1.5;
  return make_regression_dataset(3, 40, 0.7, beta, 0.8);
}

TEST(Banana, ZeroStateWithoutCurvatureIsZero) {
  EXPECT_EQ(banana_log_density(Vector::Zero(10), {0.0, 10}), 0.0);
}

TEST(Banana, ZeroStateWithCurvature) {
  EXPECT_DOUBLE_EQ(banana_log_density(Vector::Zero(10), {0.01, 10}), -0.5);
}

TEST(Banana, MatchesDirectFormula) {
  for (double B : {0.0, 0.01, 0.1, 0.3}) {
    Vector x = Vector::Zero(5);
    x[0] = 1.0;
    x[1] = 2.0;
    EXPECT_NEAR(banana_log_density(x, {B, 5}), banana_oracle(x, B), 1e-12) << "B=" << B;
  }
  test::for_cases(50, 11, [](Rng& rng, std::size_t) {
    const Vector x = test::gaussian_vector(rng, 4, 5.0);
    EXPECT_NEAR(banana_log_density(x, {0.05, 4}), banana_oracle(x, 0.05), 1e-9);
  });
}

TEST(Banana, DimensionMismatchThrows) {
  BananaTarget t({0.01, 3});
  EXPECT_THROW(t.log_density(Vector::Zero(4)), std::invalid_argument);
  EXPECT_THROW(BananaTarget({0.01, 1}), std::invalid_argument);
  EXPECT_THROW(BananaTarget({-1.0, 3}), std::invalid_argument);
}

TEST(Funnel, OriginWithOneCoordinate) {
  const double expected = normal_log_pdf(0, 0, 3) + normal_log_pdf(0, 0, 1);
  EXPECT_NEAR(funnel_log_density(Vector::Zero(2), {1.0, 1}), expected, 1e-14);
}

TEST(Funnel, NoXCoordinates) {
  EXPECT_NEAR(funnel_log_density(Vector::Zero(1), {1.0, 0}), normal_log_pdf(0, 0, 3), 1e-14);
}

TEST(Funnel, MatchesProductOfGaussians) {
  test::for_cases(30, 5, [](Rng& rng, std::size_t) {
    const Vector s = test::gaussian_vector(rng, 4, 1.5);
    const double beta = 0.5;
    double expected = normal_log_pdf(s[0], 0, 3);
    for (int i = 1; i < 4; ++i) expected += normal_log_pdf(s[i], 0, std::exp(s[0] / beta));
    EXPECT_NEAR(funnel_log_density(s, {beta, 3}), expected, 1e-10 + 1e-14 * std::abs(expected));
  });
}

TEST(Mixture, WeightsNormalize) {
  const auto w = MixtureParams::standard(3).normalized_weights();
  const std::array<double, 5> expected{0.1, 0.2, 0.4, 0.2, 0.1};
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(w[k], expected[k], 1e-15);
}

TEST(Mixture, MatchesNaiveSum) {
  const auto p = MixtureParams::standard(2);
  EXPECT_NEAR(mixture_log_density(Vector::Zero(2), p), mixture_oracle(Vector::Zero(2), p), 1e-12);
  test::for_cases(50, 7, [&](Rng& rng, std::size_t) {
    const Vector x = test::gaussian_vector(rng, 2, 3.0);
    EXPECT_NEAR(mixture_log_density(x, p), mixture_oracle(x, p), 1e-10);
  });
}

TEST(Mixture, MeanSetClosedUnderNegation) {
  for (std::size_t d : {1, 2, 5}) {
    const auto p = MixtureParams::standard(d);
    for (const auto& mu : p.component_means) {
      const bool found = std::any_of(p.component_means.begin(), p.component_means.end(),
                                     [&](const Vector& nu) { return nu == -mu; });
      EXPECT_TRUE(found);
    }
  }
}

TEST(Mixture, SymmetricWhenPairedWeightsMatch) {
  for (std::size_t d : {1, 2, 5}) {
    auto p = MixtureParams::standard(d);
    p.component_weights = {1, 2, 2, 1, 1};
    MixtureTarget t(p);
    test::for_cases(20, d, [&](Rng& rng, std::size_t) {
      const Vector x = test::gaussian_vector(rng, d, 3.0);
      EXPECT_NEAR(t.log_density(x), t.log_density(-x), 1e-12);
    });
  }
}

TEST(Mixture, StandardWeightsFavourNegativeMode) {
  MixtureTarget t(MixtureParams::standard(2));
  EXPECT_GT(t.log_density(Vector::Constant(2, -3.0)), t.log_density(Vector::Constant(2, 3.0)));
}

TEST(Regression, ZeroNoiseIsExactlyLinear) {
  Vector beta(3);
  beta << 1.0, -2.0, 0.5;
  const auto data = make_regression_dataset(9, 25, 4.0, beta, 0.0);
  const Vector fitted = (data.X * beta).array() + 4.0;
  EXPECT_TRUE(data.y.isApprox(fitted, 1e-14));
}

TEST(Regression, SameSeedSameDataset) {
  Vector beta(4);
  beta << 0.1, 5, -5, 10;
  const auto a = make_regression_dataset(42, 100, 1, beta, 0.5);
  const auto b = make_regression_dataset(42, 100, 1, beta, 0.5);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.y, b.y);
  const auto c = make_regression_dataset(43, 100, 1, beta, 0.5);
  EXPECT_NE(a.y, c.y);
}

TEST(Regression, LeastSquaresRecoversCoefficients) {
  Vector beta(4);
  beta << 0.1, 5, -5, 10;
  const auto data = make_regression_dataset(1, 1000, 1.0, beta, 0.5);
  Matrix design(1000, 5);
  design.col(0).setOnes();
  design.rightCols(4) = data.X;
  const Vector coef = design.colPivHouseholderQr().solve(data.y);
  const Vector resid = data.y - design * coef;
  const double s2 = resid.squaredNorm() / (1000.0 - 5.0);
  const Matrix cov = s2 * (design.transpose() * design).inverse();
  Vector truth(5);
  truth << 1.0, 0.1, 5, -5, 10;
  for (int j = 0; j < 5; ++j) EXPECT_LT(std::abs(coef[j] - truth[j]), 3.0 * std::sqrt(cov(j, j))) << j;
}

TEST(Regression, InverseGammaMoments) {
  const InverseGammaPrior p;
  EXPECT_NEAR(p.scale / (p.shape - 1.0), 1.0, 1e-12);
  EXPECT_NEAR(1.0 / (p.shape - 2.0), 100.0, 1e-9);
}

TEST(Regression, NonPositiveSigmaIsOffSupport) {
  RegressionTarget t(small_dataset());
  Vector theta = Vector::Zero(4);
  EXPECT_EQ(t.log_density(theta), kNegInf);
  theta[3] = -1.0;
  EXPECT_EQ(t.log_density(theta), kNegInf);
  theta[3] = std::nan("");
  EXPECT_THROW(t.log_density(theta), std::invalid_argument);
}

TEST(Regression, MatchesTermByTermSum) {
  const auto data = small_dataset();
  RegressionTarget t(data);
  test::for_cases(20, 3, [&](Rng& rng, std::size_t) {
    Vector theta = test::gaussian_vector(rng, 4);
    theta[3] = 0.2 + std::abs(theta[3]);
    double expected = 0.0;
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
      const double mean = theta[0] + theta[1] * data.X(i, 0) + theta[2] * data.X(i, 1);
      expected += normal_log_pdf(data.y[i], mean, theta[3]);
    }
    for (int j = 0; j < 3; ++j) expected += normal_log_pdf(theta[j], 0.0, 100.0);
    const double a = 2.01;
    const double b = 1.01;
    const double s = theta[3];
    expected += std::log(std::pow(b, a) / std::tgamma(a) * std::pow(s, -a - 1.0) * std::exp(-b / s));
    EXPECT_NEAR(t.log_density(theta), expected, 1e-9);
  });
}

TEST(Lighthouse, ModeOfThreeCauchyFactors) {
  const LighthouseData data{{0.0, 0.0, 0.0}};
  Vector theta(2);
  theta << 0.0, 1.0;
  EXPECT_NEAR(lighthouse_log_posterior(theta, data), 3.0 * std::log(1.0 / std::numbers::pi), 1e-14);
}

TEST(Lighthouse, NonPositiveDistanceIsOffSupport) {
  const LighthouseData data{{1.0, 2.0, 3.0}};
  for (double y : {0.0, -0.5}) {
    Vector theta(2);
    theta << 0.0, y;
    EXPECT_EQ(lighthouse_log_posterior(theta, data), kNegInf);
  }
}

TEST(Lighthouse, InvariantToFlashOrder) {
  const LighthouseData a{{-1.2, 0.4, 3.1}};
  const LighthouseData b{{3.1, -1.2, 0.4}};
  test::for_cases(20, 2, [&](Rng& rng, std::size_t) {
    Vector theta = test::gaussian_vector(rng, 2, 2.0);
    theta[1] = std::abs(theta[1]) + 0.01;
    EXPECT_NEAR(lighthouse_log_posterior(theta, a), lighthouse_log_posterior(theta, b), 1e-12);
  });
}

TEST(Lighthouse, CsvRoundTripAndArity) {
  const LighthouseData data{{-1.2, 0.4, 3.1}};
  std::stringstream io;
  write_lighthouse_csv(io, data);
  EXPECT_EQ(read_lighthouse_csv(io).flashes, data.flashes);
  std::istringstream two("flash\n1\n2\n");
  EXPECT_THROW(read_lighthouse_csv(two), std::invalid_argument);
}

TEST(EightSchools, NonPositiveTauIsOffSupport) {
  EightSchoolsTarget t(EightSchoolsData::rubin());
  Vector theta = Vector::Zero(10);
  EXPECT_EQ(t.log_density(theta), kNegInf);
  theta[1] = -2.0;
  EXPECT_EQ(t.log_density(theta), kNegInf);
}

TEST(EightSchools, MatchesTermByTermSum) {
  const auto data = EightSchoolsData::rubin();
  EightSchoolsTarget t(data);
  test::for_cases(20, 8, [&](Rng& rng, std::size_t) {
    Vector theta = test::gaussian_vector(rng, 10, 5.0);
    theta[1] = std::abs(theta[1]) + 0.1;
    const double tau = theta[1];
    double expected = normal_log_pdf(theta[0], 0.0, 5.0);
    expected += std::log(1.0 / (std::numbers::pi * 5.0 * (1.0 + (tau / 5.0) * (tau / 5.0))));
    for (int i = 0; i < 8; ++i) {
      expected += normal_log_pdf(theta[i + 2], theta[0], tau);
      expected += normal_log_pdf(data.effects[static_cast<std::size_t>(i)], theta[i + 2],
                                 data.sds[static_cast<std::size_t>(i)]);
    }
    EXPECT_NEAR(t.log_density(theta), expected, 1e-10);
  });
}

TEST(EightSchools, SchoolEffectConditionalMatchesConjugateNormal) {
  const auto data = EightSchoolsData::rubin();
  EightSchoolsTarget t(data);
  Vector theta = Vector::Zero(10);
  theta[0] = 4.0;
  theta[1] = 30.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto k = static_cast<std::size_t>(i + 2);
    const double s2 = data.sds[i] * data.sds[i];
    const double t2 = theta[1] * theta[1];
    const double post_mean = (data.effects[i] / s2 + theta[0] / t2) / (1.0 / s2 + 1.0 / t2);
    // The conditional log density is quadratic in theta_i: its vertex is the
    // conjugate posterior mean.
    const double a = coordinate_log_density(t, theta, k, -10.0);
    const double b = coordinate_log_density(t, theta, k, 0.0);
    const double c = coordinate_log_density(t, theta, k, 10.0);
    const double vertex = 10.0 * (a - c) / (2.0 * (a - 2.0 * b + c));
    EXPECT_NEAR(vertex, post_mean, 1e-8) << "school " << i;
    EXPECT_LT(std::abs(post_mean - data.effects[i]), std::abs(theta[0] - data.effects[i]));
  }
}

TEST(EightSchools, WrongDataLengthThrows) {
  EXPECT_THROW(EightSchoolsTarget(EightSchoolsData{{1, 2}, {1, 1}}), std::invalid_argument);
  auto bad = EightSchoolsData::rubin();
  bad.sds[3] = 0.0;
  EXPECT_THROW(EightSchoolsTarget{bad}, std::invalid_argument);
}

TEST(EightSchools, CsvRoundTrip) {
  const auto data = EightSchoolsData::rubin();
  std::stringstream io;
  write_eight_schools_csv(io, data);
  const auto back = read_eight_schools_csv(io);
  EXPECT_EQ(back.effects, data.effects);
  EXPECT_EQ(back.sds, data.sds);
}

TEST(Regression, CsvRoundTrip) {
  const auto data = small_dataset();
  std::stringstream io;
  write_regression_csv(io, data);
  const auto back = read_regression_csv(io);
  EXPECT_EQ(back.X, data.X);
  EXPECT_EQ(back.y, data.y);
}

std::vector<std::shared_ptr<const Target>> all_targets() {
  return {std::make_shared<BananaTarget>(BananaParams{0.1, 4}),
          std::make_shared<FunnelTarget>(FunnelParams{1.0, 3}),
          std::make_shared<MixtureTarget>(MixtureParams::standard(3)),
          std::make_shared<RegressionTarget>(small_dataset()),
          std::make_shared<LighthouseTarget>(LighthouseData{{-1.2, 0.4, 3.1}}),
          std::make_shared<EightSchoolsTarget>(EightSchoolsData::rubin()),
          std::make_shared<GaussianTarget>(3)};
}

Vector interior_point(const Target& t, Rng& rng) {
  Vector x = test::gaussian_vector(rng, t.dim());
  if (t.name() == "regression") x[3] = 0.5 + std::abs(x[3]);
  if (t.name() == "lighthouse") x[1] = 0.5 + std::abs(x[1]);
  if (t.name() == "eight-schools") x[1] = 1.0 + std::abs(x[1]);
  return x;
}

TEST(AllTargets, GradientMatchesFiniteDifferences) {
  for (const auto& t : all_targets()) {
    test::for_cases(20, 21, [&](Rng& rng, std::size_t) {
      const Vector x = interior_point(*t, rng);
      const Vector g = t->gradient(x);
      const Vector fd = test::numeric_gradient([&](const Vector& p) { return t->log_density(p); }, x);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        EXPECT_LT(std::abs(g[i] - fd[i]), 1e-4 * std::max(1.0, std::abs(fd[i])))
            << t->name() << " coordinate " << i;
      }
    });
  }
}

TEST(AllTargets, CoordinateEvaluationAgreesWithFullUpToConstant) {
  for (const auto& t : all_targets()) {
    test::for_cases(10, 4, [&](Rng& rng, std::size_t) {
      const Vector x = interior_point(*t, rng);
      for (std::size_t i = 0; i < t->dim(); ++i) {
        const double a = x[static_cast<Eigen::Index>(i)];
        const double b = a + 0.3;
        Vector xb = x;
        xb[static_cast<Eigen::Index>(i)] = b;
        const double full = t->log_density(xb) - t->log_density(x);
        const double partial = coordinate_log_density(*t, x, i, b) - coordinate_log_density(*t, x, i, a);
        EXPECT_NEAR(partial, full, 1e-9 * std::max(1.0, std::abs(full))) << t->name() << " i=" << i;
      }
    });
  }
}

TEST(AllTargets, CoordinateIndexOutOfRangeThrows) {
  GaussianTarget t(2);
  EXPECT_THROW(coordinate_log_density(t, Vector::Zero(2), 2, 0.0), std::out_of_range);
}

TEST(Mixture, CoordinateEvaluationUsesFullDensity) {
  MixtureTarget t(MixtureParams::standard(3));
  Vector x(3);
  x << 0.4, -1.0, 2.0;
  Vector y = x;
  y[0] = 1.7;
  EXPECT_NEAR(coordinate_log_density(t, x, 0, 1.7), t.log_density(y), 1e-12);
}

TEST(Banana, TrailingCoordinateDependsOnlyOnItself) {
  BananaTarget t({0.1, 5});
  Rng rng(6);
  const Vector x = test::gaussian_vector(rng, 5, 2.0);
  const Vector z = test::gaussian_vector(rng, 5, 2.0);
  for (std::size_t i = 2; i < 5; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double dx = coordinate_log_density(t, x, i, 1.5) - coordinate_log_density(t, x, i, x[k]);
    const double dz = coordinate_log_density(t, z, i, 1.5) - coordinate_log_density(t, z, i, z[k]);
    EXPECT_NEAR(dx, -0.5 * 1.5 * 1.5 + 0.5 * x[k] * x[k], 1e-12);
    EXPECT_NEAR(dz, -0.5 * 1.5 * 1.5 + 0.5 * z[k] * z[k], 1e-12);
  }
}

// Midpoint rule on a box large enough to hold essentially all the mass.
double integrate_2d(const Target& t, double x_lo, double x_hi, double y_lo, double y_hi, int n) {
  const double hx = (x_hi - x_lo) / n;
  const double hy = (y_hi - y_lo) / n;
  double total = 0.0;
  Vector p(2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      p << x_lo + (i + 0.5) * hx, y_lo + (j + 0.5) * hy;
      total += std::exp(t.log_density(p));
    }
  }
  return total * hx * hy;
}

TEST(AllTargets, DensitiesIntegrateToFiniteConstantsInTwoDimensions) {
  EXPECT_NEAR(integrate_2d(MixtureTarget(MixtureParams::standard(2)), -12, 12, -12, 12, 400), 1.0, 1e-3);
  EXPECT_NEAR(integrate_2d(GaussianTarget(2), -10, 10, -10, 10, 400), 1.0, 1e-3);
  const double banana = integrate_2d(BananaTarget({0.05, 2}), -60, 60, -200, 60, 600);
  EXPECT_NEAR(banana, 2.0 * std::numbers::pi * 10.0, 0.05);
  const double lighthouse = integrate_2d(LighthouseTarget(LighthouseData{{-1.2, 0.4, 3.1}}), -200, 200, 0, 200, 800);
  EXPECT_TRUE(std::isfinite(lighthouse));
  EXPECT_GT(lighthouse, 0.0);
}

TEST(AllTargets, EvaluationIsDeterministic) {
  for (const auto& t : all_targets()) {
    Rng rng(1);
    const Vector x = interior_point(*t, rng);
    EXPECT_EQ(t->log_density(x), t->log_density(x)) << t->name();
  }
}

}  // namespace
}  // namespace mtm
