#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mtm/plan.hpp"
#include "mtm/results.hpp"
#include "test_support.hpp"

namespace mtm {
namespace {

ExperimentPlan parse(const std::string& text) {
  std::istringstream in(text);
  return parse_plan(in);
}

ResultRow row(std::string metric, double value, long run = 0) {
  ResultRow r;
  r.experiment = "banana";
  r.target_param = 0.01;
  r.proposal = "hom-full";
  r.weight = "proportional";
  r.M = 5;
  r.run = run;
  r.seed = 123456789012345ULL;
  r.n_iter = 1000;
  r.n_accept = 250;
  r.burn_in = 50;
  r.wall_s = 0.125;
  r.metric = std::move(metric);
  r.value = value;
  return r;
}

TEST(DefaultPlan, FactorialCounts) {
  const auto banana = expand_plan(default_plan("banana"));
  EXPECT_EQ(banana.settings, 560u);
  EXPECT_EQ(banana.cells.size(), 532u);
  const auto regression = expand_plan(default_plan("regression"));
  EXPECT_EQ(regression.settings, 960u);
  EXPECT_EQ(regression.cells.size(), 920u);
}

TEST(DefaultPlan, EveryExperimentValidates) {
  for (auto e : kExperiments) {
    const auto plan = default_plan(e);
    EXPECT_NO_THROW(plan.validate()) << e;
    EXPECT_GT(preset_budget_seconds(e), 0.0);
  }
  EXPECT_THROW(default_plan("nope"), ConfigError);
}

TEST(ExpandPlan, OrderAndExclusion) {
  auto plan = default_plan("custom");
  plan.proposals = {ProposalKind::kHomFull, ProposalKind::kHetCW};
  plan.weights = {{WeightKind::kProportional}};
  plan.M = {1, 3};
  plan.target_params = {2, 4};
  const auto e = expand_plan(plan);
  EXPECT_EQ(e.settings, 8u);
  ASSERT_EQ(e.cells.size(), 6u);
  EXPECT_EQ(e.cells[0].id(), "custom|2|hom-full|proportional|1");
  EXPECT_EQ(e.cells[1].id(), "custom|2|hom-full|proportional|3");
  EXPECT_EQ(e.cells[2].id(), "custom|2|het-cw|proportional|3");
  EXPECT_EQ(e.cells[3].id(), "custom|4|hom-full|proportional|1");
  for (const auto& c : e.cells) EXPECT_FALSE(c.proposal == ProposalKind::kHetCW && c.M < 2);
}

TEST(ExpandPlan, SingleCell) {
  const auto plan = parse(
      "experiment = banana\nproposals = het-full\nweights = locally-balanced\nM = 5\n"
      "target_param = 0.1\nreplicates = 3\nbudget_iterations = 100\n");
  const auto e = expand_plan(plan);
  EXPECT_EQ(e.settings, 1u);
  ASSERT_EQ(e.cells.size(), 1u);
  EXPECT_EQ(e.cells[0].M, 5u);
}

TEST(ExpandPlan, HetComponentWiseWithOneCandidateOnlyIsAnError) {
  auto plan = default_plan("custom");
  plan.proposals = {ProposalKind::kHetCW};
  plan.M = {1};
  EXPECT_THROW(expand_plan(plan), ConfigError);
}

TEST(ParsePlan, AllKeys) {
  const auto plan = parse(R"(# comment
experiment = mixture
proposals = hom-full, het-cw
weights = proportional, jump-distance(2)
M = 2, 5      # trailing comment

target_param = 2, 4
replicates = 7
budget_seconds = 1.5
max_iterations = 10^6
master_seed = 99
dim = 3
baseline_size = 500
scaling = 2
het_spread = 0.5
n0 = 20
covariance_rule = literal
)");
  EXPECT_EQ(plan.experiment, "mixture");
  EXPECT_EQ(plan.proposals.size(), 2u);
  EXPECT_EQ(plan.weights[1].kind, WeightKind::kJumpDistance);
  EXPECT_DOUBLE_EQ(plan.weights[1].alpha, 2.0);
  EXPECT_EQ(plan.M, (std::vector<std::size_t>{2, 5}));
  EXPECT_EQ(plan.replicates, 7u);
  EXPECT_EQ(plan.budget_seconds, 1.5);
  EXPECT_FALSE(plan.budget_iterations);
  EXPECT_EQ(plan.max_iterations, 1000000u);
  EXPECT_EQ(plan.master_seed, 99u);
  EXPECT_EQ(plan.dim, 3u);
  EXPECT_EQ(plan.baseline_size, 500u);
  EXPECT_EQ(plan.scaling, 2.0);
  EXPECT_EQ(plan.het_spread, 0.5);
  EXPECT_EQ(plan.n0, 20u);
  EXPECT_EQ(plan.covariance_rule, CovarianceRule::kLiteral);
}

TEST(ParsePlan, PowerOfTenValues) {
  const auto plan = parse(
      "experiment = funnel\nproposals = hom-full\nweights = proportional\nM = 1\n"
      "target_param = 10^-0.5, 10^0\nbudget_iterations = 10\n");
  EXPECT_DOUBLE_EQ(plan.target_params[0], std::pow(10.0, -0.5));
  EXPECT_EQ(plan.target_params[1], 1.0);
}

TEST(ParsePlan, ErrorsNameTheLine) {
  try {
    parse("experiment = banana\n\nM = 1, x\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse("colour = red\n"), ConfigError);
  EXPECT_THROW(parse("just words\n"), ConfigError);
}

TEST(ParsePlan, BudgetMustBeUnique) {
  const std::string base =
      "experiment = banana\nproposals = hom-full\nweights = proportional\nM = 1\ntarget_param = 0.1\n";
  EXPECT_THROW(parse(base), ConfigError);
  EXPECT_THROW(parse(base + "budget_iterations = 10\nbudget_seconds = 1\n"), ConfigError);
  EXPECT_THROW(parse(base + "budget_seconds = 0\n"), ConfigError);
  EXPECT_NO_THROW(parse(base + "budget_seconds = 1\n"));
}

TEST(ParsePlan, WriteRoundTrip) {
  for (auto e : kExperiments) {
    auto plan = default_plan(e);
    if (std::string_view(e) == "lighthouse") plan.data = "data/lighthouse.csv";
    std::ostringstream out;
    write_plan(out, plan);
    const auto back = parse(out.str());
    std::ostringstream again;
    write_plan(again, back);
    EXPECT_EQ(out.str(), again.str()) << e;
    EXPECT_EQ(back.target_params, plan.target_params) << e;
  }
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  test::for_cases(1000, 3, [](Rng& rng, std::size_t) {
    const double v = std::normal_distribution<double>(0.0, 1e3)(rng);
    EXPECT_EQ(std::stod(format_number(v)), v);
  });
}

TEST(ResultsCsv, RoundTrip) {
  std::vector<ResultRow> rows = {row("mess", 123.456), row("mess_per_s", 1e-9, 1),
                                 row("mean[x1]", -0.25, 2)};
  rows.back().run = -1;
  std::ostringstream out;
  write_results_csv(out, rows);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "experiment,target_param,proposal,weight,M,run,seed,n_iter,n_accept,burn_in,wall_s,"
            "metric,value");
  std::istringstream in(out.str());
  EXPECT_EQ(read_results_csv(in), rows);
}

TEST(ResultsCsv, NonFiniteValues) {
  std::vector<ResultRow> rows = {row(kFailedMetric, std::numeric_limits<double>::quiet_NaN()),
                                 row("ksd", std::numeric_limits<double>::infinity())};
  std::ostringstream out;
  write_results_csv(out, rows);
  std::istringstream in(out.str());
  const auto back = read_results_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(std::isnan(back[0].value));
  EXPECT_EQ(back[1].value, std::numeric_limits<double>::infinity());
}

TEST(ResultsCsv, MalformedInputThrows) {
  std::istringstream wrong_header("a,b\n");
  EXPECT_ANY_THROW(read_results_csv(wrong_header));
  std::ostringstream out;
  write_results_csv(out, {row("mess", 1.0)});
  std::istringstream short_row(out.str() + "banana,0.1,hom-full\n");
  EXPECT_ANY_THROW(read_results_csv(short_row));
}

TEST(Summarize, SingleRow) {
  const auto s = summarize({row("mess", 4.0)});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].n, 1u);
  EXPECT_EQ(s[0].median, 4.0);
  EXPECT_EQ(s[0].q05, 4.0);
  EXPECT_EQ(s[0].q95, 4.0);
}

TEST(Summarize, Quartiles) {
  std::vector<ResultRow> rows;
  for (int k = 1; k <= 5; ++k) rows.push_back(row("mess", k, k));
  const auto s = summarize(rows);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].median, 3.0);
  EXPECT_EQ(s[0].q25, 2.0);
  EXPECT_EQ(s[0].q75, 4.0);
  EXPECT_DOUBLE_EQ(s[0].q05, 1.2);
  EXPECT_DOUBLE_EQ(s[0].q95, 4.8);
}

TEST(Summarize, CountsNonFinite) {
  const auto s = summarize({row("ksd", 1.0), row("ksd", std::nan("")), row("ksd", 3.0)});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].n, 2u);
  EXPECT_EQ(s[0].n_nonfinite, 1u);
  EXPECT_EQ(s[0].median, 2.0);
  const auto all_nan = summarize({row("ksd", std::nan(""))});
  EXPECT_TRUE(std::isnan(all_nan[0].median));
}

TEST(Summarize, OneRowPerCellAndMetric) {
  std::vector<ResultRow> rows;
  const char* metrics[] = {"mess", "mess_per_s", "mess_per_iter"};
  for (std::size_t M : {1, 5}) {
    for (int run = 0; run < 4; ++run) {
      for (auto m : metrics) {
        auto r = row(m, run, run);
        r.M = M;
        rows.push_back(r);
      }
    }
  }
  const auto s = summarize(rows);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s[0].metric, "mess");
  EXPECT_EQ(s[1].metric, "mess_per_s");
  EXPECT_EQ(s[3].M, 5u);
  for (const auto& r : s) EXPECT_EQ(r.n, 4u);
  EXPECT_THROW(summarize({}), std::invalid_argument);
}

TEST(SummaryCsv, Header) {
  std::ostringstream out;
  write_summary_csv(out, summarize({row("mess", 1.0)}));
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "experiment,target_param,proposal,weight,M,metric,n,n_nonfinite,median,q05,q25,q75,q95");
}

}  // namespace
}  // namespace mtm
