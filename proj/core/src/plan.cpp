#include "mtm/plan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace mtm {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_plain(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

double parse_number(std::string_view s) {
  if (s.substr(0, 3) == "10^") return std::pow(10.0, parse_plain(s.substr(3)));
  return parse_plain(s);
}

std::uint64_t parse_unsigned(std::string_view s) {
  if (s.substr(0, 3) == "10^") {
    const auto e = parse_unsigned(s.substr(3));
    if (e > 19) throw ConfigError("integer too large: '" + std::string(s) + "'");
    std::uint64_t v = 1;
    for (std::uint64_t k = 0; k < e; ++k) v *= 10;
    return v;
  }
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("not a non-negative integer: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> grid(std::initializer_list<double> exponents) {
  std::vector<double> out;
  for (double e : exponents) out.push_back(std::pow(10.0, e));
  return out;
}

template <class T>
void write_list(std::ostream& out, const char* key, const std::vector<T>& values, auto&& fmt) {
  out << key << " =";
  for (std::size_t i = 0; i < values.size(); ++i) out << (i == 0 ? " " : ", ") << fmt(values[i]);
  out << '\n';
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool is_known_experiment(std::string_view name) {
  return std::find(std::begin(kExperiments), std::end(kExperiments), name) != std::end(kExperiments);
}

void ExperimentPlan::validate() const {
  if (!is_known_experiment(experiment)) throw ConfigError("unknown experiment '" + experiment + "'");
  if (proposals.empty()) throw ConfigError("plan: empty proposals grid");
  if (weights.empty()) throw ConfigError("plan: empty weights grid");
  if (M.empty()) throw ConfigError("plan: empty M grid");
  if (target_params.empty()) throw ConfigError("plan: empty target_param grid");
  if (std::find(M.begin(), M.end(), 0) != M.end()) throw ConfigError("plan: M must be >= 1");
  if (replicates == 0) throw ConfigError("plan: replicates must be >= 1");
  if (budget_iterations.has_value() == budget_seconds.has_value()) {
    throw ConfigError("plan: give exactly one of budget_iterations and budget_seconds");
  }
  if (budget_seconds && !(*budget_seconds > 0.0)) throw ConfigError("plan: budget must be positive");
  if (budget_iterations && *budget_iterations == 0) {
    throw ConfigError("plan: budget must be positive");
  }
}

double preset_budget_seconds(std::string_view experiment) {
  if (experiment == "banana" || experiment == "funnel") return 10.0;
  if (experiment == "mixture") return 30.0;
  if (experiment == "regression") return 90.0;
  if (experiment == "lighthouse") return 20.0;
  if (experiment == "eight-schools") return 45.0;
  if (experiment == "custom") return 10.0;
  throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
}

ExperimentPlan default_plan(std::string_view experiment) {
  ExperimentPlan plan;
  plan.experiment = std::string(experiment);
  plan.proposals = {ProposalKind::kHomFull, ProposalKind::kHetFull, ProposalKind::kHomCW,
                    ProposalKind::kHetCW};
  plan.weights = {{WeightKind::kProportional},
                  {WeightKind::kImportance},
                  {WeightKind::kJumpDistance, 3.0},
                  {WeightKind::kLocallyBalanced}};
  plan.M = {1, 5, 10, 15, 20};
  plan.budget_seconds = preset_budget_seconds(experiment);
  if (experiment == "banana") {
    plan.target_params = grid({-2.0, -1.75, -1.5, -1.25, -1.0, -0.75, -0.5});
  } else if (experiment == "funnel") {
    // log10(1 / beta) = -0.5, -0.25, 0, 0.25, 0.5
    plan.target_params = grid({0.5, 0.25, 0.0, -0.25, -0.5});
  } else if (experiment == "mixture") {
    plan.target_params = {2, 4, 6, 8, 10};
  } else if (experiment == "regression") {
    plan.M = {1, 2, 4, 6, 8, 10};
    plan.target_params = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  } else if (experiment == "lighthouse") {
    plan.M = {1, 10, 20, 30, 40, 50};
    plan.target_params = {0};
  } else if (experiment == "eight-schools") {
    plan.target_params = {0};
  } else if (experiment == "custom") {
    plan.target_params = {2};
  } else {
    throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
  }
  return plan;
}

ExperimentPlan parse_plan(std::istream& in) {
  ExperimentPlan plan;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("plan line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    try {
      const auto items = split_list(value);
      if (key == "experiment") {
        plan.experiment = value;
      } else if (key == "proposals") {
        plan.proposals.clear();
        for (const auto& s : items) plan.proposals.push_back(parse_proposal_kind(s));
      } else if (key == "weights") {
        plan.weights.clear();
        for (const auto& s : items) plan.weights.push_back(parse_weight_spec(s));
      } else if (key == "M") {
        plan.M.clear();
        for (const auto& s : items) plan.M.push_back(parse_unsigned(s));
      } else if (key == "target_param") {
        plan.target_params.clear();
        for (const auto& s : items) plan.target_params.push_back(parse_number(s));
      } else if (key == "replicates") {
        plan.replicates = parse_unsigned(value);
      } else if (key == "budget_iterations") {
        plan.budget_iterations = parse_unsigned(value);
      } else if (key == "budget_seconds") {
        plan.budget_seconds = parse_number(value);
      } else if (key == "max_iterations") {
        plan.max_iterations = parse_unsigned(value);
      } else if (key == "master_seed") {
        plan.master_seed = parse_unsigned(value);
      } else if (key == "dim") {
        plan.dim = parse_unsigned(value);
      } else if (key == "data") {
        plan.data = value;
      } else if (key == "regression_n") {
        plan.regression_n = parse_unsigned(value);
      } else if (key == "baseline_size") {
        plan.baseline_size = parse_unsigned(value);
      } else if (key == "scaling") {
        plan.scaling = parse_number(value);
      } else if (key == "het_spread") {
        plan.het_spread = parse_number(value);
      } else if (key == "n0") {
        plan.n0 = parse_unsigned(value);
      } else if (key == "covariance_rule") {
        plan.covariance_rule = parse_covariance_rule(value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("plan line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  plan.validate();
  return plan;
}

ExperimentPlan read_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plan file " + path);
  return parse_plan(in);
}

void write_plan(std::ostream& out, const ExperimentPlan& plan) {
  out << "experiment = " << plan.experiment << '\n';
  write_list(out, "proposals", plan.proposals, [](ProposalKind k) { return to_string(k); });
  write_list(out, "weights", plan.weights, [](const WeightSpec& w) { return to_string(w); });
  write_list(out, "M", plan.M, [](std::size_t m) { return std::to_string(m); });
  write_list(out, "target_param", plan.target_params, format_number);
  out << "replicates = " << plan.replicates << '\n';
  if (plan.budget_iterations) out << "budget_iterations = " << *plan.budget_iterations << '\n';
  if (plan.budget_seconds) out << "budget_seconds = " << format_number(*plan.budget_seconds) << '\n';
  out << "max_iterations = " << plan.max_iterations << '\n';
  out << "master_seed = " << plan.master_seed << '\n';
  if (plan.dim != 0) out << "dim = " << plan.dim << '\n';
  if (!plan.data.empty()) out << "data = " << plan.data << '\n';
  if (plan.experiment == "regression") out << "regression_n = " << plan.regression_n << '\n';
  if (plan.experiment == "mixture") out << "baseline_size = " << plan.baseline_size << '\n';
  out << "scaling = " << format_number(plan.scaling) << '\n';
  out << "het_spread = " << format_number(plan.het_spread) << '\n';
  out << "n0 = " << plan.n0 << '\n';
  out << "covariance_rule = " << to_string(plan.covariance_rule) << '\n';
}

std::string Cell::id() const {
  return experiment + "|" + format_number(target_param) + "|" + to_string(proposal) + "|" +
         to_string(weight) + "|" + std::to_string(M);
}

PlanExpansion expand_plan(const ExperimentPlan& plan) {
  plan.validate();
  PlanExpansion out;
  for (double param : plan.target_params) {
    for (auto kind : plan.proposals) {
      for (const auto& weight : plan.weights) {
        for (std::size_t M : plan.M) {
          ++out.settings;
          if (kind == ProposalKind::kHetCW && M < 2) continue;
          out.cells.push_back(Cell{plan.experiment, param, kind, weight, M});
        }
      }
    }
  }
  if (out.cells.empty()) throw ConfigError("plan has no runnable cells (het-cw needs M >= 2)");
  return out;
}

}  // namespace mtm
