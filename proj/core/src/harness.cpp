#include "mtm/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "mtm/diagnostics.hpp"

namespace mtm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t param_as_size(double param, const char* what) {
  if (!(param >= 1.0) || param != std::floor(param)) {
    throw ConfigError(std::string(what) + " must be a positive integer, got " + format_number(param));
  }
  return static_cast<std::size_t>(param);
}

std::shared_ptr<const Target> build_target(const ExperimentPlan& plan, double param) {
  const auto& e = plan.experiment;
  if (e == "banana") {
    return std::make_shared<BananaTarget>(BananaParams{param, plan.dim == 0 ? 10 : plan.dim});
  }
  if (e == "funnel") {
    return std::make_shared<FunnelTarget>(FunnelParams{param, plan.dim == 0 ? 9 : plan.dim});
  }
  if (e == "mixture") {
    return std::make_shared<MixtureTarget>(MixtureParams::standard(param_as_size(param, "mixture d")));
  }
  if (e == "regression") {
    if (!(param >= 0.0) || param != std::floor(param)) {
      throw ConfigError("regression dataset seed must be a non-negative integer");
    }
    Vector beta(4);
    beta << 0.1, 5.0, -5.0, 10.0;
    return std::make_shared<RegressionTarget>(make_regression_dataset(
        static_cast<std::uint64_t>(param), plan.regression_n, 1.0, beta, 0.5));
  }
  if (e == "lighthouse") {
    if (plan.data.empty()) throw ConfigError("lighthouse plans need a data file");
    return std::make_shared<LighthouseTarget>(read_lighthouse_csv(plan.data));
  }
  if (e == "eight-schools") {
    return std::make_shared<EightSchoolsTarget>(
        plan.data.empty() ? EightSchoolsData::rubin() : read_eight_schools_csv(plan.data));
  }
  if (e == "custom") {
    return std::make_shared<GaussianTarget>(param_as_size(param, "custom dimension"));
  }
  throw ConfigError("unknown experiment '" + e + "'");
}

ResultRow base_row(const Cell& cell) {
  ResultRow row;
  row.experiment = cell.experiment;
  row.target_param = cell.target_param;
  row.proposal = to_string(cell.proposal);
  row.weight = to_string(cell.weight);
  row.M = cell.M;
  return row;
}

template <class F>
double guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception&) {
    return kNaN;
  }
}

}  // namespace

std::uint64_t hash64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64_finalize(h);
}

std::uint64_t replicate_seed(std::uint64_t master_seed, const Cell& cell, std::size_t r) {
  return hash64(std::to_string(master_seed) + "|" + cell.id() + "|" + std::to_string(r));
}

ExperimentContext::ExperimentContext(ExperimentPlan plan) : plan_(std::move(plan)) {
  plan_.validate();
  for (double param : plan_.target_params) {
    if (targets_.count(param) == 0) targets_.emplace(param, build_target(plan_, param));
    if (plan_.experiment == "mixture") {
      const auto d = param_as_size(param, "mixture d");
      if (baselines_.count(d) == 0) {
        const auto seed = hash64(std::to_string(plan_.master_seed) + "|baseline|" + std::to_string(d));
        baselines_.emplace(d, mixture_direct_sample(MixtureParams::standard(d), plan_.baseline_size, seed));
      }
    }
  }
}

std::shared_ptr<const Target> ExperimentContext::target(double target_param) const {
  const auto it = targets_.find(target_param);
  if (it == targets_.end()) throw ConfigError("no target for parameter " + format_number(target_param));
  return it->second;
}

Vector ExperimentContext::initial_state(double target_param) const {
  const auto t = target(target_param);
  Vector x = Vector::Zero(static_cast<Eigen::Index>(t->dim()));
  const auto& e = plan_.experiment;
  if (e == "funnel") x.tail(x.size() - 1).setOnes();
  if (e == "regression") x(x.size() - 1) = 1.0;
  if (e == "lighthouse") x(1) = 1.0;
  if (e == "eight-schools") x(1) = 1.0;
  return x;
}

const Matrix& ExperimentContext::baseline(std::size_t d) const {
  const auto it = baselines_.find(d);
  if (it == baselines_.end()) throw ConfigError("no mixture baseline for d = " + std::to_string(d));
  return it->second;
}

KernelConfig ExperimentContext::kernel_config(const Cell& cell) const {
  KernelConfig config;
  config.target = target(cell.target_param);
  config.proposal.kind = cell.proposal;
  config.proposal.M = cell.M;
  config.proposal.scaling = plan_.scaling;
  config.proposal.het_spread = plan_.het_spread;
  config.proposal.n0 = plan_.n0;
  config.proposal.rule = plan_.covariance_rule;
  config.weight = cell.weight;
  return config;
}

Budget ExperimentContext::budget() const {
  if (plan_.budget_iterations) return Budget::of_iterations(*plan_.budget_iterations);
  return Budget::of_seconds(*plan_.budget_seconds, plan_.max_iterations);
}

std::vector<ResultRow> run_replicate(const ExperimentContext& context, const Cell& cell,
                                     std::size_t r) {
  ResultRow row = base_row(cell);
  row.run = static_cast<long>(r);
  row.seed = replicate_seed(context.plan().master_seed, cell, r);

  ChainRun chain;
  try {
    ChainOptions options;
    options.budget = context.budget();
    options.seed = row.seed;
    chain = run_chain(context.kernel_config(cell), context.initial_state(cell.target_param), options);
  } catch (const std::exception&) {
    row.metric = kFailedMetric;
    row.value = kNaN;
    return {row};
  }
  row.n_iter = chain.n_iter;
  row.n_accept = chain.n_accept;
  row.wall_s = chain.wall_s;

  const Matrix states = chain.states();
  const auto n = static_cast<std::size_t>(states.rows());
  std::vector<ResultRow> out;
  auto emit = [&](std::string metric, double value) {
    ResultRow m = row;
    m.metric = std::move(metric);
    m.value = value;
    out.push_back(std::move(m));
  };

  if (cell.experiment == "mixture") {
    const Matrix& base = context.baseline(static_cast<std::size_t>(states.cols()));
    double best = kInf;
    for (std::size_t q = 1; q <= 3; ++q) {
      const std::size_t start = n * q / 4;
      const auto tail = static_cast<Eigen::Index>(n - start);
      const double ks = guarded([&] { return ks_distance(states.bottomRows(tail), base); });
      if (ks < best) {
        best = ks;
        row.burn_in = start;
      }
    }
    emit("ksd", std::isfinite(best) ? best : kNaN);
    return out;
  }

  row.burn_in = auto_burn_in(states);
  const auto kept = static_cast<Eigen::Index>(n - row.burn_in);
  const Matrix retained = states.bottomRows(kept);

  if (cell.experiment == "banana") {
    const double ess = guarded([&] { return mess(retained); });
    emit("mess", ess);
    emit("mess_per_iter", chain.n_iter > 0 ? ess / static_cast<double>(chain.n_iter) : kNaN);
    emit("mess_per_s", chain.wall_s > 0.0 ? ess / chain.wall_s : kNaN);
    return out;
  }
  if (cell.experiment == "funnel") {
    emit("mean_y", retained.col(0).mean());
    return out;
  }
  const auto names = context.target(cell.target_param)->coordinate_names();
  const Vector means = retained.colwise().mean().transpose();
  for (std::size_t k = 0; k < names.size(); ++k) {
    emit("mean[" + names[k] + "]", means(static_cast<Eigen::Index>(k)));
  }
  return out;
}

std::vector<ResultRow> cell_aggregates(const Cell& cell, const std::vector<ResultRow>& replicate_rows) {
  std::vector<std::string> metrics;
  std::map<std::string, std::vector<double>> values;
  for (const auto& r : replicate_rows) {
    if (r.run < 0 || r.metric.rfind("mean[", 0) != 0) continue;
    auto [it, inserted] = values.try_emplace(r.metric);
    if (inserted) metrics.push_back(r.metric);
    if (std::isfinite(r.value)) it->second.push_back(r.value);
  }
  std::vector<ResultRow> out;
  for (const auto& metric : metrics) {
    const auto filtered = iqr_outlier_filter(values[metric]);
    ResultRow row = base_row(cell);
    row.run = -1;
    row.metric = "mcse[" + metric.substr(5);
    row.value = filtered.retained.size() < 2 ? kNaN : mcse_across_runs(filtered.retained);
    out.push_back(row);
    row.metric = "discarded[" + metric.substr(5);
    row.value = static_cast<double>(filtered.discarded.size());
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ResultRow> run_cell(const ExperimentContext& context, const Cell& cell) {
  std::vector<ResultRow> rows;
  for (std::size_t r = 0; r < context.plan().replicates; ++r) {
    auto rep = run_replicate(context, cell, r);
    rows.insert(rows.end(), rep.begin(), rep.end());
  }
  auto agg = cell_aggregates(cell, rows);
  rows.insert(rows.end(), agg.begin(), agg.end());
  return rows;
}

std::vector<ResultRow> run_plan(const ExperimentPlan& plan, const RunOptions& options) {
  const ExperimentContext context(plan);
  const auto cells = expand_plan(plan).cells;
  const std::size_t R = plan.replicates;
  const std::size_t total = cells.size() * R;

  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  if (threads == 0) threads = 1;
  if (threads > total) threads = total;

  std::vector<std::vector<ResultRow>> results(total);
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      results[job] = run_replicate(context, cells[job / R], job % R);
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(++done, total);
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<ResultRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<ResultRow> cell_rows;
    for (std::size_t r = 0; r < R; ++r) {
      auto& rep = results[c * R + r];
      cell_rows.insert(cell_rows.end(), rep.begin(), rep.end());
    }
    auto agg = cell_aggregates(cells[c], cell_rows);
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    rows.insert(rows.end(), agg.begin(), agg.end());
  }
  return rows;
}

void write_run_metadata(std::ostream& out, const ExperimentPlan& plan, std::size_t threads,
                        double elapsed_seconds) {
  std::string cpu = "unknown";
  if (std::ifstream info("/proc/cpuinfo"); info) {
    std::string line;
    while (std::getline(info, line)) {
      if (line.rfind("model name", 0) == 0) {
        const auto colon = line.find(':');
        if (colon != std::string::npos) cpu = line.substr(colon + 2);
        break;
      }
    }
  }
  out << "experiment=" << plan.experiment << '\n';
  out << "master_seed=" << plan.master_seed << '\n';
  out << "replicates=" << plan.replicates << '\n';
  if (plan.budget_iterations) out << "budget_iterations=" << *plan.budget_iterations << '\n';
  if (plan.budget_seconds) out << "budget_seconds=" << format_number(*plan.budget_seconds) << '\n';
  out << "threads=" << threads << '\n';
  out << "hardware_concurrency=" << std::thread::hardware_concurrency() << '\n';
  out << "cpu=" << cpu << '\n';
#if defined(__clang__)
  out << "compiler=clang " << __clang_version__ << '\n';
#elif defined(__GNUC__)
  out << "compiler=gcc " << __VERSION__ << '\n';
#else
  out << "compiler=unknown\n";
#endif
  out << "eigen=" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION
      << '\n';
  out << "elapsed_s=" << format_number(elapsed_seconds) << '\n';
  out << "ks_multivariate=max over coordinates of the two-sample KS statistic\n";
  out << "burn_in_multivariate=max over coordinates of the per-coordinate block-walk N0\n";
  out << "mcse=sd of per-run posterior means after 1.5 IQR outlier removal\n";
}

}  // namespace mtm
