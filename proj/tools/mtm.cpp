#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mtm/balance.hpp"
#include "mtm/harness.hpp"
#include "mtm/plan.hpp"
#include "mtm/results.hpp"

namespace {

std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw mtm::ConfigError("cannot write " + path);
  return out;
}

int cmd_run(const std::string& plan_path, const std::string& output, std::size_t threads, bool quiet) {
  const auto plan = mtm::read_plan_file(plan_path);
  const auto expansion = mtm::expand_plan(plan);
  if (!quiet) {
    std::cerr << plan.experiment << ": " << expansion.settings << " settings, " << expansion.cells.size()
              << " runnable cells, " << plan.replicates << " replicates\n";
  }
  mtm::RunOptions options;
  options.threads = threads;
  if (!quiet) {
    options.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) std::cerr << "\r" << done << "/" << total << std::flush;
    };
  }
  const auto start = std::chrono::steady_clock::now();
  const auto rows = mtm::run_plan(plan, options);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!quiet) std::cerr << '\n';

  auto out = open_output(output);
  mtm::write_results_csv(out, rows);
  auto meta = open_output(output + ".meta");
  meta << "settings=" << expansion.settings << '\n' << "cells=" << expansion.cells.size() << '\n';
  mtm::write_run_metadata(meta, plan, threads, elapsed);
  return 0;
}

int cmd_verify(const std::string& csv_path, std::uint64_t seed, std::size_t points) {
  const auto report = mtm::run_verification_suite(seed, points);
  mtm::write_report_text(std::cout, report);
  if (!csv_path.empty()) {
    auto out = open_output(csv_path);
    mtm::write_report_csv(out, report);
  }
  return report.passed() ? 0 : 1;
}

int cmd_summarize(const std::string& input, const std::string& output) {
  std::ifstream in(input);
  if (!in) throw mtm::ConfigError("cannot open " + input);
  const auto summary = mtm::summarize(mtm::read_results_csv(in));
  if (output.empty() || output == "-") {
    mtm::write_summary_csv(std::cout, summary);
  } else {
    auto out = open_output(output);
    mtm::write_summary_csv(out, summary);
  }
  return 0;
}

int cmd_plan(const std::string& experiment, const std::string& output, const std::string& data) {
  auto plan = mtm::default_plan(experiment);
  if (!data.empty()) plan.data = data;
  const auto expansion = mtm::expand_plan(plan);
  auto emit = [&](std::ostream& out) {
    out << "# " << expansion.settings << " settings, " << expansion.cells.size() << " runnable cells\n";
    mtm::write_plan(out, plan);
  };
  if (output.empty() || output == "-") {
    emit(std::cout);
  } else {
    auto out = open_output(output);
    emit(out);
  }
  return 0;
}

int cmd_sample(const std::string& plan_path, std::size_t cell_index, std::size_t run,
               const std::string& output, const std::string& format, const std::string& trace,
               std::size_t trace_every) {
  const auto plan = mtm::read_plan_file(plan_path);
  const auto cells = mtm::expand_plan(plan).cells;
  if (cell_index >= cells.size()) {
    throw mtm::ConfigError("cell index " + std::to_string(cell_index) + " out of range (" +
                           std::to_string(cells.size()) + " cells)");
  }
  const mtm::ExperimentContext context(plan);
  const auto& cell = cells[cell_index];
  mtm::ChainOptions options;
  options.budget = context.budget();
  options.seed = mtm::replicate_seed(plan.master_seed, cell, run);
  options.trace_every = trace.empty() ? 0 : trace_every;
  const auto chain =
      mtm::run_chain(context.kernel_config(cell), context.initial_state(cell.target_param), options);
  std::cerr << cell.id() << ": " << chain.n_iter << " iterations, " << chain.n_accept << " accepted, "
            << chain.wall_s << " s\n";
  if (format == "bin") {
    auto out = open_output(output, std::ios::out | std::ios::binary);
    mtm::write_chain_binary(out, chain);
  } else {
    auto out = open_output(output);
    mtm::write_chain_csv(out, chain, context.target(cell.target_param)->coordinate_names());
  }
  if (!trace.empty()) {
    auto out = open_output(trace);
    mtm::write_trace_csv(out, chain);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-try Metropolis experiment runner"};
  app.require_subcommand(1);

  std::string plan_path;
  std::string output;
  std::size_t threads = 1;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run every cell of a plan and write a results CSV");
  run->add_option("plan", plan_path, "Plan file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "Results CSV")->default_val("results.csv");
  run->add_option("-j,--threads", threads, "Worker threads (0 = all cores)")->default_val(1);
  run->add_flag("-q,--quiet", quiet, "No progress output");

  std::string report_csv;
  std::uint64_t seed = 1;
  std::size_t points = 1000;
  auto* verify = app.add_subcommand("verify", "Run the balance checks; exit status 1 on any failure");
  verify->add_option("--csv", report_csv, "Also write the report as CSV");
  verify->add_option("--seed", seed, "Seed for sampled extended-space points")->default_val(1);
  verify->add_option("--points", points, "Sampled points per continuous check")->default_val(1000);

  std::string results_path;
  std::string summary_out;
  auto* summarize = app.add_subcommand("summarize", "Median and quantiles per cell and metric");
  summarize->add_option("results", results_path, "Results CSV")->required()->check(CLI::ExistingFile);
  summarize->add_option("-o,--output", summary_out, "Summary CSV (default stdout)");

  std::string experiment;
  std::string plan_out;
  std::string data;
  auto* plan = app.add_subcommand("plan", "Write the default plan for an experiment");
  plan->add_option("experiment", experiment, "Experiment name")->required();
  plan->add_option("-o,--output", plan_out, "Plan file (default stdout)");
  plan->add_option("--data", data, "Data file recorded in the plan");

  std::string sample_plan;
  std::size_t cell_index = 0;
  std::size_t sample_run = 0;
  std::string chain_out;
  std::string format;
  std::string trace_out;
  std::size_t trace_every = 100;
  auto* sample = app.add_subcommand("sample", "Run one replicate of one cell and write the chain");
  sample->add_option("plan", sample_plan, "Plan file")->required()->check(CLI::ExistingFile);
  sample->add_option("--cell", cell_index, "Cell index in plan order")->default_val(0);
  sample->add_option("--run", sample_run, "Replicate index")->default_val(0);
  sample->add_option("-o,--output", chain_out, "Chain file")->default_val("chain.csv");
  sample->add_option("--format", format, "csv or bin")->default_val("csv")->check(CLI::IsMember({"csv", "bin"}));
  sample->add_option("--trace", trace_out, "Write proposal adaptation trace CSV");
  sample->add_option("--trace-every", trace_every, "Trace interval in iterations")->default_val(100);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(plan_path, output, threads, quiet);
    if (*verify) return cmd_verify(report_csv, seed, points);
    if (*summarize) return cmd_summarize(results_path, summary_out);
    if (*plan) return cmd_plan(experiment, plan_out, data);
    if (*sample) {
      return cmd_sample(sample_plan, cell_index, sample_run, chain_out, format, trace_out, trace_every);
    }
  } catch (const std::exception& e) {
    std::cerr << "mtm: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
