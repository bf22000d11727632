#include "mtm/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "mtm/diagnostics.hpp"
#include "mtm/plan.hpp"

namespace mtm {
namespace {

constexpr const char* kResultsHeader =
    "experiment,target_param,proposal,weight,M,run,seed,n_iter,n_accept,burn_in,wall_s,metric,value";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& s) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("results csv: bad number '" + s + "'");
  }
  return v;
}

template <class Int>
Int to_int(const std::string& s) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("results csv: bad integer '" + s + "'");
  }
  return v;
}

std::string fmt(double v) { return std::isnan(v) ? "nan" : format_number(v); }

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.experiment << ',' << fmt(r.target_param) << ',' << r.proposal << ',' << r.weight << ','
        << r.M << ',' << r.run << ',' << r.seed << ',' << r.n_iter << ',' << r.n_accept << ','
        << r.burn_in << ',' << fmt(r.wall_s) << ',' << r.metric << ',' << fmt(r.value) << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("results csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw std::invalid_argument("results csv: unexpected header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 13) {
      throw std::invalid_argument("results csv line " + std::to_string(line_no) + ": expected 13 fields");
    }
    ResultRow r;
    r.experiment = f[0];
    r.target_param = to_double(f[1]);
    r.proposal = f[2];
    r.weight = f[3];
    r.M = to_int<std::size_t>(f[4]);
    r.run = to_int<long>(f[5]);
    r.seed = to_int<std::uint64_t>(f[6]);
    r.n_iter = to_int<std::size_t>(f[7]);
    r.n_accept = to_int<std::size_t>(f[8]);
    r.burn_in = to_int<std::size_t>(f[9]);
    r.wall_s = to_double(f[10]);
    r.metric = f[11];
    r.value = to_double(f[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  using Key = std::tuple<std::string, std::string, std::string, std::string, std::size_t, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    const Key key{r.experiment, format_number(r.target_param), r.proposal, r.weight, r.M, r.metric};
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) {
      SummaryRow s;
      s.experiment = r.experiment;
      s.target_param = r.target_param;
      s.proposal = r.proposal;
      s.weight = r.weight;
      s.M = r.M;
      s.metric = r.metric;
      out.push_back(std::move(s));
      values.emplace_back();
    }
    if (std::isfinite(r.value)) {
      values[it->second].push_back(r.value);
    } else {
      ++out[it->second].n_nonfinite;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& v = values[k];
    auto& s = out[k];
    s.n = v.size();
    if (v.empty()) {
      s.median = s.q05 = s.q25 = s.q75 = s.q95 = nan;
      continue;
    }
    std::sort(v.begin(), v.end());
    s.median = quantile_type7_sorted(v, 0.5);
    s.q05 = quantile_type7_sorted(v, 0.05);
    s.q25 = quantile_type7_sorted(v, 0.25);
    s.q75 = quantile_type7_sorted(v, 0.75);
    s.q95 = quantile_type7_sorted(v, 0.95);
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "experiment,target_param,proposal,weight,M,metric,n,n_nonfinite,median,q05,q25,q75,q95\n";
  for (const auto& s : rows) {
    out << s.experiment << ',' << fmt(s.target_param) << ',' << s.proposal << ',' << s.weight << ','
        << s.M << ',' << s.metric << ',' << s.n << ',' << s.n_nonfinite << ',' << fmt(s.median)
        << ',' << fmt(s.q05) << ',' << fmt(s.q25) << ',' << fmt(s.q75) << ',' << fmt(s.q95) << '\n';
  }
}

}  // namespace mtm
