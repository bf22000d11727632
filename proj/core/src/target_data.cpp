#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mtm/targets.hpp"

namespace mtm {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("not a number: '" + s + "'");
  return value;
}

/// Reads a header + records table, skipping blank lines.
std::vector<std::vector<std::string>> read_table(std::istream& in, std::vector<std::string>& header) {
  std::string line;
  header.clear();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (header.empty()) {
      header = std::move(fields);
      continue;
    }
    if (fields.size() != header.size()) {
      throw std::invalid_argument("csv: record has " + std::to_string(fields.size()) +
                                  " fields, header has " + std::to_string(header.size()));
    }
    rows.push_back(std::move(fields));
  }
  if (header.empty()) throw std::invalid_argument("csv: missing header row");
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::invalid_argument("csv: missing column '" + name + "'");
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

EightSchoolsData read_eight_schools_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_table(in, header);
  const auto effect = column(header, "effect");
  const auto sd = column(header, "sd");
  EightSchoolsData data;
  for (const auto& row : rows) {
    data.effects.push_back(parse_double(row[effect]));
    data.sds.push_back(parse_double(row[sd]));
  }
  // Validates length and positivity.
  (void)EightSchoolsTarget{data};
  return data;
}

EightSchoolsData read_eight_schools_csv(const std::string& path) {
  auto in = open(path);
  return read_eight_schools_csv(in);
}

void write_eight_schools_csv(std::ostream& out, const EightSchoolsData& data) {
  out << "school,effect,sd\n" << std::setprecision(17);
  for (std::size_t i = 0; i < data.effects.size(); ++i) {
    out << static_cast<char>('A' + i) << ',' << data.effects[i] << ',' << data.sds[i] << '\n';
  }
}

LighthouseData read_lighthouse_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_table(in, header);
  const auto flash = column(header, "flash");
  if (rows.size() != 3) {
    throw std::invalid_argument("lighthouse: expected exactly 3 flashes, got " +
                                std::to_string(rows.size()));
  }
  LighthouseData data;
  for (std::size_t i = 0; i < 3; ++i) data.flashes[i] = parse_double(rows[i][flash]);
  return data;
}

LighthouseData read_lighthouse_csv(const std::string& path) {
  auto in = open(path);
  return read_lighthouse_csv(in);
}

void write_lighthouse_csv(std::ostream& out, const LighthouseData& data) {
  out << "flash\n" << std::setprecision(17);
  for (double f : data.flashes) out << f << '\n';
}

RegressionDataset read_regression_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_table(in, header);
  if (header.empty() || header[0] != "y") {
    throw std::invalid_argument("regression csv: first column must be 'y'");
  }
  if (rows.empty()) throw std::invalid_argument("regression csv: no observations");
  RegressionDataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  data.X.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    data.y[i] = parse_double(row[0]);
    for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = parse_double(row[static_cast<std::size_t>(j) + 1]);
  }
  return data;
}

void write_regression_csv(std::ostream& out, const RegressionDataset& data) {
  out << 'y';
  for (std::size_t j = 1; j <= data.d(); ++j) out << ",x" << j;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    out << data.y[i];
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << ',' << data.X(i, j);
    out << '\n';
  }
}

}  // namespace mtm
