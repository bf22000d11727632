#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <istream>
#include <ostream>

#include "mtm/kernel.hpp"

namespace mtm {
namespace {

constexpr std::array<char, 8> kMagic{'M', 'T', 'M', 'C', 'H', 'A', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& out, T v) {
  const T le = to_little(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("chain file: unexpected end of data");
  return to_little(v);
}

void put_number(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_chain_csv(std::ostream& out, const ChainRun& chain,
                     const std::vector<std::string>& coordinate_names) {
  if (coordinate_names.size() != chain.dim) {
    throw std::invalid_argument("write_chain_csv: coordinate name count does not match dim");
  }
  out << "iteration";
  for (const auto& name : coordinate_names) out << ',' << name;
  out << ",accepted\n";
  for (std::size_t r = 0; r < chain.rows(); ++r) {
    out << r;
    for (std::size_t j = 0; j < chain.dim; ++j) {
      out << ',';
      put_number(out, chain.values[r * chain.dim + j]);
    }
    out << ',' << static_cast<int>(chain.accepted[r]) << '\n';
  }
}

void write_chain_binary(std::ostream& out, const ChainRun& chain) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(chain.dim));
  put<std::uint64_t>(out, chain.rows());
  for (std::size_t r = 0; r < chain.rows(); ++r) {
    put<double>(out, static_cast<double>(r));
    for (std::size_t j = 0; j < chain.dim; ++j) put<double>(out, chain.values[r * chain.dim + j]);
    put<double>(out, chain.accepted[r] ? 1.0 : 0.0);
  }
}

ChainRun read_chain_binary(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("chain file: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("chain file: unsupported version " + std::to_string(version));
  }
  ChainRun chain;
  chain.dim = get<std::uint32_t>(in);
  const auto rows = get<std::uint64_t>(in);
  chain.values.reserve(rows * chain.dim);
  chain.accepted.reserve(rows);
  for (std::uint64_t r = 0; r < rows; ++r) {
    (void)get<double>(in);
    for (std::size_t j = 0; j < chain.dim; ++j) chain.values.push_back(get<double>(in));
    const bool accepted = get<double>(in) != 0.0;
    chain.accepted.push_back(accepted ? 1 : 0);
    chain.n_accept += (r > 0 && accepted) ? 1 : 0;
  }
  chain.n_iter = rows == 0 ? 0 : rows - 1;
  return chain;
}

void write_trace_csv(std::ostream& out, const ChainRun& chain) {
  out << "iteration";
  for (const auto& c : chain.trace_columns) out << ',' << c;
  out << '\n';
  for (std::size_t k = 0; k < chain.trace_iterations.size(); ++k) {
    out << chain.trace_iterations[k];
    for (double v : chain.trace_values[k]) {
      out << ',';
      put_number(out, v);
    }
    out << '\n';
  }
}

}  // namespace mtm
