#include "cfn/sample_io.hpp"

#include <array>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "cfn/error.hpp"

namespace cfn {

namespace {

std::vector<int> identity(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

constexpr std::array<char, 4> kMagic{'C', 'F', 'N', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T x) {
  unsigned char b[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), sizeof b);
}

template <typename T>
T get_le(std::istream& in, std::size_t& offset, const char* field) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof b)) {
    throw ParseError(std::string("samples: truncated header field ") + field, 0, offset);
  }
  T x = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) x |= static_cast<T>(b[i]) << (8 * i);
  offset += sizeof b;
  return x;
}

}  // namespace

void write_samples_text(std::ostream& out, const SampleMatrix& m) {
  out << m.k() << ' ' << m.width() << '\n';
  std::string line;
  for (std::size_t t = 0; t < m.k(); ++t) {
    line.clear();
    for (std::size_t j = 0; j < m.width(); ++j) {
      if (j) line += ' ';
      line += m.at(t, j) > 0 ? "1" : "-1";
    }
    line += '\n';
    out << line;
  }
}

SampleMatrix read_samples_text(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("samples: missing header", 1, 1);
  std::istringstream header(line);
  long long k = -1, n = -1;
  std::string extra;
  if (!(header >> k >> n) || (header >> extra) || k < 0 || n < 0) {
    throw ParseError("samples: header must be two non-negative integers 'k n'", 1, 1);
  }
  SampleMatrix m(static_cast<std::size_t>(k), identity(static_cast<std::size_t>(n)));
  for (long long t = 0; t < k; ++t) {
    ++lineno;
    if (!std::getline(in, line)) throw ParseError("samples: expected " + std::to_string(k) + " rows", lineno, 1);
    std::size_t pos = 0, j = 0;
    while (true) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
      if (pos >= line.size()) break;
      const std::size_t start = pos;
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
      const std::string tok = line.substr(start, pos - start);
      if (tok != "1" && tok != "-1" && tok != "+1") {
        throw ParseError("samples: entry '" + tok + "' is not -1 or 1", lineno, start + 1);
      }
      if (j >= static_cast<std::size_t>(n)) throw ParseError("samples: too many entries in row", lineno, start + 1);
      m.set(static_cast<std::size_t>(t), j++, tok == "-1" ? -1 : 1);
    }
    if (j != static_cast<std::size_t>(n)) {
      throw ParseError("samples: row has " + std::to_string(j) + " entries, expected " + std::to_string(n), lineno,
                       line.size() + 1);
    }
  }
  return m;
}

void write_samples_binary(std::ostream& out, const SampleMatrix& m) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, m.k());
  put_le<std::uint64_t>(out, m.width());
  std::vector<char> packed((m.width() + 7) / 8);
  for (std::size_t t = 0; t < m.k(); ++t) {
    std::fill(packed.begin(), packed.end(), 0);
    for (std::size_t j = 0; j < m.width(); ++j) {
      if (m.at(t, j) > 0) packed[j / 8] = static_cast<char>(packed[j / 8] | (1 << (j % 8)));
    }
    out.write(packed.data(), static_cast<std::streamsize>(packed.size()));
  }
}

SampleMatrix read_samples_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ParseError("samples: bad magic bytes", 0, 0);
  std::size_t offset = 4;
  const auto version = get_le<std::uint32_t>(in, offset, "version");
  if (version != kVersion) throw ParseError("samples: unsupported version " + std::to_string(version), 0, 4);
  const auto k = get_le<std::uint64_t>(in, offset, "k");
  const auto n = get_le<std::uint64_t>(in, offset, "n");
  if (n > (std::uint64_t{1} << 32) || k > (std::uint64_t{1} << 40)) throw ParseError("samples: implausible dimensions", 0, 8);
  SampleMatrix m(k, identity(n));
  std::vector<unsigned char> packed((n + 7) / 8);
  for (std::uint64_t t = 0; t < k; ++t) {
    if (!in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()))) {
      throw ParseError("samples: truncated data in row " + std::to_string(t + 1), 0, offset);
    }
    for (std::uint64_t j = 0; j < n; ++j) m.set(t, j, (packed[j / 8] >> (j % 8)) & 1 ? 1 : -1);
    offset += packed.size();
  }
  return m;
}

}  // namespace cfn
