#include "sjl/matrix_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sjl {

namespace {

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("matrix parse: " + what);
}

// Pulls the value of "key=" out of the header, as text.
std::string header_field(const std::string& header, const std::string& key) {
  const std::string needle = " " + key + "=";
  const auto at = header.find(needle);
  if (at == std::string::npos) fail("header is missing " + key);
  const auto start = at + needle.size();
  const auto end = header.find(' ', start);
  return header.substr(start, end == std::string::npos ? end : end - start);
}

long long parse_int(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used != text.size()) fail("trailing characters in " + what);
    return value;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception&) {
    fail("bad integer in " + what);
  }
}

}  // namespace

void write_matrix(std::ostream& out, const SjlMatrix& a) {
  out << "#sjl n=" << a.params.n << " m=" << a.params.m << " s=" << a.params.s
      << " flavor=" << to_string(a.params.flavor) << " seed=" << hex64(a.seed.root)
      << ':' << hex64(a.seed.stream) << '\n';
  for (Index column = 0; column < a.params.n; ++column) {
    for (Index k = 0; k < a.params.s; ++k) {
      if (k > 0) out << ',';
      out << a.row_at(column, k) << (a.sign_at(column, k) > 0.0 ? ":+" : ":-");
    }
    out << '\n';
  }
}

std::string matrix_to_string(const SjlMatrix& a) {
  std::ostringstream out;
  write_matrix(out, a);
  return out.str();
}

SjlMatrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("#sjl ", 0) != 0)
    fail("expected a #sjl header line");

  SjlMatrix a;
  a.params.n = parse_int(header_field(header, "n"), "n");
  a.params.m = parse_int(header_field(header, "m"), "m");
  a.params.s = parse_int(header_field(header, "s"), "s");
  try {
    a.params.flavor = flavor_from_string(header_field(header, "flavor"));
  } catch (const std::invalid_argument& err) {
    fail(err.what());
  }
  const std::string seed = header_field(header, "seed");
  const auto colon = seed.find(':');
  if (colon == std::string::npos || seed.size() != 33) fail("bad seed field");
  try {
    a.seed.root = std::stoull(seed.substr(0, colon), nullptr, 16);
    a.seed.stream = std::stoull(seed.substr(colon + 1), nullptr, 16);
  } catch (const std::exception&) {
    fail("bad seed field");
  }
  try {
    a.params.validate();
  } catch (const std::invalid_argument& err) {
    fail(err.what());
  }

  a.rows.reserve(std::size_t(a.params.n * a.params.s));
  a.signs.reserve(std::size_t(a.params.n * a.params.s));
  std::string line;
  for (Index column = 0; column < a.params.n; ++column) {
    if (!std::getline(in, line))
      fail("expected " + std::to_string(a.params.n) + " column lines");
    std::istringstream fields(line);
    std::string entry;
    Index count = 0;
    while (std::getline(fields, entry, ',')) {
      const auto colon_at = entry.find(':');
      if (colon_at == std::string::npos || colon_at + 2 != entry.size())
        fail("bad entry '" + entry + "'");
      const long long row = parse_int(entry.substr(0, colon_at), "row index");
      if (row < 0 || row >= a.params.m) fail("row index out of range");
      const char sign = entry[colon_at + 1];
      if (sign != '+' && sign != '-') fail("bad sign in '" + entry + "'");
      a.rows.push_back(std::int32_t(row));
      a.signs.push_back(sign == '+' ? 1 : -1);
      ++count;
    }
    if (count != a.params.s)
      fail("column " + std::to_string(column) + " holds " +
           std::to_string(count) + " entries, expected " +
           std::to_string(a.params.s));
  }
  return a;
}

SjlMatrix matrix_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in);
}

}  // namespace sjl
