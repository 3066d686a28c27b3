#pragma once

#include <iosfwd>
#include <string>

#include "sjl/core.hpp"

namespace sjl {

// Text form of a sampled matrix, chosen to diff cleanly: a header line
//   #sjl n=<n> m=<m> s=<s> flavor=<name> seed=<root-hex>:<stream-hex>
// followed by one line per column holding s comma-separated "row:+" or
// "row:-" entries in stored order.
void write_matrix(std::ostream& out, const SjlMatrix& a);
std::string matrix_to_string(const SjlMatrix& a);

// Parses the format above. Throws std::runtime_error on malformed input,
// out-of-range rows, or a column count that disagrees with the header.
SjlMatrix read_matrix(std::istream& in);
SjlMatrix matrix_from_string(const std::string& text);

}  // namespace sjl
