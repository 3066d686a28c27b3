#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sjl/accumulate.hpp"
#include "sjl/core.hpp"

namespace sjl {

// Cap on the number of equally weighted configurations an enumeration may
// visit. Zero coordinates of x cost nothing; only its support counts.
struct EnumerationBudget {
  std::uint64_t max_configs = 100'000'000;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Every admissible support of one column, flattened: entry i occupies
// rows[i * s .. i * s + s), sorted ascending.
struct SupportTable {
  Index s = 0;
  std::uint64_t count = 0;
  std::vector<std::int32_t> rows;
};

SupportTable build_supports(const SjlParams& params);

// log2 of the per-column configuration count (supports times sign patterns);
// throws when the support table alone would blow the budget.
double column_config_bits(const SjlParams& params, const EnumerationBudget& budget);

std::vector<Index> support_indices(const UnitVector& x);

void check_budget_bits(double bits, const EnumerationBudget& budget);

}  // namespace detail

// Visits R once per equally likely configuration of the matrix restricted to
// the support of x; returns the configuration count. Throws BudgetError when
// (supports * 2^s) ^ |support| exceeds the budget.
template <class Visit>
std::uint64_t enumerate_error(const SjlParams& params, const UnitVector& x,
                              const EnumerationBudget& budget, Visit&& visit) {
  params.validate();
  if (x.values.size() != params.n)
    throw std::invalid_argument("enumerate: dimension mismatch");
  const std::vector<Index> support = detail::support_indices(x);
  const double per_column_bits = detail::column_config_bits(params, budget);
  detail::check_budget_bits(per_column_bits * double(support.size()), budget);

  const detail::SupportTable table = detail::build_supports(params);
  const Index s = params.s;
  const Index m = params.m;
  const std::size_t levels = support.size();
  const std::uint64_t masks = std::uint64_t(1) << s;

  std::vector<double> xval(levels);
  for (std::size_t d = 0; d < levels; ++d) xval[d] = x.values[support[d]];

  // Row sums before column d is applied; level 0 is all zero.
  std::vector<std::vector<double>> t(levels + 1, std::vector<double>(std::size_t(m), 0.0));

  std::uint64_t count = 0;
  const double inv_s = 1.0 / double(s);

  const auto descend = [&](const auto& self, std::size_t d) -> void {
    if (d + 1 == levels) {
      // Leaf level: adjust the parent's squared norm per configuration.
      CompensatedSum parent_sq;
      const std::vector<double>& base = t[d];
      for (Index r = 0; r < m; ++r) parent_sq.add(base[std::size_t(r)] * base[std::size_t(r)]);
      const double sq0 = parent_sq.value();
      const double xc = xval[d];
      for (std::uint64_t u = 0; u < table.count; ++u) {
        const std::int32_t* rows = table.rows.data() + u * std::uint64_t(s);
        for (std::uint64_t mask = 0; mask < masks; ++mask) {
          double adj = 0.0;
          for (Index k = 0; k < s; ++k) {
            const double tr = base[std::size_t(rows[k])];
            const double tn = tr + ((mask >> k) & 1 ? -xc : xc);
            adj += tn * tn - tr * tr;
          }
          visit((sq0 + adj) * inv_s - 1.0);
          ++count;
        }
      }
      return;
    }
    const double xc = xval[d];
    for (std::uint64_t u = 0; u < table.count; ++u) {
      const std::int32_t* rows = table.rows.data() + u * std::uint64_t(s);
      for (std::uint64_t mask = 0; mask < masks; ++mask) {
        t[d + 1] = t[d];
        for (Index k = 0; k < s; ++k)
          t[d + 1][std::size_t(rows[k])] += (mask >> k) & 1 ? -xc : xc;
        self(self, d + 1);
      }
    }
  };
  descend(descend, 0);
  return count;
}

// Visits (Z, probability, support size) for every configuration of one row
// restricted to supp(x): each coordinate is absent, or present with either
// sign. Probabilities marginalize the column supports, which are identical
// across flavors row by row.
template <class Visit>
void enumerate_row_error(const SjlParams& params, const UnitVector& x,
                         const EnumerationBudget& budget, Visit&& visit) {
  params.validate();
  if (x.values.size() != params.n)
    throw std::invalid_argument("enumerate: dimension mismatch");
  const std::vector<Index> support = detail::support_indices(x);
  detail::check_budget_bits(2.0 * double(support.size()), budget);

  const double p_in = double(params.s) / double(params.m);
  const double w_absent = 1.0 - p_in;
  const double w_signed = p_in / 2.0;
  const std::size_t levels = support.size();

  std::vector<double> xval(levels);
  for (std::size_t d = 0; d < levels; ++d) xval[d] = x.values[support[d]];

  const auto descend = [&](const auto& self, std::size_t d, double a, double b,
                           double w, Index present) -> void {
    if (d == levels) {
      visit(a * a - b, w, present);
      return;
    }
    const double xc = xval[d];
    self(self, d + 1, a, b, w * w_absent, present);
    self(self, d + 1, a + xc, b + xc * xc, w * w_signed, present + 1);
    self(self, d + 1, a - xc, b + xc * xc, w * w_signed, present + 1);
  };
  descend(descend, 0, 0.0, 0.0, 1.0, 0);
}

// (E |R|^q)^(1/q) by full enumeration; q >= 1.
MomentEstimate exact_moment(const SjlParams& params, const UnitVector& x, int q,
                            const EnumerationBudget& budget = {});

// Signed E[R^q] by full enumeration; q >= 1.
double exact_raw_moment(const SjlParams& params, const UnitVector& x, int q,
                        const EnumerationBudget& budget = {});

// P[|R| > eps], strict, as an exact configuration count ratio.
double exact_tail(const SjlParams& params, const UnitVector& x, double eps,
                  const EnumerationBudget& budget = {});

// max |R| over all configurations.
double exact_max_abs_error(const SjlParams& params, const UnitVector& x,
                           const EnumerationBudget& budget = {});

// (E |Z|^t)^(1/t) for the single-row error Z; indicator_two restricts to
// configurations where exactly two support coordinates are present.
MomentEstimate exact_row_moment(const SjlParams& params, const UnitVector& x, int t,
                                bool indicator_two = false,
                                const EnumerationBudget& budget = {});

}  // namespace sjl
