#include "sjl/exact.hpp"

#include <algorithm>

namespace sjl {
namespace detail {

namespace {

// C(m, s) with a cap so table sizes stay sane; returns cap + 1 on overflow.
std::uint64_t binomial_capped(Index m, Index s, std::uint64_t cap) {
  long double value = 1.0L;
  for (Index k = 1; k <= s; ++k) {
    value *= (long double)(m - s + k) / (long double)k;
    if (value > (long double)cap * 2) return cap + 1;
  }
  return std::uint64_t(std::llroundl(value));
}

constexpr std::uint64_t kTableCap = 1u << 22;

}  // namespace

SupportTable build_supports(const SjlParams& params) {
  SupportTable table;
  table.s = params.s;
  const Index m = params.m;
  const Index s = params.s;
  if (params.flavor == Flavor::kUniform) {
    const std::uint64_t count = binomial_capped(m, s, kTableCap);
    if (count > kTableCap)
      throw BudgetError("enumeration: support table exceeds the budget cap");
    table.count = count;
    table.rows.reserve(std::size_t(count) * std::size_t(s));
    std::vector<std::int32_t> pick(static_cast<std::size_t>(s));
    for (Index k = 0; k < s; ++k) pick[std::size_t(k)] = std::int32_t(k);
    for (;;) {
      table.rows.insert(table.rows.end(), pick.begin(), pick.end());
      // next combination in lexicographic order
      Index k = s - 1;
      while (k >= 0 && pick[std::size_t(k)] == std::int32_t(m - s + k)) --k;
      if (k < 0) break;
      ++pick[std::size_t(k)];
      for (Index j = k + 1; j < s; ++j) pick[std::size_t(j)] = pick[std::size_t(j - 1)] + 1;
    }
  } else {
    const Index height = m / s;
    long double total = 1.0L;
    for (Index k = 0; k < s; ++k) {
      total *= (long double)height;
      if (total > (long double)kTableCap * 2) break;
    }
    if (total > (long double)kTableCap)
      throw BudgetError("enumeration: support table exceeds the budget cap");
    const std::uint64_t count = std::uint64_t(std::llroundl(total));
    table.count = count;
    table.rows.reserve(std::size_t(count) * std::size_t(s));
    std::vector<std::int32_t> digit(std::size_t(s), 0);
    for (std::uint64_t u = 0; u < count; ++u) {
      for (Index k = 0; k < s; ++k)
        table.rows.push_back(std::int32_t(k * height) + digit[std::size_t(k)]);
      // increment the mixed-radix counter, last digit fastest
      Index k = s - 1;
      while (k >= 0 && ++digit[std::size_t(k)] == std::int32_t(height)) {
        digit[std::size_t(k)] = 0;
        --k;
      }
    }
  }
  return table;
}

double column_config_bits(const SjlParams& params, const EnumerationBudget& budget) {
  const std::uint64_t cap = std::min<std::uint64_t>(budget.max_configs, kTableCap);
  std::uint64_t supports;
  if (params.flavor == Flavor::kUniform) {
    supports = binomial_capped(params.m, params.s, cap);
  } else {
    long double total = 1.0L;
    for (Index k = 0; k < params.s; ++k) total *= (long double)(params.m / params.s);
    supports = total > (long double)cap * 2 ? cap + 1 : std::uint64_t(std::llroundl(total));
  }
  if (supports > cap)
    throw BudgetError("enumeration: per-column configurations exceed the budget");
  return std::log2(double(supports)) + double(params.s);
}

std::vector<Index> support_indices(const UnitVector& x) {
  std::vector<Index> support;
  for (Index i = 0; i < x.values.size(); ++i)
    if (x.values[i] != 0.0) support.push_back(i);
  if (support.empty()) throw std::invalid_argument("enumerate: x has empty support");
  return support;
}

void check_budget_bits(double bits, const EnumerationBudget& budget) {
  if (bits > std::log2(double(budget.max_configs)) + 1e-9)
    throw BudgetError("enumeration: configuration count exceeds the budget");
}

}  // namespace detail

MomentEstimate exact_moment(const SjlParams& params, const UnitVector& x, int q,
                            const EnumerationBudget& budget) {
  if (q < 1) throw std::invalid_argument("moment order q must be at least 1");
  CompensatedSum acc;
  const std::uint64_t total = enumerate_error(
      params, x, budget, [&](double r) { acc.add(ipow(std::abs(r), q)); });
  MomentEstimate est;
  est.q = q;
  est.method = Method::kExact;
  est.value = std::pow(acc.value() / double(total), 1.0 / double(q));
  return est;
}

double exact_raw_moment(const SjlParams& params, const UnitVector& x, int q,
                        const EnumerationBudget& budget) {
  if (q < 1) throw std::invalid_argument("moment order q must be at least 1");
  CompensatedSum acc;
  const std::uint64_t total =
      enumerate_error(params, x, budget, [&](double r) { acc.add(ipow(r, q)); });
  return acc.value() / double(total);
}

double exact_tail(const SjlParams& params, const UnitVector& x, double eps,
                  const EnumerationBudget& budget) {
  if (!(eps >= 0.0)) throw std::invalid_argument("tail level eps must be non-negative");
  std::uint64_t hits = 0;
  const std::uint64_t total = enumerate_error(params, x, budget, [&](double r) {
    if (std::abs(r) > eps) ++hits;
  });
  return double(hits) / double(total);
}

double exact_max_abs_error(const SjlParams& params, const UnitVector& x,
                           const EnumerationBudget& budget) {
  double worst = 0.0;
  enumerate_error(params, x, budget,
                  [&](double r) { worst = std::max(worst, std::abs(r)); });
  return worst;
}

MomentEstimate exact_row_moment(const SjlParams& params, const UnitVector& x, int t,
                                bool indicator_two, const EnumerationBudget& budget) {
  if (t < 1) throw std::invalid_argument("moment order t must be at least 1");
  CompensatedSum acc;
  enumerate_row_error(params, x, budget, [&](double z, double w, Index present) {
    if (indicator_two && present != 2) return;
    acc.add(w * ipow(std::abs(z), t));
  });
  MomentEstimate est;
  est.q = t;
  est.method = Method::kExact;
  est.value = std::pow(acc.value(), 1.0 / double(t));
  return est;
}

}  // namespace sjl
