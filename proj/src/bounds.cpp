#include "sjl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace sjl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt of a log value that may have gone negative; flags instead of NaN.
double sqrt_or_flag(double arg, RegimeFlags& flags) {
  if (arg < 0.0) {
    flags.log_domain = true;
    flags.not_applicable = true;
    return 0.0;
  }
  return std::sqrt(arg);
}

void check_unit_interval(double value, const char* name) {
  if (!(value > 0.0) || !(value < 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
}

// true when 1/v^2 rounds to an even integer, the shape the hard-vector
// lower bounds require.
bool inverse_square_even(double v) {
  const double raw = 1.0 / (v * v);
  const auto n = std::llround(raw);
  return n >= 2 && n % 2 == 0 && std::abs(raw - double(n)) <= 1e-9 * raw;
}

void check_geometry(double m, double s) {
  if (!std::isfinite(m) || !std::isfinite(s) || m < 1.0 || s < 1.0 || s > m)
    throw std::invalid_argument("bound query: needs 1 <= s <= m");
}

void pick_largest(RegimeReport& report) {
  const auto best = std::max_element(
      report.applicable.begin(), report.applicable.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  report.branch = best->first;
  report.value = best->second;
}

}  // namespace

ThresholdQuery ThresholdQuery::make(Index m, double eps, double delta, Index s,
                                    const BoundConstants& constants) {
  ThresholdQuery q;
  q.m = m;
  q.eps = eps;
  q.delta = delta;
  q.s = s;
  q.p = std::log(1.0 / delta);
  q.constants = constants;
  q.validate();
  return q;
}

void ThresholdQuery::validate() const {
  if (m < 1) throw std::invalid_argument("threshold query: m must be at least 1");
  if (s < 1) throw std::invalid_argument("threshold query: s must be at least 1");
  check_unit_interval(eps, "eps");
  check_unit_interval(delta, "delta");
  const double expect = std::log(1.0 / delta);
  if (std::abs(p - expect) > 1e-12 * std::max(1.0, std::abs(expect)))
    throw std::invalid_argument("threshold query: p must equal log(1/delta)");
  constants.validate();
}

RegimeReport eval_g(const ThresholdQuery& q) {
  q.validate();
  const BoundConstants& c = q.constants;
  const double m = double(q.m);
  const double s = double(q.s);
  const double eps = q.eps;
  const double p = q.p;
  const double log_m = std::log(m);
  const double log_eps = std::log(eps);

  RegimeReport report;
  report.inputs = {
      {"m", m}, {"eps", eps}, {"delta", q.delta}, {"s", s}, {"p", p}};
  report.flags.s_out_of_range = s > c.c_s * p / eps;

  // Exponential cutoffs live in log space so they cannot overflow.
  const double cut_one = -2.0 * log_eps + std::min(std::log(2.0) + p,
                                                   std::log(p) + c.c_u * p / (eps * s));
  const double cut_split = std::log(s) + c.c_s * p / (eps * s);
  const double floor = c.c_m * p / (eps * eps);

  const bool guard_one = log_m >= cut_one;
  const bool guard_sqrt = m >= floor && log_m >= cut_split;
  const bool guard_min = m >= floor && log_m < cut_split;

  if (guard_one) {
    report.branch = "one";
    report.value = 1.0;
    report.flags.overlap = guard_sqrt || guard_min;
    return report;
  }

  const double lead = c.c_v * std::sqrt(eps * s);
  const double sqrt_p = std::sqrt(p);
  const double l2 = log_m + 2.0 * log_eps - std::log(p);  // log(m eps^2 / p)
  if (guard_sqrt) {
    report.branch = "sqrt-log";
    const double root = sqrt_or_flag(l2, report.flags);
    report.value =
        report.flags.not_applicable ? 0.0 : std::min(1.0, lead * root / sqrt_p);
    return report;
  }
  if (guard_min) {
    report.branch = "min-log";
    const double l1 = log_m + log_eps - std::log(p);  // log(m eps / p)
    const double root = sqrt_or_flag(l2, report.flags);
    report.value = report.flags.not_applicable
                       ? 0.0
                       : std::min(1.0, lead * std::min(l1 / p, root / sqrt_p));
    return report;
  }
  report.branch = "below-domain";
  report.flags.below_domain = true;
  return report;
}

RegimeReport eval_h(const ThresholdQuery& q) {
  q.validate();
  const BoundConstants& c = q.constants;
  const double m = double(q.m);
  const double s = double(q.s);
  const double eps = q.eps;
  const double p = q.p;
  const double log_m = std::log(m);
  const double log_eps = std::log(eps);

  RegimeReport report;
  report.inputs = {
      {"m", m}, {"eps", eps}, {"delta", q.delta}, {"s", s}, {"p", p}};

  // Hypothesis ranges of the surrounding result; they do not change the value.
  report.flags.s_out_of_range = s > c.c_s * p / eps;
  report.flags.m_out_of_range = log_m > -2.0 * log_eps + c.c_e2 * p;

  const double cut_zero = c.c_m1 * p / (eps * eps);
  const double cut_floor = c.c_m2 * p / (eps * eps);
  const double cut_split = std::log(s) + c.c_e1 * p / (eps * s);

  const bool guard_zero = m <= cut_zero;
  const bool guard_sqrt = m >= cut_floor && log_m >= cut_split;
  const bool guard_min = m >= cut_floor && log_m < cut_split;

  if (guard_zero) {
    report.branch = "zero";
    report.flags.overlap = guard_sqrt || guard_min;
    return report;
  }

  const double lead = c.c_v * std::sqrt(eps * s);
  const double sqrt_p = std::sqrt(p);
  const double l2 = log_m + 2.0 * log_eps - std::log(p);
  if (guard_sqrt) {
    report.branch = "sqrt-log";
    const double root = sqrt_or_flag(l2, report.flags);
    report.value = report.flags.not_applicable ? 0.0 : lead * root / sqrt_p;
  } else if (guard_min) {
    report.branch = "min-log";
    const double l1 = log_m + log_eps - std::log(p);
    const double root = sqrt_or_flag(l2, report.flags);
    report.value = report.flags.not_applicable
                       ? 0.0
                       : lead * std::min(l1 / p, root / sqrt_p);
  } else {
    report.branch = "gap";
    report.flags.indeterminate = true;
  }
  report.flags.gate_exceeded = report.value > 0.5;
  return report;
}

RegimeReport eval_f_fkl(Index m_in, double eps, double delta,
                        const BoundConstants& constants) {
  if (m_in < 1) throw std::invalid_argument("threshold query: m must be at least 1");
  check_unit_interval(eps, "eps");
  check_unit_interval(delta, "delta");
  constants.validate();

  const double m = double(m_in);
  const double p = std::log(1.0 / delta);
  const double log_m = std::log(m);
  const double log_eps = std::log(eps);

  RegimeReport report;
  report.inputs = {{"m", m}, {"eps", eps}, {"delta", delta}, {"p", p}};

  const bool guard_one = log_m >= std::log(2.0) - 2.0 * log_eps + p;
  const bool guard_zero = m <= constants.c_m1 * p / (eps * eps);
  const bool guard_mid = m >= constants.c_m2 * p / (eps * eps);

  if (guard_one) {
    report.branch = "one";
    report.value = 1.0;
    report.flags.overlap = guard_zero;
    return report;
  }
  if (guard_zero) {
    report.branch = "zero";
    report.flags.overlap = guard_mid;
    return report;
  }
  if (guard_mid) {
    report.branch = "min-log";
    const double l1 = log_m + log_eps - std::log(p);
    const double l2 = log_m + 2.0 * log_eps - std::log(p);
    const double root = sqrt_or_flag(l2, report.flags);
    report.value = report.flags.not_applicable
                       ? 0.0
                       : std::sqrt(eps) *
                             std::min(l1 / p, root / std::sqrt(p));
    return report;
  }
  report.branch = "gap";
  report.flags.indeterminate = true;
  return report;
}

RegimeReport eval_moment_upper(double m, double s, double v, int q,
                               const BoundConstants& constants) {
  check_geometry(m, s);
  constants.validate();

  RegimeReport report;
  report.inputs = {{"m", m}, {"s", s}, {"v", v}, {"q", double(q)}};

  if (q == 2) {
    report.branch = "variance";
    report.value = std::sqrt(2.0) / std::sqrt(m);
    return report;
  }
  if (q < 2 || q % 2 != 0 || double(q) > m || !(v > 0.0) || v > 1.0) {
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }

  const double qd = double(q);
  const double lead = constants.c_moment_upper;
  const double sqrt_q_arm = std::sqrt(qd) / std::sqrt(m);
  if (s * std::numbers::e / (m * v * v) >= qd) {
    report.branch = "sqrt-q";
    report.value = lead * sqrt_q_arm;
    return report;
  }
  const double v2 = v * v;
  if (constants.c_2 * qd * qd * qd * m * v2 * v2 < s * s) {
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }

  // In this regime log(q m v^2 / s) > 1, so the double-log arm is finite.
  const double l4 = std::log(qd * m * v2 * v2 / (s * s));
  const double l2 = std::log(qd * m * v2 / s);
  const double double_log_arm =
      std::cbrt(constants.c_2) * qd * qd * v2 / (s * l2 * l2);
  if (l4 <= 2.0) {
    if (l2 <= qd) {
      report.branch = "small-l4-small-l2";
      report.value = lead * std::max(sqrt_q_arm, double_log_arm);
    } else {
      report.branch = "small-l4-large-l2";
      report.value = lead * sqrt_q_arm;
    }
    return report;
  }
  const double single_log_arm = qd * v2 / (s * l4);
  if (l2 <= qd) {
    const double log_ms = std::log(m / s);
    const double tail_arm = log_ms > 0.0 ? qd / (s * log_ms) : kInf;
    report.branch = "large-l4-small-l2";
    report.value = lead * std::max({sqrt_q_arm, single_log_arm,
                                    std::min(double_log_arm, tail_arm)});
  } else {
    report.branch = "large-l4-large-l2";
    report.value = lead * std::max(sqrt_q_arm, single_log_arm);
  }
  return report;
}

RegimeReport eval_moment_lower(double m, double s, double v, int q,
                               const BoundConstants& constants) {
  check_geometry(m, s);
  constants.validate();

  RegimeReport report;
  report.inputs = {{"m", m}, {"s", s}, {"v", v}, {"q", double(q)}};

  const bool power_of_two = q >= 2 && (q & (q - 1)) == 0;
  if (!power_of_two || double(q) > m || !(v > 0.0) || v > 0.5 ||
      !inverse_square_even(v)) {
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }

  const double qd = double(q);
  const double v2 = v * v;
  const double lead = constants.c_moment_lower;
  const double l4 = std::log(qd * m * v2 * v2 / (s * s));
  const double l2 = std::log(qd * m * v2 / s);
  const double log_ms = std::log(m / s);

  if (qd * v2 <= s)
    report.applicable.emplace_back("sqrt-q", lead * std::sqrt(qd) / std::sqrt(m));
  if (m >= qd && 2.0 <= l4 && l4 <= qd && 2.0 * qd * v2 <= 0.5 * s * l4 &&
      s <= m / 2.0)
    report.applicable.emplace_back("single-log", lead * qd * v2 / (s * l4));
  if (log_ms > 0.0 && v <= std::sqrt(log_ms) / std::sqrt(qd) && 1.0 <= l2 &&
      l2 <= qd && s <= m / 2.0)
    report.applicable.emplace_back("double-log",
                                   lead * qd * qd * v2 / (s * l2 * l2));

  if (report.applicable.empty()) {
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }
  pick_largest(report);
  return report;
}

const char* to_string(RowDirection direction) {
  return direction == RowDirection::kUpper ? "upper" : "lower";
}

RegimeReport eval_row_bounds(double m, double s, double v, int t,
                             RowDirection direction,
                             const BoundConstants& constants) {
  check_geometry(m, s);
  constants.validate();

  RegimeReport report;
  report.inputs = {{"m", m}, {"s", s}, {"v", v}, {"T", double(t)}};

  if (t < 2 || !(v > 0.0) || v > 1.0) {
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }

  const double td = double(t);
  const double v2 = v * v;
  const double se_ratio = s * std::numbers::e / (m * v2);
  const double log_ms = std::log(m / s);
  const double l = std::log(m * td * v2 / s);
  const double tail_value = v2 * std::pow(s / (m * td * v2), 2.0 / td);

  if (direction == RowDirection::kUpper) {
    const double lead = constants.c_row_upper;
    const bool linear = t == 2 || (t >= 3 && td <= se_ratio);
    const bool log_form = t >= 3 && td >= se_ratio && l <= td;
    const bool tail_form = t >= 3 && td >= se_ratio && l >= td;
    if (linear) {
      report.branch = "linear";
      report.value = lead * td * s / m;
      report.flags.overlap = log_form || tail_form;
      return report;
    }
    if (log_form) {
      const double log_arm = td * td * v2 / (l * l);
      const double flat_arm = log_ms > 0.0 ? td / log_ms : kInf;
      report.branch = "log-form";
      report.value = lead * std::min(log_arm, flat_arm);
      report.flags.overlap = tail_form;
      report.flags.log_domain = !std::isfinite(report.value);
      return report;
    }
    if (tail_form) {
      report.branch = "tail-form";
      report.value = lead * tail_value;
      return report;
    }
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }

  // Lower bounds hold at the hard vector, whose 1/v^2 must be even.
  const double lead = constants.c_row_lower;
  if (!inverse_square_even(v)) {
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }
  const bool block = s <= m / 2.0 && t % 2 == 0 && td >= se_ratio;
  if (t == 2) {
    if (log_ms > 0.0 && v <= std::sqrt(log_ms) / std::sqrt(2.0))
      report.applicable.emplace_back("variance", lead * s / m);
    if (block) report.applicable.emplace_back("pair-indicator", lead * tail_value);
  } else if (block) {
    if (1.0 <= l && l <= td && log_ms > 0.0 &&
        v <= std::sqrt(log_ms) / std::sqrt(td))
      report.applicable.emplace_back("log-form", lead * td * td * v2 / (l * l));
    if (l > td) report.applicable.emplace_back("tail-form", lead * tail_value);
    report.applicable.emplace_back("pair-indicator", lead * tail_value);
  }
  if (report.applicable.empty()) {
    report.branch = "none";
    report.flags.not_applicable = true;
    return report;
  }
  pick_largest(report);
  return report;
}

RegimeReport kn_dimension(double eps, double delta, Index s,
                          const BoundConstants& constants) {
  check_unit_interval(eps, "eps");
  check_unit_interval(delta, "delta");
  if (s < 1) throw std::invalid_argument("dimension query: s must be at least 1");
  constants.validate();

  const double p = std::log(1.0 / delta);
  const double log_eps = std::log(eps);
  const double log_dense = std::log(2.0) - 2.0 * log_eps + p;
  const double log_sparse = std::log(constants.c_m) + std::log(p) -
                            2.0 * log_eps + constants.c_s * p / (eps * double(s));

  RegimeReport report;
  report.inputs = {{"eps", eps}, {"delta", delta}, {"s", double(s)}, {"p", p}};
  report.applicable = {{"dense", std::exp(log_dense)},
                       {"sparse", std::exp(log_sparse)}};
  const bool dense_wins = log_dense <= log_sparse;
  report.branch = dense_wins ? "dense" : "sparse";
  report.value = report.applicable[dense_wins ? 0 : 1].second;
  report.flags.s_out_of_range = double(s) > constants.c_s * p / eps;
  return report;
}

RegimeReport dimension_lower(double eps, double delta, Index s,
                             const BoundConstants& constants) {
  check_unit_interval(eps, "eps");
  check_unit_interval(delta, "delta");
  if (s < 1) throw std::invalid_argument("dimension query: s must be at least 1");
  constants.validate();

  const double p = std::log(1.0 / delta);
  const double log_eps = std::log(eps);
  const double log_dense = -2.0 * log_eps + constants.c_t * p;
  const double log_sparse = -2.0 * log_eps + std::log(p) +
                            constants.c_l * p / (eps * double(s));

  RegimeReport report;
  report.inputs = {{"eps", eps}, {"delta", delta}, {"s", double(s)}, {"p", p}};
  report.applicable = {{"dense", std::exp(log_dense)},
                       {"sparse", std::exp(log_sparse)}};
  const bool dense_wins = log_dense <= log_sparse;
  report.branch = dense_wins ? "dense" : "sparse";
  report.value = report.applicable[dense_wins ? 0 : 1].second;
  report.flags.s_out_of_range = double(s) > constants.c_s * p / eps;
  return report;
}

int even_moment_order(double delta) {
  check_unit_interval(delta, "delta");
  const double p = std::log(1.0 / delta);
  const int half = int(std::ceil(p / 2.0 - 1e-9));
  return std::max(2, 2 * half);
}

}  // namespace sjl
