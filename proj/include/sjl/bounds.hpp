#pragma once

#include "sjl/core.hpp"

namespace sjl {

// Point at which the threshold formulas are evaluated. p caches log(1/delta)
// (natural log, as everywhere in this library); build queries through make()
// so the cache is consistent.
struct ThresholdQuery {
  Index m = 0;
  double eps = 0.0;
  double delta = 0.0;
  Index s = 1;
  double p = 0.0;
  BoundConstants constants;

  static ThresholdQuery make(Index m, double eps, double delta, Index s,
                             const BoundConstants& constants = {});

  // Throws std::invalid_argument unless m >= 1, s >= 1, eps and delta lie in
  // (0, 1), p agrees with log(1/delta) to 1e-12, and the constants validate.
  void validate() const;
};

// Lower threshold function: the guaranteed l_inf/l_2 ratio below which the
// distortion guarantee holds. Branches, first match wins:
//   "one"      m >= min(2 eps^-2 e^p, eps^-2 p e^{C_U p / (eps s)})
//   "sqrt-log" m >= max(s e^{C_S p / (eps s)}, C_M eps^-2 p)
//              -> min(1, C_v sqrt(eps s) sqrt(log(m eps^2 / p)) / sqrt(p))
//   "min-log"  C_M eps^-2 p <= m < s e^{C_S p / (eps s)}
//              -> min(1, C_v sqrt(eps s) min(log(m eps / p) / p,
//                                            sqrt(log(m eps^2 / p)) / sqrt(p)))
//   "below-domain" otherwise, value 0 and the below_domain flag.
// A square root of a negative log sets log_domain + not_applicable.
RegimeReport eval_g(const ThresholdQuery& q);

// Upper threshold function (uniform flavor). Branches, first match wins:
//   "zero"     m <= C_M1 eps^-2 p
//   "sqrt-log" m >= max(s e^{C_E1 p / (eps s)}, C_M2 eps^-2 p)
//   "min-log"  C_M2 eps^-2 p <= m < s e^{C_E1 p / (eps s)}
//   "gap"      C_M1 eps^-2 p < m < C_M2 eps^-2 p, value 0, indeterminate.
// Value forms match eval_g's with C_E1 in place of C_S, without the cap at 1.
// Side flags report the surrounding theorem's hypotheses without changing
// the value: s_out_of_range (s > C_S p / eps), m_out_of_range
// (m > eps^-2 e^{C_E2 p}), gate_exceeded (value > 0.5, outside the regime
// the result certifies).
RegimeReport eval_h(const ThresholdQuery& q);

// s = 1 threshold, three cases with no leading constant on the value:
//   "one"  m >= 2 eps^-2 e^p; "zero" m <= C_M1 eps^-2 p;
//   "min-log" m >= C_M2 eps^-2 p -> sqrt(eps) min(log(m eps / p) / p,
//                                                 sqrt(log(m eps^2 / p) / p));
//   "gap" in between, flagged indeterminate.
RegimeReport eval_f_fkl(Index m, double eps, double delta,
                        const BoundConstants& constants = {});

// Upper bound on the q-norm of R for any unit x with linf ratio at most v.
// q = 2 returns sqrt(2)/sqrt(m) exactly (branch "variance", no leading
// constant). Even 2 < q <= m: branch "sqrt-q" when s e / (m v^2) >= q;
// otherwise requires C_2 q^3 m v^4 >= s^2 (else not_applicable) and selects
// among four cases keyed on L4 = log(q m v^4 / s^2) vs 2 and
// L2 = log(q m v^2 / s) vs q, named "small-l4-small-l2" and so on. All
// inexact branches carry the C_moment_upper leading constant.
RegimeReport eval_moment_upper(double m, double s, double v, int q,
                               const BoundConstants& constants = {});

// Lower bound on the q-norm of R at the hard vector with ratio v (uniform
// flavor). Needs q a power of 2 in [2, m], 0 < v <= 0.5, and 1/v^2 an even
// integer; otherwise not_applicable. Each branch is evaluated independently
// and listed in `applicable` when its side conditions hold:
//   "sqrt-q"     q v^2 <= s                 -> sqrt(q)/sqrt(m)
//   "single-log" m >= q, 2 <= L4 <= q, 2 q v^2 <= 0.5 s L4, s <= m/2
//                                           -> q v^2 / (s L4)
//   "double-log" v <= sqrt(log(m/s))/sqrt(q), 1 <= L2 <= q, s <= m/2
//                                           -> q^2 v^2 / (s L2^2)
// value/branch report the largest; all values carry C_moment_lower.
RegimeReport eval_moment_lower(double m, double s, double v, int q,
                               const BoundConstants& constants = {});

enum class RowDirection { kUpper, kLower };

const char* to_string(RowDirection direction);

// Bounds on the T-norm of the single-row error Z_1. Upper (any unit x with
// linf ratio at most v, either flavor since the row law matches):
//   "linear"    T = 2 or 3 <= T <= s e / (m v^2)      -> T s / m
//   "log-form"  T >= 3, T >= s e / (m v^2), log(m T v^2 / s) <= T
//               -> min(T^2 v^2 / log^2(m T v^2 / s), T / log(m / s))
//   "tail-form" T >= 3, T >= s e / (m v^2), log(m T v^2 / s) >= T
//               -> v^2 (s / (m T v^2))^{2/T}
// Lower (uniform flavor, hard vector, 1/v^2 an even integer):
//   "variance"  T = 2, v <= sqrt(log(m/s))/sqrt(2)    -> s / m
//   T > 2 needs s <= m/2 and T even with T >= s e / (m v^2); then
//   "log-form"  1 <= log(m T v^2 / s) <= T and v <= sqrt(log(m/s))/sqrt(T)
//   "tail-form" log(m T v^2 / s) > T
//   "pair-indicator" always under the T > 2 conditions: the tail-form value
//   via the two-collision slice of Z_1, a valid lower bound on the full norm.
// Lower reports every applicable branch and selects the largest.
RegimeReport eval_row_bounds(double m, double s, double v, int t,
                             RowDirection direction,
                             const BoundConstants& constants = {});

// Dimension sufficient for the distortion guarantee on the whole space:
// min(2 eps^-2 / delta, C_M eps^-2 p e^{C_S p / (eps s)}). Branch names the
// winning arm ("dense" or "sparse"); both arms appear in `applicable`.
// Flags s_out_of_range outside 1 <= s <= C_S p / eps.
RegimeReport kn_dimension(double eps, double delta, Index s,
                          const BoundConstants& constants = {});

// Dimension at or below which the threshold stays at most 1/2:
// min(eps^-2 e^{C_T p}, eps^-2 p e^{C_L p / (eps s)}). Same reporting shape
// as kn_dimension.
RegimeReport dimension_lower(double eps, double delta, Index s,
                             const BoundConstants& constants = {});

// log(1/delta) rounded up to the nearest even integer, the moment order at
// which tail arguments connect to q-norms. At least 2.
int even_moment_order(double delta);

}  // namespace sjl
