#pragma once

#include <cstdint>
#include <vector>

#include "sjl/core.hpp"

namespace sjl {

// Failure-rate estimate with a 95% Wilson score interval.
struct TailEstimate {
  double failure_rate = 0.0;
  std::int64_t failures = 0;
  std::int64_t trials = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct ThresholdPoint {
  double v_nominal = 0.0;    // grid value as given
  double v_effective = 0.0;  // 1/sqrt(N) after the even snap
  Index hard_count = 0;      // N
  TailEstimate tail;
};

struct ThresholdCurve {
  std::vector<ThresholdPoint> points;
  double v_hat = 0.0;
  bool none_passed = false;
};

// Monte Carlo estimate of the q-norm of |R|. Needs q in [1, 16] and
// trials >= 1000; std_error comes from the delta method on the mean of
// |R|^q. Identical results for any thread count at a fixed seed.
MomentEstimate mc_moment(const SjlParams& params, const UnitVector& x, int q,
                         std::int64_t trials, const Seed& seed,
                         int threads = 1);

// Fraction of trials with |R| > eps (strict). Same preconditions on trials.
TailEstimate mc_tail(const SjlParams& params, const UnitVector& x, double eps,
                     std::int64_t trials, const Seed& seed, int threads = 1);

// Sweeps hard vectors across v_grid and estimates the failure rate at each
// point; v_hat is the largest effective v whose Wilson upper limit stays at
// or below delta (conservative). Grid points whose snapped hard count
// exceeds n are dropped; an entirely infeasible grid throws. Needs
// delta * trials >= 50. Every point reuses the same trial stream, so sweeps
// at matched seeds are positively correlated, which the monotonicity checks
// exploit; no monotonicity in v is assumed.
ThresholdCurve empirical_threshold(Index m, double eps, double delta, Index s,
                                   Index n, const std::vector<double>& v_grid,
                                   std::int64_t trials, const Seed& seed,
                                   Flavor flavor = Flavor::kUniform,
                                   int threads = 1);

// (moment.value / eps)^q: the q-th-moment tail bound, an upper bound on
// P[|R| >= eps] when the moment is exact.
double markov_bound(const MomentEstimate& moment, double eps);

struct PzBound {
  bool applicable = false;
  double value = 0.0;
};

// 0.25 (norm_q / norm_2q)^{2q}, a lower bound on P[|R| > k] when the norms
// are exact. Applicable only when norm_q >= 2k; an inapplicable result is
// reported as such rather than as 0.
PzBound paley_zygmund_bound(double norm_q, double norm_2q, int q, double k);

struct PairedMoments {
  MomentEstimate rademacher;
  MomentEstimate gaussian;
  double ratio = 0.0;  // gaussian over rademacher
  double ratio_std_error = 0.0;
};

// Paired estimates of the q-norms of R and of its zero-diagonal Gaussian
// analogue on common support draws, with a delta-method standard error for
// their ratio. Pairing cancels most support noise.
PairedMoments gaussian_vs_rademacher(const SjlParams& params,
                                     const UnitVector& x, int q,
                                     std::int64_t trials, const Seed& seed,
                                     int threads = 1);

}  // namespace sjl
