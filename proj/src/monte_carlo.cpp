#include "sjl/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "sjl/accumulate.hpp"
#include "sjl/sampler.hpp"

namespace sjl {

namespace {

// Trials are processed in fixed chunks and the per-chunk partials are merged
// in chunk order, so the worker count never changes a result.
constexpr std::int64_t kChunk = 4096;
constexpr double kWilsonZ = 1.959963984540054;  // 97.5% normal quantile

int clamp_threads(int threads) { return std::clamp(threads, 1, 64); }

void check_common(const SjlParams& params, const UnitVector& x,
                  std::int64_t trials) {
  params.validate();
  if (x.values.size() != params.n)
    throw std::invalid_argument("monte carlo: x length must match n");
  if (trials < 1000)
    throw std::invalid_argument("monte carlo: needs at least 1000 trials");
}

template <class Accum>
Accum run_chunked(const SjlParams& params, const UnitVector& x,
                  std::int64_t trials, int threads, const Accum& proto) {
  const std::int64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<Accum> partials(std::size_t(chunks), proto);
  std::atomic<std::int64_t> next{0};
  auto work = [&] {
    TrialKernel kernel(params, x);
    for (;;) {
      const std::int64_t chunk = next.fetch_add(1);
      if (chunk >= chunks) break;
      Accum& acc = partials[std::size_t(chunk)];
      const std::int64_t begin = chunk * kChunk;
      const std::int64_t end = std::min(trials, begin + kChunk);
      for (std::int64_t trial = begin; trial < end; ++trial)
        acc.add(kernel, std::uint64_t(trial));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads - 1));
  for (int i = 1; i < threads; ++i) pool.emplace_back(work);
  work();
  for (auto& worker : pool) worker.join();

  Accum total = proto;
  for (const Accum& part : partials) total.merge(part);
  return total;
}

struct MomentAccum {
  int q = 2;
  Seed seed;
  CompensatedSum u, u2;

  void add(TrialKernel& kernel, std::uint64_t trial) {
    const double r = std::abs(kernel.rademacher(seed, trial));
    const double uq = ipow(r, q);
    u.add(uq);
    u2.add(uq * uq);
  }
  void merge(const MomentAccum& other) {
    u.add(other.u.value());
    u2.add(other.u2.value());
  }
};

struct TailAccum {
  double eps = 0.0;
  Seed seed;
  std::int64_t count = 0;

  void add(TrialKernel& kernel, std::uint64_t trial) {
    if (std::abs(kernel.rademacher(seed, trial)) > eps) ++count;
  }
  void merge(const TailAccum& other) { count += other.count; }
};

struct PairedAccum {
  int q = 2;
  Seed seed;
  CompensatedSum a, a2, b, b2, ab;

  void add(TrialKernel& kernel, std::uint64_t trial) {
    const auto [r, g] = kernel.paired(seed, trial);
    const double aq = ipow(std::abs(r), q);
    const double bq = ipow(std::abs(g), q);
    a.add(aq);
    a2.add(aq * aq);
    b.add(bq);
    b2.add(bq * bq);
    ab.add(aq * bq);
  }
  void merge(const PairedAccum& other) {
    a.add(other.a.value());
    a2.add(other.a2.value());
    b.add(other.b.value());
    b2.add(other.b2.value());
    ab.add(other.ab.value());
  }
};

// Sample variance of the underlying per-trial variable from its sum and sum
// of squares.
double sample_variance(double sum, double sum_sq, double n) {
  const double mean = sum / n;
  return std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
}

MomentEstimate estimate_from_sums(int q, std::int64_t trials, double sum,
                                  double sum_sq) {
  MomentEstimate est;
  est.q = q;
  est.method = Method::kMonteCarlo;
  est.trials = trials;
  const double n = double(trials);
  const double mean = sum / n;
  if (mean <= 0.0) return est;
  est.value = std::pow(mean, 1.0 / q);
  const double var_u = sample_variance(sum, sum_sq, n);
  est.std_error = est.value / (q * mean) * std::sqrt(var_u / n);
  return est;
}

}  // namespace

MomentEstimate mc_moment(const SjlParams& params, const UnitVector& x, int q,
                         std::int64_t trials, const Seed& seed, int threads) {
  check_common(params, x, trials);
  if (q < 1 || q > 16)
    throw std::invalid_argument("mc_moment: q must lie in [1, 16]");
  MomentAccum proto;
  proto.q = q;
  proto.seed = seed;
  const MomentAccum total =
      run_chunked(params, x, trials, clamp_threads(threads), proto);
  return estimate_from_sums(q, trials, total.u.value(), total.u2.value());
}

TailEstimate mc_tail(const SjlParams& params, const UnitVector& x, double eps,
                     std::int64_t trials, const Seed& seed, int threads) {
  check_common(params, x, trials);
  if (!(eps > 0.0)) throw std::invalid_argument("mc_tail: eps must be positive");
  TailAccum proto;
  proto.eps = eps;
  proto.seed = seed;
  const TailAccum total =
      run_chunked(params, x, trials, clamp_threads(threads), proto);

  TailEstimate tail;
  tail.failures = total.count;
  tail.trials = trials;
  const double n = double(trials);
  const double rate = double(total.count) / n;
  tail.failure_rate = rate;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = (rate + z2 / (2.0 * n)) / denom;
  const double half =
      kWilsonZ * std::sqrt(rate * (1.0 - rate) / n + z2 / (4.0 * n * n)) / denom;
  tail.ci_low = std::max(0.0, center - half);
  tail.ci_high = std::min(1.0, center + half);
  return tail;
}

ThresholdCurve empirical_threshold(Index m, double eps, double delta, Index s,
                                   Index n, const std::vector<double>& v_grid,
                                   std::int64_t trials, const Seed& seed,
                                   Flavor flavor, int threads) {
  SjlParams params;
  params.n = n;
  params.m = m;
  params.s = s;
  params.flavor = flavor;
  params.validate();
  if (!(eps > 0.0))
    throw std::invalid_argument("empirical_threshold: eps must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("empirical_threshold: delta must lie in (0, 1)");
  if (delta * double(trials) < 50.0)
    throw std::invalid_argument(
        "empirical_threshold: needs delta * trials >= 50");
  if (v_grid.empty())
    throw std::invalid_argument("empirical_threshold: empty grid");
  for (double v : v_grid)
    if (!(v > 0.0) || v > 1.0)
      throw std::invalid_argument(
          "empirical_threshold: grid values must lie in (0, 1]");

  ThresholdCurve curve;
  for (double v : v_grid) {
    const Index count = hard_count_even(v);
    if (count > n) continue;
    ThresholdPoint point;
    point.v_nominal = v;
    point.hard_count = count;
    point.v_effective = 1.0 / std::sqrt(double(count));
    const UnitVector x = hard_vector(point.v_effective, n);
    point.tail = mc_tail(params, x, eps, trials, seed, threads);
    curve.points.push_back(point);
  }
  if (curve.points.empty())
    throw std::invalid_argument(
        "empirical_threshold: every grid point needs more coordinates than n "
        "provides");

  curve.none_passed = true;
  for (const ThresholdPoint& point : curve.points) {
    if (point.tail.ci_high <= delta && point.v_effective > curve.v_hat) {
      curve.v_hat = point.v_effective;
      curve.none_passed = false;
    }
  }
  return curve;
}

double markov_bound(const MomentEstimate& moment, double eps) {
  if (moment.q < 1) throw std::invalid_argument("markov_bound: q must be at least 1");
  if (!(eps > 0.0)) throw std::invalid_argument("markov_bound: eps must be positive");
  return ipow(moment.value / eps, moment.q);
}

PzBound paley_zygmund_bound(double norm_q, double norm_2q, int q, double k) {
  if (q < 1)
    throw std::invalid_argument("paley_zygmund_bound: q must be at least 1");
  if (!(k > 0.0))
    throw std::invalid_argument("paley_zygmund_bound: K must be positive");
  if (!(norm_q >= 0.0) || norm_2q < norm_q)
    throw std::invalid_argument(
        "paley_zygmund_bound: needs norm_2q >= norm_q >= 0");
  PzBound bound;
  if (norm_q < 2.0 * k || norm_q == 0.0) return bound;
  bound.applicable = true;
  bound.value = 0.25 * ipow(norm_q / norm_2q, 2 * q);
  return bound;
}

PairedMoments gaussian_vs_rademacher(const SjlParams& params,
                                     const UnitVector& x, int q,
                                     std::int64_t trials, const Seed& seed,
                                     int threads) {
  check_common(params, x, trials);
  if (q < 1 || q > 16)
    throw std::invalid_argument("gaussian_vs_rademacher: q must lie in [1, 16]");
  PairedAccum proto;
  proto.q = q;
  proto.seed = seed;
  const PairedAccum total =
      run_chunked(params, x, trials, clamp_threads(threads), proto);

  PairedMoments out;
  out.rademacher = estimate_from_sums(q, trials, total.a.value(), total.a2.value());
  out.gaussian = estimate_from_sums(q, trials, total.b.value(), total.b2.value());

  const double n = double(trials);
  const double mean_a = total.a.value() / n;
  const double mean_b = total.b.value() / n;
  if (mean_a > 0.0 && mean_b > 0.0) {
    out.ratio = std::pow(mean_b / mean_a, 1.0 / q);
    const double var_a = sample_variance(total.a.value(), total.a2.value(), n);
    const double var_b = sample_variance(total.b.value(), total.b2.value(), n);
    const double mean_ab = total.ab.value() / n;
    const double cov = (mean_ab - mean_a * mean_b) * n / (n - 1.0);
    const double var_log = (var_b / (mean_b * mean_b) +
                            var_a / (mean_a * mean_a) -
                            2.0 * cov / (mean_a * mean_b)) /
                           (n * double(q) * double(q));
    out.ratio_std_error = out.ratio * std::sqrt(std::max(0.0, var_log));
  }
  return out;
}

}  // namespace sjl
