#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "sjl/bounds.hpp"
#include "sjl/core.hpp"
#include "sjl/exact.hpp"
#include "sjl/monte_carlo.hpp"
#include "sjl/rng.hpp"

using namespace sjl;

namespace {

UnitVector test_vector(Index n, std::uint64_t key) {
  CounterRng rng(key);
  Vector raw(n);
  for (Index i = 0; i < n; ++i) raw[i] = rng.next_normal();
  return make_unit_vector(raw);
}

struct Instance {
  SjlParams params;
  UnitVector x;
};

std::vector<Instance> calibration_instances() {
  std::vector<Instance> out;
  const auto add = [&out](Index n, Index m, Index s, Flavor flavor,
                          const UnitVector& x) {
    SjlParams p;
    p.n = n;
    p.m = m;
    p.s = s;
    p.flavor = flavor;
    out.push_back({p, x});
  };
  const UnitVector hard2 = hard_vector(1.0 / std::sqrt(2.0), 2);
  add(2, 2, 1, Flavor::kUniform, hard2);
  add(2, 4, 1, Flavor::kUniform, hard2);
  add(2, 4, 2, Flavor::kUniform, hard2);
  add(2, 4, 2, Flavor::kBlock, hard2);
  add(3, 4, 1, Flavor::kUniform, test_vector(3, 71));
  add(3, 6, 2, Flavor::kUniform, test_vector(3, 72));
  return out;
}

}  // namespace

TEST_SUITE("monte_carlo") {

TEST_CASE("moment estimates sit within three sigma of exact values") {
  const Seed seed{4242, 0};
  for (const Instance& inst : calibration_instances()) {
    for (const int q : {2, 3}) {
      const double exact = exact_moment(inst.params, inst.x, q).value;
      const MomentEstimate mc =
          mc_moment(inst.params, inst.x, q, 40000, seed);
      REQUIRE(mc.std_error > 0.0);
      CHECK(std::abs(mc.value - exact) <= 3.0 * mc.std_error + 1e-12);
      CHECK(mc.trials == 40000);
      CHECK(mc.method == Method::kMonteCarlo);
    }
  }
}

TEST_CASE("tail estimates sit within three sigma of exact values") {
  const Seed seed{4243, 0};
  for (const Instance& inst : calibration_instances()) {
    for (const double eps : {0.3, 0.6}) {
      const double exact = exact_tail(inst.params, inst.x, eps);
      const TailEstimate mc = mc_tail(inst.params, inst.x, eps, 40000, seed);
      const double sigma = std::sqrt(exact * (1.0 - exact) / 40000.0);
      CHECK(std::abs(mc.failure_rate - exact) <= 3.0 * sigma + 1e-9);
      CHECK(mc.ci_low <= mc.failure_rate);
      CHECK(mc.failure_rate <= mc.ci_high);
      CHECK(mc.trials == 40000);
    }
  }
}

TEST_CASE("two spikes in two rows: the tail rate lands on one half") {
  SjlParams p;
  p.n = 2;
  p.m = 2;
  p.s = 1;
  const UnitVector x = hard_vector(1.0 / std::sqrt(2.0), 2);
  const TailEstimate tail = mc_tail(p, x, 0.5, 100000, Seed{1, 0});
  CHECK(std::abs(tail.failure_rate - 0.5) <= 0.005);
}

TEST_CASE("estimates are identical for any worker count") {
  SjlParams p;
  p.n = 4;
  p.m = 8;
  p.s = 2;
  const UnitVector x = test_vector(4, 91);
  const Seed seed{7, 7};

  const MomentEstimate m1 = mc_moment(p, x, 4, 5000, seed, 1);
  const MomentEstimate m4 = mc_moment(p, x, 4, 5000, seed, 4);
  CHECK(m1.value == m4.value);
  CHECK(m1.std_error == m4.std_error);

  const TailEstimate t1 = mc_tail(p, x, 0.4, 5000, seed, 1);
  const TailEstimate t4 = mc_tail(p, x, 0.4, 5000, seed, 4);
  CHECK(t1.failure_rate == t4.failure_rate);
  CHECK(t1.failures == t4.failures);
  CHECK(t1.ci_low == t4.ci_low);
  CHECK(t1.ci_high == t4.ci_high);

  const PairedMoments g1 = gaussian_vs_rademacher(p, x, 4, 5000, seed, 1);
  const PairedMoments g4 = gaussian_vs_rademacher(p, x, 4, 5000, seed, 4);
  CHECK(g1.rademacher.value == g4.rademacher.value);
  CHECK(g1.gaussian.value == g4.gaussian.value);
  CHECK(g1.ratio == g4.ratio);
  CHECK(g1.ratio_std_error == g4.ratio_std_error);
}

TEST_CASE("basis vectors give exactly zero estimates") {
  SjlParams p;
  p.n = 3;
  p.m = 6;
  p.s = 2;
  Vector e = Vector::Zero(3);
  e[0] = 1.0;
  const UnitVector x = make_unit_vector(e);
  const MomentEstimate est = mc_moment(p, x, 2, 2000, Seed{3, 0});
  CHECK(est.value == 0.0);
  CHECK(est.std_error == 0.0);
  const TailEstimate tail = mc_tail(p, x, 0.1, 2000, Seed{3, 0});
  CHECK(tail.failure_rate == 0.0);
  CHECK(tail.failures == 0);
  // Wilson at zero failures leaves rounding residue of order 1e-19.
  CHECK(tail.ci_low >= 0.0);
  CHECK(tail.ci_low < 1e-12);
  CHECK(tail.ci_high < 0.005);
}

TEST_CASE("input validation") {
  SjlParams p;
  p.n = 2;
  p.m = 4;
  p.s = 1;
  const UnitVector x = hard_vector(1.0 / std::sqrt(2.0), 2);
  CHECK_THROWS_WITH(mc_moment(p, x, 2, 999, Seed{}),
                    doctest::Contains("at least 1000"));
  CHECK_THROWS_WITH(mc_moment(p, x, 17, 2000, Seed{}),
                    doctest::Contains("[1, 16]"));
  CHECK_THROWS_AS(mc_moment(p, x, 0, 2000, Seed{}), std::invalid_argument);
  CHECK_THROWS_AS(mc_tail(p, x, -0.5, 2000, Seed{}), std::invalid_argument);
  CHECK_THROWS_AS(mc_tail(p, hard_vector(0.5, 4), 0.5, 2000, Seed{}),
                  std::invalid_argument);  // x length mismatch
}

TEST_CASE("markov bound evaluates the power ratio and dominates the tail") {
  MomentEstimate est;
  est.q = 2;
  est.value = 0.5;
  CHECK(markov_bound(est, 0.25) == doctest::Approx(4.0).epsilon(1e-15));
  est.q = 0;
  CHECK_THROWS_AS(markov_bound(est, 0.25), std::invalid_argument);
  est.q = 2;
  CHECK_THROWS_AS(markov_bound(est, 0.0), std::invalid_argument);

  for (const Instance& inst : calibration_instances()) {
    for (const int q : {2, 4}) {
      const MomentEstimate exact = exact_moment(inst.params, inst.x, q);
      for (const double eps : {0.2, 0.5, 0.8}) {
        const double tail = exact_tail(inst.params, inst.x, eps);
        CHECK(markov_bound(exact, eps) >= tail - 1e-12);
      }
    }
  }
}

TEST_CASE("paley-zygmund bound evaluates and stays below the tail") {
  const PzBound direct = paley_zygmund_bound(0.4, 0.5, 1, 0.1);
  CHECK(direct.applicable);
  CHECK(direct.value == doctest::Approx(0.25 * 0.64).epsilon(1e-15));
  const PzBound off = paley_zygmund_bound(0.4, 0.5, 1, 0.3);
  CHECK_FALSE(off.applicable);
  CHECK(off.value == 0.0);
  CHECK_THROWS_AS(paley_zygmund_bound(0.6, 0.5, 1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(paley_zygmund_bound(0.4, 0.5, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(paley_zygmund_bound(0.4, 0.5, 1, 0.0), std::invalid_argument);

  for (const Instance& inst : calibration_instances()) {
    for (const int q : {1, 2}) {
      const double norm_q = exact_moment(inst.params, inst.x, q).value;
      const double norm_2q = exact_moment(inst.params, inst.x, 2 * q).value;
      if (norm_q == 0.0) continue;
      const double k = 0.45 * norm_q;  // comfortably applicable
      const PzBound pz = paley_zygmund_bound(norm_q, norm_2q, q, k);
      REQUIRE(pz.applicable);
      CHECK(pz.value <= exact_tail(inst.params, inst.x, k) + 1e-12);
    }
  }
}

TEST_CASE("empirical threshold: degenerate one-point grid at v = 1") {
  const ThresholdCurve curve = empirical_threshold(
      8, 0.5, 0.05, 1, 4, {1.0}, 2000, Seed{10, 0});
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].hard_count == 1);
  CHECK(curve.points[0].v_effective == 1.0);
  CHECK(curve.points[0].tail.failure_rate == 0.0);
  CHECK(curve.v_hat == 1.0);
  CHECK_FALSE(curve.none_passed);
}

TEST_CASE("empirical threshold validates its inputs") {
  CHECK_THROWS_WITH(
      empirical_threshold(8, 0.5, 0.01, 1, 4, {0.5}, 1000, Seed{}),
      doctest::Contains("delta * trials"));
  CHECK_THROWS_AS(empirical_threshold(8, 0.5, 0.05, 1, 4, {}, 2000, Seed{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      empirical_threshold(8, 0.5, 0.05, 1, 4, {1.2}, 2000, Seed{}),
      std::invalid_argument);
  // All grid points need more coordinates than n has: nothing to run.
  CHECK_THROWS_AS(
      empirical_threshold(8, 0.5, 0.05, 1, 4, {0.05}, 2000, Seed{}),
      std::invalid_argument);
}

TEST_CASE("empirical threshold tracks the s=1 formula within a factor of 4") {
  const std::vector<double> grid{0.15, 0.25, 0.4, 0.6};
  for (const Index m : {Index(40), Index(64), Index(96)}) {
    const ThresholdCurve curve =
        empirical_threshold(m, 0.5, 0.05, 1, 48, grid, 4000, Seed{2030, 0});
    const RegimeReport f = eval_f_fkl(m, 0.5, 0.05);
    REQUIRE(f.branch == "min-log");
    REQUIRE_FALSE(curve.none_passed);
    CHECK(curve.v_hat >= f.value / 4.0);
    CHECK(curve.v_hat <= f.value * 4.0);
  }
}

TEST_CASE("gaussian comparison: equal second moments, fourth-moment gap") {
  SjlParams p;
  p.n = 2;
  p.m = 2;
  p.s = 1;
  const UnitVector x = hard_vector(1.0 / std::sqrt(2.0), 2);
  const Seed seed{606, 0};

  const PairedMoments second = gaussian_vs_rademacher(p, x, 2, 50000, seed);
  CHECK(std::abs(second.ratio - 1.0) <= 3.0 * second.ratio_std_error + 0.02);

  const PairedMoments fourth = gaussian_vs_rademacher(p, x, 4, 50000, seed);
  CHECK(fourth.ratio >= 1.0 - 3.0 * fourth.ratio_std_error);
  CHECK(fourth.gaussian.value > fourth.rademacher.value);
}

TEST_CASE("gaussian estimator matches the quadrature oracle") {
  SjlParams p;
  p.n = 2;
  p.m = 1;
  p.s = 1;
  const UnitVector x = hard_vector(1.0 / std::sqrt(2.0), 2);
  const PairedMoments paired =
      gaussian_vs_rademacher(p, x, 2, 60000, Seed{607, 0});
  // Oracle second moment is exactly 1 here, so the norm is exactly 1.
  CHECK(std::abs(paired.gaussian.value - 1.0) <=
        3.0 * paired.gaussian.std_error + 0.01);
}

}  // TEST_SUITE
