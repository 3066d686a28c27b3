// Acceptance suite: each criterion prints exactly one PASS/FAIL line and the
// process exits with the number of failures. Run with no arguments for all
// criteria, or pass criterion numbers (1..10) to run a subset.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sjl/bounds.hpp"
#include "sjl/core.hpp"
#include "sjl/exact.hpp"
#include "sjl/matrix_io.hpp"
#include "sjl/monte_carlo.hpp"
#include "sjl/rng.hpp"
#include "sjl/sampler.hpp"

#ifndef SJL_BIN
#error "SJL_BIN must point at the command line binary"
#endif

namespace {

using namespace sjl;

struct Instance {
  SjlParams params;
  UnitVector x;
  std::string label;
};

UnitVector random_vector(Index n, std::uint64_t key) {
  CounterRng rng(key);
  Vector raw(n);
  for (Index i = 0; i < n; ++i) raw[i] = rng.next_normal();
  return make_unit_vector(raw);
}

UnitVector basis_vector(Index n) {
  Vector raw = Vector::Zero(n);
  raw[0] = 1.0;
  return make_unit_vector(raw);
}

Index nonzeros(const UnitVector& x) {
  Index count = 0;
  for (Index i = 0; i < x.values.size(); ++i)
    if (x.values[i] != 0.0) ++count;
  return count;
}

double fourth_power_sum(const UnitVector& x) {
  double sum = 0.0;
  for (Index i = 0; i < x.values.size(); ++i)
    sum += x.values[i] * x.values[i] * x.values[i] * x.values[i];
  return sum;
}

// The small enumerable family used by the exact-value criteria.
std::vector<Instance> tiny_grid() {
  std::vector<Instance> out;
  std::uint64_t key = 100;
  for (const Flavor flavor : {Flavor::kUniform, Flavor::kBlock}) {
    for (const Index m : {Index(2), Index(4), Index(6)}) {
      for (const Index s : {Index(1), Index(2)}) {
        for (const Index n : {Index(2), Index(3)}) {
          SjlParams p;
          p.n = n;
          p.m = m;
          p.s = s;
          p.flavor = flavor;
          const std::string tag = std::string(to_string(flavor)) + " m=" +
                                  std::to_string(m) + " s=" + std::to_string(s) +
                                  " n=" + std::to_string(n);
          out.push_back({p, basis_vector(n), tag + " e1"});
          out.push_back({p, hard_vector(1.0 / std::sqrt(2.0), n), tag + " hard"});
          out.push_back({p, random_vector(n, key++), tag + " random"});
        }
      }
    }
  }
  return out;
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_shell(const std::string& command) {
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return {};
  std::string out;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = ::pclose(pipe);
  RunResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = std::move(out);
  return result;
}

// ---------------------------------------------------------------------------

bool ac1_exact_moments(std::string& detail) {
  for (const Instance& inst : tiny_grid()) {
    const double closed =
        2.0 / double(inst.params.m) * (1.0 - fourth_power_sum(inst.x));
    const double second = exact_moment(inst.params, inst.x, 2).value;
    if (std::abs(second * second - closed) > 1e-12) {
      detail = "second moment off at " + inst.label;
      return false;
    }
    if (nonzeros(inst.x) <= 2) {
      for (const int q : {3, 5}) {
        if (std::abs(exact_raw_moment(inst.params, inst.x, q)) > 1e-14) {
          detail = "odd moment q=" + std::to_string(q) + " at " + inst.label;
          return false;
        }
      }
    }
  }
  return true;
}

bool ac2_exact_row_moments(std::string& detail) {
  for (const Instance& inst : tiny_grid()) {
    const double ratio = double(inst.params.s) / double(inst.params.m);
    const double closed =
        2.0 * ratio * ratio * (1.0 - fourth_power_sum(inst.x));
    const double second = exact_row_moment(inst.params, inst.x, 2).value;
    if (std::abs(second * second - closed) > 1e-12) {
      detail = "row second moment off at " + inst.label;
      return false;
    }
  }
  return true;
}

bool ac3_monte_carlo_calibration(std::string& detail) {
  std::vector<Instance> instances;
  const auto add = [&instances](Index n, Index m, Index s, Flavor flavor,
                                const UnitVector& x) {
    SjlParams p;
    p.n = n;
    p.m = m;
    p.s = s;
    p.flavor = flavor;
    instances.push_back({p, x, ""});
  };
  const UnitVector hard2 = hard_vector(1.0 / std::sqrt(2.0), 2);
  const UnitVector hard3 = hard_vector(1.0 / std::sqrt(2.0), 3);
  add(2, 2, 1, Flavor::kUniform, hard2);
  add(2, 4, 1, Flavor::kUniform, hard2);
  add(2, 4, 2, Flavor::kUniform, hard2);
  add(2, 4, 2, Flavor::kBlock, hard2);
  add(3, 6, 2, Flavor::kUniform, random_vector(3, 31));
  add(3, 4, 1, Flavor::kUniform, random_vector(3, 32));
  add(2, 6, 1, Flavor::kUniform, hard2);
  add(3, 6, 3, Flavor::kBlock, random_vector(3, 33));
  add(2, 2, 2, Flavor::kUniform, random_vector(2, 34));
  add(3, 6, 2, Flavor::kBlock, hard3);

  const std::int64_t trials = 100000;
  int checks = 0;
  int passes = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    const Seed seed{2024, std::uint64_t(i)};

    const double exact2 = exact_moment(inst.params, inst.x, 2).value;
    const MomentEstimate mc2 = mc_moment(inst.params, inst.x, 2, trials, seed);
    ++checks;
    if (std::abs(mc2.value - exact2) <= 3.0 * mc2.std_error + 1e-12) ++passes;

    const double rate = exact_tail(inst.params, inst.x, 0.5);
    const TailEstimate tail = mc_tail(inst.params, inst.x, 0.5, trials, seed);
    const double sigma = std::sqrt(rate * (1.0 - rate) / double(trials));
    ++checks;
    if (std::abs(tail.failure_rate - rate) <= 3.0 * sigma + 1e-12) ++passes;
  }
  detail = std::to_string(passes) + "/" + std::to_string(checks) +
           " within three sigma";
  return passes >= checks - 1;
}

bool ac4_structure_and_basis(std::string& detail) {
  SjlParams p;
  p.n = 8;
  p.m = 12;
  p.s = 3;
  std::vector<UnitVector> basis;
  for (Index i = 0; i < p.n; ++i) {
    Vector raw = Vector::Zero(p.n);
    raw[i] = 1.0;
    basis.push_back(make_unit_vector(raw));
  }
  for (const Flavor flavor : {Flavor::kUniform, Flavor::kBlock}) {
    p.flavor = flavor;
    for (std::uint64_t root = 0; root < 1000; ++root) {
      const SjlMatrix a = sample_matrix(p, Seed{root, 17});
      if (Index(a.rows.size()) != p.n * p.s) {
        detail = "wrong storage size";
        return false;
      }
      for (Index c = 0; c < p.n; ++c) {
        for (Index k = 0; k < p.s; ++k) {
          const auto row = a.row_at(c, k);
          if (row < 0 || row >= p.m || std::abs(a.sign_at(c, k)) != 1.0) {
            detail = "bad entry in column " + std::to_string(c);
            return false;
          }
          if (k > 0 && a.row_at(c, k - 1) >= row) {
            detail = "rows not strictly increasing in column " +
                     std::to_string(c);
            return false;
          }
        }
      }
      for (const UnitVector& e : basis) {
        if (error_sample(a, e) != 0.0) {
          detail = "basis vector error nonzero at root " + std::to_string(root);
          return false;
        }
      }
    }
  }
  return true;
}

bool ac5_tail_bounds_bracket(std::string& detail) {
  for (const Instance& inst : tiny_grid()) {
    for (const int q : {2, 4}) {
      const MomentEstimate norm = exact_moment(inst.params, inst.x, q);
      for (const double eps : {0.2, 0.5, 0.8}) {
        const double tail = exact_tail(inst.params, inst.x, eps);
        if (markov_bound(norm, eps) < tail - 1e-12) {
          detail = "Markov violated at " + inst.label;
          return false;
        }
      }
    }
    for (const int q : {1, 2}) {
      const double norm_q = exact_moment(inst.params, inst.x, q).value;
      const double norm_2q = exact_moment(inst.params, inst.x, 2 * q).value;
      if (norm_q <= 0.0) continue;
      const double k = 0.45 * norm_q;
      const PzBound pz = paley_zygmund_bound(norm_q, norm_2q, q, k);
      if (!pz.applicable) {
        detail = "Paley-Zygmund unexpectedly inapplicable at " + inst.label;
        return false;
      }
      if (pz.value > exact_tail(inst.params, inst.x, k) + 1e-12) {
        detail = "Paley-Zygmund violated at " + inst.label;
        return false;
      }
    }
  }
  return true;
}

bool ac6_moment_sandwich(std::string& detail) {
  std::vector<Instance> instances = tiny_grid();
  for (const auto& [m, s] : std::vector<std::pair<Index, Index>>{
           {4, 1}, {8, 1}, {16, 1}, {4, 2}}) {
    SjlParams p;
    p.n = 4;
    p.m = m;
    p.s = s;
    instances.push_back({p, hard_vector(0.5, 4),
                         "hard m=" + std::to_string(m) +
                             " s=" + std::to_string(s)});
  }
  for (const Instance& inst : instances) {
    const double v = inst.x.linf_ratio;
    for (int q = 2; q <= std::min<Index>(inst.params.m, 16); q *= 2) {
      const double exact = exact_moment(inst.params, inst.x, q).value;
      const RegimeReport upper = eval_moment_upper(
          double(inst.params.m), double(inst.params.s), v, q);
      if (!upper.flagged() && upper.value > 0.0 &&
          exact > 100.0 * upper.value * (1.0 + 1e-12)) {
        detail = "upper bound too small at " + inst.label + " q=" +
                 std::to_string(q);
        return false;
      }
      const RegimeReport lower = eval_moment_lower(
          double(inst.params.m), double(inst.params.s), v, q);
      if (!lower.flagged() && lower.value > 0.0 &&
          lower.value > 100.0 * exact + 1e-12) {
        detail = "lower bound too large at " + inst.label + " q=" +
                 std::to_string(q);
        return false;
      }
    }
  }
  return true;
}

bool ac7_working_dimension(std::string& detail) {
  SjlParams p;
  p.n = 64;
  p.m = 96;
  p.s = 2;
  const double eps = 0.5;
  const double delta = 0.05;
  const std::int64_t trials = 10000;
  std::int64_t total_failures = 0;
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const UnitVector x = random_vector(p.n, 500 + k);
    const TailEstimate tail = mc_tail(p, x, eps, trials, Seed{9000, k});
    total_failures += tail.failures;
    worst = std::max(worst, tail.failure_rate);
    if (tail.failure_rate > delta) {
      detail = "vector " + std::to_string(k) + " failed at rate " +
               std::to_string(tail.failure_rate);
      return false;
    }
  }
  const double pooled = double(total_failures) / double(20 * trials);
  std::ostringstream note;
  note << "pooled rate " << pooled << ", worst " << worst;
  detail = note.str();
  return pooled <= delta;
}

bool ac8_threshold_monotonicity(std::string& detail) {
  std::vector<double> grid;
  for (int k = 3; k <= 15; ++k) grid.push_back(double(k) * 0.05);
  // 0.55 keeps every outcome atom 2k/(N*s) away from the tail cutoff, so the
  // strict comparison is not decided by rounding noise.
  const double eps = 0.55;
  const double delta = 0.05;
  const Index n = 48;
  const std::int64_t trials = 20000;
  const Seed seed{777, 0};

  std::vector<double> by_s;
  for (const Index s : {Index(1), Index(2), Index(4)}) {
    by_s.push_back(
        empirical_threshold(16, eps, delta, s, n, grid, trials, seed).v_hat);
  }
  for (std::size_t i = 1; i < by_s.size(); ++i) {
    if (by_s[i] < by_s[i - 1]) {
      detail = "threshold dropped from s";
      return false;
    }
  }
  if (!(by_s[0] > 0.0)) {
    detail = "no passing ratio at s=1, m=16";
    return false;
  }
  if (!(by_s.back() > by_s.front())) {
    detail = "no strict growth from s=1 to s=4";
    return false;
  }
  const double ratio = by_s[2] / by_s[0];
  if (ratio < 1.0 || ratio > 8.0) {
    detail = "s=4 over s=1 ratio " + std::to_string(ratio);
    return false;
  }

  std::vector<double> by_m;
  for (const Index m : {Index(8), Index(16), Index(24), Index(40), Index(64),
                        Index(96)}) {
    by_m.push_back(
        empirical_threshold(m, eps, delta, 1, n, grid, trials, seed).v_hat);
  }
  for (std::size_t i = 1; i < by_m.size(); ++i) {
    if (by_m[i] < by_m[i - 1]) {
      detail = "threshold dropped from m";
      return false;
    }
  }
  if (!(by_m.back() > by_m.front())) {
    detail = "no strict growth from m=8 to m=96";
    return false;
  }
  std::ostringstream note;
  note << "v_hat by s {";
  for (double v : by_s) note << " " << v;
  note << " }, by m {";
  for (double v : by_m) note << " " << v;
  note << " }";
  detail = note.str();
  return true;
}

bool ac9_gaussian_dominance(std::string& detail) {
  const double p = 6.0;  // delta = e^-6
  const double eps = 0.5;
  const int q = 6;
  const std::int64_t trials = 200000;
  std::vector<double> ratios;
  std::ostringstream note;
  for (const Index m : {Index(24), Index(56), Index(120)}) {
    const double log_arg = double(m) * eps / p;
    const double v_formula = std::sqrt(eps) * std::log(log_arg) / p;
    const Index count = hard_count_even(v_formula);
    SjlParams params;
    params.n = count;
    params.m = m;
    params.s = 1;
    const UnitVector x = hard_vector(1.0 / std::sqrt(double(count)), count);
    const PairedMoments paired =
        gaussian_vs_rademacher(params, x, q, trials, Seed{1812, 0});
    if (paired.ratio < 1.0 - 3.0 * paired.ratio_std_error) {
      detail = "ratio below one at m=" + std::to_string(m);
      return false;
    }
    ratios.push_back(paired.ratio);
    note << " m=" << m << " N=" << count << " ratio=" << paired.ratio;
  }
  detail = "ratios" + note.str();
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (ratios[i] <= ratios[i - 1]) {
      detail = "ratio not increasing at step " + std::to_string(i);
      return false;
    }
  return true;
}

bool ac10_cli_determinism(std::string& detail) {
  const std::string matrix =
      "/tmp/sjl_acceptance_" + std::to_string(::getpid()) + ".mtx";
  const RunResult prep = run_shell(std::string(SJL_BIN) +
                                   " sample --n 4 --m 6 --s 2 --seed 5 --out " +
                                   matrix + " 2>/dev/null");
  if (prep.code != 0) {
    detail = "sample --out failed";
    return false;
  }
  const std::vector<std::string> commands = {
      "sample --n 6 --m 8 --s 2 --seed 5",
      "project --matrix " + matrix + " --x random --seed 5",
      "moments --n 4 --m 6 --s 2 --q 4 --trials 2000 --seed 3 --x hard:0.5",
      "tail --n 4 --m 6 --s 2 --eps 0.4 --trials 2000 --seed 3 --x random",
      "threshold-sweep --m 8 --eps 0.5 --delta 0.1 --s 1 --v-grid 0.5,1.0 "
      "--trials 1000 --seed 7",
      "moment-check --n 4 --m 4 --s 1 --x hard:0.5 --q-grid 2,4 "
      "--trials 2000 --seed 9",
      "appendix-a --m-grid 24 --eps 0.5 --delta 0.05 --trials 1000 --seed 11",
      "bounds --m 4096 --eps 0.5 --delta 0.05 --s 2",
  };
  bool ok = true;
  for (const std::string& command : commands) {
    const RunResult one = run_shell(std::string(SJL_BIN) + " " + command +
                                    " --threads 1 2>/dev/null");
    const RunResult three = run_shell(std::string(SJL_BIN) + " " + command +
                                      " --threads 3 2>/dev/null");
    if (one.code != 0 || three.code != 0 || one.out.empty() ||
        one.out != three.out) {
      detail = "mismatch on: " + command;
      ok = false;
      break;
    }
  }
  std::remove(matrix.c_str());
  return ok;
}

struct Criterion {
  int id;
  const char* description;
  std::function<bool(std::string&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> table = {
      {1, "exact second moments match the closed form and odd moments vanish",
       ac1_exact_moments},
      {2, "exact row second moments match the closed form",
       ac2_exact_row_moments},
      {3, "Monte Carlo estimates agree with enumeration within three sigma",
       ac3_monte_carlo_calibration},
      {4, "sampled columns stay s-sparse and basis vectors incur zero error",
       ac4_structure_and_basis},
      {5, "Markov and Paley-Zygmund bounds bracket the exact tails",
       ac5_tail_bounds_bracket},
      {6, "moment formulas sandwich the exact norms within a factor of 100",
       ac6_moment_sandwich},
      {7, "random vectors at the working dimension fail at most delta",
       ac7_working_dimension},
      {8, "empirical thresholds grow with sparsity and dimension",
       ac8_threshold_monotonicity},
      {9, "Gaussian moments dominate sign moments and the gap widens",
       ac9_gaussian_dominance},
      {10, "command line output is identical across worker counts",
       ac10_cli_determinism},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > 10) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 1;
    }
    wanted.push_back(id);
  }
  if (wanted.empty())
    for (const Criterion& c : criteria()) wanted.push_back(c.id);

  int failures = 0;
  for (const int id : wanted) {
    const Criterion& c = criteria()[std::size_t(id - 1)];
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& err) {
      detail = std::string("exception: ") + err.what();
      ok = false;
    }
    std::string line = "AC" + std::to_string(c.id) + (ok ? " PASS: " : " FAIL: ") +
                       c.description;
    if (!detail.empty()) line += " [" + detail + "]";
    std::puts(line.c_str());
    if (!ok) ++failures;
  }
  return failures;
}
