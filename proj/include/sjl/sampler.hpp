#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sjl/core.hpp"
#include "sjl/rng.hpp"

namespace sjl {

// Draws a sparse sign matrix: exactly s nonzeros per column, value
// +-1/sqrt(s). Column c is a pure function of (seed, c), independent of n.
SjlMatrix sample_matrix(const SjlParams& params, const Seed& seed);

// A x, visiting only the columns where x is nonzero.
Vector project(const SjlMatrix& a, const UnitVector& x);

// |A x|^2 - 1, accumulated from unscaled row sums so that basis vectors give
// exactly zero.
double error_sample(const SjlMatrix& a, const UnitVector& x);

// The same quadratic chaos with fresh standard normals in place of the signs
// and the diagonal removed. Supports come from `a`, normals from `seed`;
// pass a stream distinct from the one that sampled `a`.
double error_sample_gaussian(const SjlMatrix& a, const UnitVector& x, const Seed& seed);

namespace detail {

// Scratch for partial Fisher-Yates draws over [0, m).
struct FisherYates {
  explicit FisherYates(Index m);
  // Writes s distinct uniform rows, sorted ascending.
  void draw(CounterRng& rng, Index s, std::int32_t* rows);

 private:
  std::vector<std::int32_t> perm_;
  std::vector<std::int32_t> picks_;
};

// One column's support and signs. Draw order (rows, then signs) is part of
// the reproducibility contract.
void sample_column(const SjlParams& params, CounterRng& rng, FisherYates& fy,
                   std::int32_t* rows, std::int8_t* signs);

}  // namespace detail

// Repeated error draws at fixed (params, x) without materializing matrices.
// Only the support of x is sampled. Trial t of a seed is the same number no
// matter how trials are scheduled across threads, and trial 0 draws the same
// supports and signs as sample_matrix(seed).
class TrialKernel {
 public:
  TrialKernel(const SjlParams& params, const UnitVector& x);

  // R for one trial of the sign distribution.
  double rademacher(const Seed& seed, std::uint64_t trial);

  // (sign chaos, Gaussian chaos) sharing one support draw.
  std::pair<double, double> paired(const Seed& seed, std::uint64_t trial);

 private:
  template <bool WithGaussian>
  std::pair<double, double> run(const Seed& seed, std::uint64_t trial);

  SjlParams params_;
  std::vector<Index> support_;
  std::vector<double> xval_;
  detail::FisherYates fy_;
  std::vector<std::int32_t> col_rows_;
  std::vector<std::int8_t> col_signs_;
  std::vector<double> acc_sign_;   // per-row linear form of the sign chaos
  std::vector<double> acc_gauss_;  // per-row linear form of the Gaussian chaos
  std::vector<double> acc_diag_;   // per-row removed diagonal
  std::vector<std::int32_t> touched_;
  std::vector<std::uint8_t> stamped_;
};

}  // namespace sjl
