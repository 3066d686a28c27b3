#include "sjl/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "sjl/accumulate.hpp"

namespace sjl {

namespace detail {

FisherYates::FisherYates(Index m) : perm_(std::size_t(m)) {
  std::iota(perm_.begin(), perm_.end(), 0);
}

void FisherYates::draw(CounterRng& rng, Index s, std::int32_t* rows) {
  const Index m = Index(perm_.size());
  picks_.resize(std::size_t(s));
  for (Index k = 0; k < s; ++k) {
    const Index j = k + Index(rng.next_below(std::uint64_t(m - k)));
    std::swap(perm_[std::size_t(k)], perm_[std::size_t(j)]);
    picks_[std::size_t(k)] = std::int32_t(j);
    rows[k] = perm_[std::size_t(k)];
  }
  // Undo the swaps so the scratch is reusable without a re-fill.
  for (Index k = s - 1; k >= 0; --k)
    std::swap(perm_[std::size_t(k)], perm_[std::size_t(picks_[std::size_t(k)])]);
  std::sort(rows, rows + s);
}

void sample_column(const SjlParams& params, CounterRng& rng, FisherYates& fy,
                   std::int32_t* rows, std::int8_t* signs) {
  if (params.flavor == Flavor::kUniform) {
    fy.draw(rng, params.s, rows);
  } else {
    const Index height = params.m / params.s;
    for (Index k = 0; k < params.s; ++k)
      rows[k] = std::int32_t(k * height + Index(rng.next_below(std::uint64_t(height))));
  }
  for (Index k = 0; k < params.s; ++k)
    signs[k] = rng.next_sign() > 0 ? std::int8_t(1) : std::int8_t(-1);
}

}  // namespace detail

SjlMatrix sample_matrix(const SjlParams& params, const Seed& seed) {
  params.validate();
  SjlMatrix a;
  a.params = params;
  a.seed = seed;
  a.rows.resize(std::size_t(params.n * params.s));
  a.signs.resize(std::size_t(params.n * params.s));
  detail::FisherYates fy(params.m);
  for (Index c = 0; c < params.n; ++c) {
    CounterRng rng(seed, 0, std::uint64_t(c));
    detail::sample_column(params, rng, fy, a.rows.data() + c * params.s,
                          a.signs.data() + c * params.s);
  }
  return a;
}

Vector project(const SjlMatrix& a, const UnitVector& x) {
  const SjlParams& p = a.params;
  if (x.values.size() != p.n)
    throw std::invalid_argument("project: dimension mismatch");
  Vector y = Vector::Zero(p.m);
  for (Index c = 0; c < p.n; ++c) {
    const double xc = x.values[c];
    if (xc == 0.0) continue;
    for (Index k = 0; k < p.s; ++k)
      y[a.row_at(c, k)] += a.sign_at(c, k) * xc;
  }
  y *= 1.0 / std::sqrt(double(p.s));
  return y;
}

double error_sample(const SjlMatrix& a, const UnitVector& x) {
  const SjlParams& p = a.params;
  if (x.values.size() != p.n)
    throw std::invalid_argument("error sample: dimension mismatch");
  Vector t = Vector::Zero(p.m);
  for (Index c = 0; c < p.n; ++c) {
    const double xc = x.values[c];
    if (xc == 0.0) continue;
    for (Index k = 0; k < p.s; ++k)
      t[a.row_at(c, k)] += a.sign_at(c, k) * xc;
  }
  CompensatedSum sq;
  for (Index r = 0; r < p.m; ++r) sq.add(t[r] * t[r]);
  return sq.value() / double(p.s) - 1.0;
}

double error_sample_gaussian(const SjlMatrix& a, const UnitVector& x, const Seed& seed) {
  const SjlParams& p = a.params;
  if (x.values.size() != p.n)
    throw std::invalid_argument("error sample: dimension mismatch");
  Vector c_sum = Vector::Zero(p.m);
  Vector d_sum = Vector::Zero(p.m);
  for (Index c = 0; c < p.n; ++c) {
    const double xc = x.values[c];
    if (xc == 0.0) continue;
    CounterRng rng(seed, 0, std::uint64_t(c));
    for (Index k = 0; k < p.s; ++k) {
      const double term = rng.next_normal() * xc;
      c_sum[a.row_at(c, k)] += term;
      d_sum[a.row_at(c, k)] += term * term;
    }
  }
  CompensatedSum acc;
  for (Index r = 0; r < p.m; ++r) acc.add(c_sum[r] * c_sum[r] - d_sum[r]);
  return acc.value() / double(p.s);
}

TrialKernel::TrialKernel(const SjlParams& params, const UnitVector& x)
    : params_(params), fy_(params.m) {
  params_.validate();
  if (x.values.size() != params_.n)
    throw std::invalid_argument("trial kernel: dimension mismatch");
  for (Index i = 0; i < params_.n; ++i) {
    if (x.values[i] == 0.0) continue;
    support_.push_back(i);
    xval_.push_back(x.values[i]);
  }
  col_rows_.resize(std::size_t(params_.s));
  col_signs_.resize(std::size_t(params_.s));
  acc_sign_.assign(std::size_t(params_.m), 0.0);
  acc_gauss_.assign(std::size_t(params_.m), 0.0);
  acc_diag_.assign(std::size_t(params_.m), 0.0);
  stamped_.assign(std::size_t(params_.m), 0);
  touched_.reserve(std::size_t(params_.s) * support_.size());
}

template <bool WithGaussian>
std::pair<double, double> TrialKernel::run(const Seed& seed, std::uint64_t trial) {
  touched_.clear();
  for (std::size_t ci = 0; ci < support_.size(); ++ci) {
    CounterRng rng(seed, trial, std::uint64_t(support_[ci]));
    detail::sample_column(params_, rng, fy_, col_rows_.data(), col_signs_.data());
    const double xc = xval_[ci];
    for (Index k = 0; k < params_.s; ++k) {
      const std::size_t r = std::size_t(col_rows_[std::size_t(k)]);
      if (!stamped_[r]) {
        stamped_[r] = 1;
        touched_.push_back(std::int32_t(r));
        acc_sign_[r] = 0.0;
        if constexpr (WithGaussian) {
          acc_gauss_[r] = 0.0;
          acc_diag_[r] = 0.0;
        }
      }
      acc_sign_[r] += double(col_signs_[std::size_t(k)]) * xc;
      if constexpr (WithGaussian) {
        const double term = rng.next_normal() * xc;
        acc_gauss_[r] += term;
        acc_diag_[r] += term * term;
      }
    }
  }
  CompensatedSum sq;
  CompensatedSum chaos;
  for (const std::int32_t r : touched_) {
    const std::size_t i = std::size_t(r);
    sq.add(acc_sign_[i] * acc_sign_[i]);
    if constexpr (WithGaussian) chaos.add(acc_gauss_[i] * acc_gauss_[i] - acc_diag_[i]);
    stamped_[i] = 0;
  }
  const double inv_s = 1.0 / double(params_.s);
  const double r_sign = sq.value() * inv_s - 1.0;
  const double r_gauss = WithGaussian ? chaos.value() * inv_s : 0.0;
  return {r_sign, r_gauss};
}

double TrialKernel::rademacher(const Seed& seed, std::uint64_t trial) {
  return run<false>(seed, trial).first;
}

std::pair<double, double> TrialKernel::paired(const Seed& seed, std::uint64_t trial) {
  return run<true>(seed, trial);
}

}  // namespace sjl
