#pragma once

#include <cmath>

namespace sjl {

// Neumaier compensated sum. Reductions over trial or configuration values go
// through this in a fixed order, which keeps results independent of the
// thread count and accurate enough for the 1e-12 identity checks.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// x^k for small non-negative integer k, multiply ladder.
constexpr double ipow(double x, int k) noexcept {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace sjl
