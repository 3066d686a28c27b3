#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sjl/rng.hpp"

namespace sjl {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// How column supports are drawn: kUniform picks a uniform s-subset of the m
// rows, kBlock picks one row inside each of the s contiguous blocks of
// height m / s.
enum class Flavor { kUniform, kBlock };

const char* to_string(Flavor flavor);
Flavor flavor_from_string(std::string_view name);

struct SjlParams {
  Index n = 0;  // columns (ambient dimension)
  Index m = 0;  // rows (target dimension)
  Index s = 1;  // nonzeros per column
  Flavor flavor = Flavor::kUniform;

  // Throws std::invalid_argument: needs n >= 1, 1 <= s <= m, and s | m for
  // the block flavor.
  void validate() const;
};

// Column-compressed sparse sign matrix. Column c holds s (row, sign) pairs
// sorted by row; applying the matrix scales entries by 1/sqrt(s).
struct SjlMatrix {
  SjlParams params;
  Seed seed;
  std::vector<std::int32_t> rows;   // n * s row indices
  std::vector<std::int8_t> signs;   // matching +1 / -1

  std::int32_t row_at(Index column, Index k) const {
    return rows[std::size_t(column * params.s + k)];
  }
  double sign_at(Index column, Index k) const {
    return double(signs[std::size_t(column * params.s + k)]);
  }
};

// Unit vector together with its largest absolute entry; the experiments are
// parameterized by that pair.
struct UnitVector {
  Vector values;
  double linf_ratio = 0.0;
};

// Normalizes raw to unit length. Throws std::invalid_argument when raw is
// empty, zero, or not finite.
UnitVector make_unit_vector(const Vector& raw);

// round(1 / v^2) for v in (0, 1].
Index hard_count(double v);

// Experiment snap of hard_count to an even value; v close to 1 degenerates
// to the single-spike count 1.
Index hard_count_even(double v);

// N = round(1 / v^2) leading entries equal to 1/sqrt(N), zero elsewhere.
// Throws when N exceeds n.
UnitVector hard_vector(double v, Index n);

enum class Method { kExact, kMonteCarlo };

const char* to_string(Method method);

// A q-norm estimate (E|R|^q)^(1/q); exact results carry zero std_error and
// zero trials.
struct MomentEstimate {
  int q = 2;
  double value = 0.0;
  Method method = Method::kExact;
  double std_error = 0.0;
  std::int64_t trials = 0;
};

// Every constant the threshold and moment formulas carry, defaulting to 1.
// The names are the ones the command line accepts.
struct BoundConstants {
  double c_m = 1.0;    // C_M, dimension floor of the threshold domain
  double c_v = 1.0;    // C_v, leading factor of the threshold value forms
  double c_s = 1.0;    // C_S, exponent scale splitting the sparse regime
  double c_u = 1.0;    // C_U, exponent scale of the whole-space cutoff
  double c_m1 = 1.0;   // C_M1, dimension floor below which the threshold is zero
  double c_m2 = 1.0;   // C_M2, dimension floor of the evaluated value forms
  double c_e1 = 1.0;   // C_E1, exponent scale of the upper threshold's split
  double c_e2 = 1.0;   // C_E2, reserved second exponent scale
  double c_l = 1.0;    // C_L, exponent scale in the dimension lower bound
  double c_t = 1.0;    // C_T, exponent scale of its dense arm
  double c_2 = 1.0;    // C_2, applicability constant of the moment upper bound
  double c_moment_upper = 1.0;  // leading constant of the moment upper bound
  double c_moment_lower = 1.0;  // leading constant of the moment lower bound
  double c_row_upper = 1.0;     // leading constant of the row moment upper bound
  double c_row_lower = 1.0;     // leading constant of the row moment lower bound

  // (name, member) in a fixed order; used by set(), the CLI, and echoes.
  static const std::vector<std::pair<std::string, double BoundConstants::*>>& fields();

  // Throws std::invalid_argument on an unknown name, listing the valid ones.
  void set(std::string_view name, double value);

  // Throws unless every constant is strictly positive and finite.
  void validate() const;
};

struct RegimeFlags {
  bool below_domain = false;    // query sits under the formula's domain floor
  bool indeterminate = false;   // inside a gap the formulas do not cover
  bool not_applicable = false;  // hypotheses of the formula fail
  bool log_domain = false;      // a log argument was not positive
  bool overlap = false;         // several guards held; the first listed won
  bool gate_exceeded = false;   // value beyond the formula's validity gate
  bool s_out_of_range = false;  // sparsity outside the stated range
  bool m_out_of_range = false;  // target dimension outside the stated range

  bool any() const {
    return below_domain || indeterminate || not_applicable || log_domain ||
           gate_exceeded || s_out_of_range || m_out_of_range;
  }
};

// Result of evaluating one piecewise formula: which branch fired, its value,
// any soft flags, every branch that was applicable (for the lower bounds),
// and an echo of the inputs.
struct RegimeReport {
  std::string branch;
  double value = 0.0;
  RegimeFlags flags;
  std::vector<std::pair<std::string, double>> applicable;
  std::vector<std::pair<std::string, double>> inputs;

  bool flagged() const { return flags.any(); }
  // "below-domain,log-domain" style; "-" when nothing is raised.
  std::string flag_string() const;
};

}  // namespace sjl
