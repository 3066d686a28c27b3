#include "sjl/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sjl {

const char* to_string(Flavor flavor) {
  return flavor == Flavor::kUniform ? "uniform" : "block";
}

Flavor flavor_from_string(std::string_view name) {
  if (name == "uniform") return Flavor::kUniform;
  if (name == "block") return Flavor::kBlock;
  throw std::invalid_argument("unknown flavor \"" + std::string(name) +
                              "\"; expected uniform or block");
}

const char* to_string(Method method) {
  return method == Method::kExact ? "exact" : "mc";
}

void SjlParams::validate() const {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (s < 1) throw std::invalid_argument("s must be at least 1");
  if (s > m) throw std::invalid_argument("s exceeds m");
  if (flavor == Flavor::kBlock && m % s != 0)
    throw std::invalid_argument("block flavor needs s to divide m");
}

UnitVector make_unit_vector(const Vector& raw) {
  if (raw.size() == 0) throw std::invalid_argument("unit vector: input is empty");
  if (!raw.allFinite())
    throw std::invalid_argument("unit vector: input has non-finite entries");
  const double norm = raw.norm();
  if (norm == 0.0) throw std::invalid_argument("unit vector: input is zero");
  UnitVector u;
  u.values = raw / norm;
  u.linf_ratio = u.values.cwiseAbs().maxCoeff();
  return u;
}

Index hard_count(double v) {
  if (!(v > 0.0) || !(v <= 1.0))
    throw std::invalid_argument("hard vector: v must lie in (0, 1]");
  return Index(std::llround(1.0 / (v * v)));
}

Index hard_count_even(double v) {
  if (!(v > 0.0) || !(v <= 1.0))
    throw std::invalid_argument("hard vector: v must lie in (0, 1]");
  const double raw = 1.0 / (v * v);
  if (raw < 1.5) return 1;
  return std::max<Index>(2, 2 * Index(std::llround(raw / 2.0)));
}

UnitVector hard_vector(double v, Index n) {
  const Index count = hard_count(v);
  if (count < 1) throw std::invalid_argument("hard vector: v is too large");
  if (count > n) {
    std::ostringstream msg;
    msg << "hard vector: needs " << count << " coordinates but n = " << n;
    throw std::invalid_argument(msg.str());
  }
  UnitVector u;
  u.values = Vector::Zero(n);
  const double entry = 1.0 / std::sqrt(double(count));
  u.values.head(count).setConstant(entry);
  u.linf_ratio = entry;
  return u;
}

const std::vector<std::pair<std::string, double BoundConstants::*>>&
BoundConstants::fields() {
  static const std::vector<std::pair<std::string, double BoundConstants::*>> table = {
      {"C_M", &BoundConstants::c_m},
      {"C_v", &BoundConstants::c_v},
      {"C_S", &BoundConstants::c_s},
      {"C_U", &BoundConstants::c_u},
      {"C_M1", &BoundConstants::c_m1},
      {"C_M2", &BoundConstants::c_m2},
      {"C_E1", &BoundConstants::c_e1},
      {"C_E2", &BoundConstants::c_e2},
      {"C_L", &BoundConstants::c_l},
      {"C_T", &BoundConstants::c_t},
      {"C_2", &BoundConstants::c_2},
      {"C_moment_upper", &BoundConstants::c_moment_upper},
      {"C_moment_lower", &BoundConstants::c_moment_lower},
      {"C_row_upper", &BoundConstants::c_row_upper},
      {"C_row_lower", &BoundConstants::c_row_lower},
  };
  return table;
}

void BoundConstants::set(std::string_view name, double value) {
  for (const auto& [key, member] : fields()) {
    if (key == name) {
      this->*member = value;
      return;
    }
  }
  std::ostringstream msg;
  msg << "unknown constant \"" << name << "\"; valid names:";
  for (const auto& [key, member] : fields()) msg << ' ' << key;
  throw std::invalid_argument(msg.str());
}

void BoundConstants::validate() const {
  for (const auto& [key, member] : fields()) {
    const double value = this->*member;
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument("constant " + key +
                                  " must be strictly positive and finite");
  }
}

std::string RegimeReport::flag_string() const {
  std::string out;
  const auto add = [&out](const char* name) {
    if (!out.empty()) out += ',';
    out += name;
  };
  if (flags.below_domain) add("below-domain");
  if (flags.indeterminate) add("indeterminate");
  if (flags.not_applicable) add("not-applicable");
  if (flags.log_domain) add("log-domain");
  if (flags.overlap) add("overlap");
  if (flags.gate_exceeded) add("gate-exceeded");
  if (flags.s_out_of_range) add("s-out-of-range");
  if (flags.m_out_of_range) add("m-out-of-range");
  return out.empty() ? "-" : out;
}

}  // namespace sjl
