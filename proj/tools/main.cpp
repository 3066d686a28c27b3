#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sjl/bounds.hpp"
#include "sjl/core.hpp"
#include "sjl/exact.hpp"
#include "sjl/matrix_io.hpp"
#include "sjl/monte_carlo.hpp"
#include "sjl/rng.hpp"
#include "sjl/sampler.hpp"

namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// Shortest round-trip formatting keeps outputs byte-stable across runs.
std::string fmt(double x) {
  char buf[40];
  const auto out = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, out.ptr);
}

std::string hex_seed(const sjl::Seed& seed) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "0x%016llx:0x%016llx",
                static_cast<unsigned long long>(seed.root),
                static_cast<unsigned long long>(seed.stream));
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number '" + text + "' in " + what);
  }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::uint64_t value = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument("");
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer '" + text + "' in " + what);
  }
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : split(text, ','))
    out.push_back(parse_double(item, what));
  if (out.empty()) throw std::invalid_argument(what + ": empty list");
  return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text,
                                         const std::string& what) {
  std::vector<std::int64_t> out;
  for (const std::string& item : split(text, ','))
    out.push_back(std::int64_t(parse_u64(item, what)));
  if (out.empty()) throw std::invalid_argument(what + ": empty list");
  return out;
}

struct Options {
  std::int64_t n = 8;
  std::int64_t m = 16;
  std::int64_t s = 1;
  std::string flavor = "uniform";
  double eps = 0.5;
  double delta = 0.05;
  int q = 2;
  std::int64_t trials = 100000;
  std::string seed_text = "1";
  std::string v_grid_text;
  std::string m_grid_text;
  std::string q_grid_text;
  std::string constants_text;
  std::string x_spec = "random";
  std::string matrix_path;
  std::string method = "both";
  std::string out_path;
  std::string format = "csv";
  double budget = 1e8;
  int threads = 1;
  bool n_given = false;
};

sjl::Seed parse_seed(const std::string& text) {
  sjl::Seed seed;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    seed.root = parse_u64(text, "--seed");
  } else {
    seed.root = parse_u64(text.substr(0, colon), "--seed");
    seed.stream = parse_u64(text.substr(colon + 1), "--seed");
  }
  return seed;
}

sjl::BoundConstants parse_constants(const std::string& text) {
  sjl::BoundConstants constants;
  if (text.empty()) return constants;
  for (const std::string& pair : split(text, ',')) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("constants: expected name=value, got '" +
                                  pair + "'");
    constants.set(pair.substr(0, eq),
                  parse_double(pair.substr(eq + 1), "--constants"));
  }
  constants.validate();
  return constants;
}

sjl::SjlParams make_params(const Options& opt) {
  sjl::SjlParams params;
  params.n = opt.n;
  params.m = opt.m;
  params.s = opt.s;
  params.flavor = sjl::flavor_from_string(opt.flavor);
  params.validate();
  return params;
}

sjl::EnumerationBudget make_budget(const Options& opt) {
  if (!(opt.budget >= 1.0))
    throw std::invalid_argument("--budget must be at least 1");
  return sjl::EnumerationBudget{std::uint64_t(opt.budget)};
}

// x comes from a small spec language; random vectors draw from a stream that
// the trial kernels never touch, so estimates stay decoupled from the choice.
sjl::UnitVector make_x(const Options& opt, const sjl::Seed& seed, sjl::Index n) {
  const std::string& spec = opt.x_spec;
  if (spec == "e1") {
    sjl::Vector raw = sjl::Vector::Zero(n);
    raw[0] = 1.0;
    return sjl::make_unit_vector(raw);
  }
  if (spec.rfind("hard:", 0) == 0)
    return sjl::hard_vector(parse_double(spec.substr(5), "--x hard:<v>"), n);
  if (spec == "random" || spec.rfind("random:", 0) == 0) {
    const std::uint64_t index =
        spec == "random" ? 0 : parse_u64(spec.substr(7), "--x random:<k>");
    const sjl::Seed xseed{seed.root, seed.stream ^ 0x9d2c5680a5a5a5a5ULL};
    sjl::CounterRng rng(xseed, index, 0);
    sjl::Vector raw(n);
    for (sjl::Index i = 0; i < n; ++i) raw[i] = rng.next_normal();
    return sjl::make_unit_vector(raw);
  }
  const std::vector<double> values = parse_double_list(spec, "--x");
  if (sjl::Index(values.size()) != n)
    throw std::invalid_argument("--x literal list must have exactly n entries");
  sjl::Vector raw(sjl::Index(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    raw[sjl::Index(i)] = values[i];
  return sjl::make_unit_vector(raw);
}

std::string constants_echo(const sjl::BoundConstants& constants) {
  std::string text;
  for (const auto& [name, member] : sjl::BoundConstants::fields()) {
    if (!text.empty()) text += ',';
    text += name + "=" + fmt(constants.*member);
  }
  return text;
}

using EchoPairs = std::vector<std::pair<std::string, std::string>>;

EchoPairs echo_pairs(const Options& opt, const sjl::Seed& seed,
                     const sjl::BoundConstants& constants) {
  EchoPairs out;
  out.emplace_back("n", std::to_string(opt.n));
  out.emplace_back("m", std::to_string(opt.m));
  out.emplace_back("s", std::to_string(opt.s));
  out.emplace_back("flavor", opt.flavor);
  out.emplace_back("eps", fmt(opt.eps));
  out.emplace_back("delta", fmt(opt.delta));
  out.emplace_back("q", std::to_string(opt.q));
  out.emplace_back("trials", std::to_string(opt.trials));
  out.emplace_back("seed", hex_seed(seed));
  if (!opt.v_grid_text.empty()) out.emplace_back("v-grid", opt.v_grid_text);
  if (!opt.m_grid_text.empty()) out.emplace_back("m-grid", opt.m_grid_text);
  if (!opt.q_grid_text.empty()) out.emplace_back("q-grid", opt.q_grid_text);
  out.emplace_back("x", opt.x_spec);
  if (!opt.matrix_path.empty()) out.emplace_back("matrix", opt.matrix_path);
  out.emplace_back("method", opt.method);
  out.emplace_back("constants", constants_echo(constants));
  out.emplace_back("format", opt.format);
  out.emplace_back("budget", fmt(opt.budget));
  return out;
}

std::string csv_comments(const std::string& command, const EchoPairs& echo) {
  std::string out = "# sjl " + std::string(kVersion) + " command=" + command + "\n";
  for (const auto& [key, value] : echo) out += "# " + key + "=" + value + "\n";
  return out;
}

ordered_json echo_json(const EchoPairs& echo) {
  ordered_json j;
  for (const auto& [key, value] : echo) j[key] = value;
  return j;
}

ordered_json meta_json(const std::string& command) {
  ordered_json j;
  j["tool"] = "sjl";
  j["version"] = kVersion;
  j["command"] = command;
  return j;
}

ordered_json report_json(const sjl::RegimeReport& report) {
  ordered_json j;
  j["value"] = report.value;
  j["branch"] = report.branch;
  j["flags"] = report.flag_string();
  if (!report.applicable.empty()) {
    ordered_json arms = ordered_json::array();
    for (const auto& [name, value] : report.applicable)
      arms.push_back(ordered_json{{"branch", name}, {"value", value}});
    j["applicable"] = arms;
  }
  return j;
}

void emit(const Options& opt, const std::string& text) {
  if (opt.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(opt.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + opt.out_path);
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + opt.out_path);
}

std::vector<double> default_v_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(double(k) * 0.05);
  return grid;
}

// ---------------------------------------------------------------------------

int cmd_sample(const Options& opt) {
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::SjlParams params = make_params(opt);
  const sjl::SjlMatrix a = sjl::sample_matrix(params, seed);
  const std::string text = sjl::matrix_to_string(a);

  std::vector<char> touched(std::size_t(params.m), 0);
  std::int64_t plus = 0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    touched[std::size_t(a.rows[i])] = 1;
    if (a.signs[i] > 0) ++plus;
  }
  const auto rows_touched = std::count(touched.begin(), touched.end(), char(1));
  const std::string audit =
      "columns=" + std::to_string(params.n) + " nonzeros-per-column=" +
      std::to_string(params.s) + " rows-touched=" + std::to_string(rows_touched) +
      "/" + std::to_string(params.m) + " plus-signs=" + std::to_string(plus) +
      "/" + std::to_string(std::int64_t(a.signs.size())) + "\n";

  if (opt.out_path.empty()) {
    std::cout << text;
    std::cerr << audit;
  } else {
    emit(opt, text);
    std::cout << audit;
  }
  return 0;
}

int cmd_project(const Options& opt) {
  if (opt.matrix_path.empty())
    throw std::invalid_argument("project: needs --matrix <file>");
  std::ifstream in(opt.matrix_path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open matrix file " + opt.matrix_path);
  const sjl::SjlMatrix a = sjl::read_matrix(in);
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::UnitVector x = make_x(opt, seed, a.params.n);
  const sjl::Vector y = sjl::project(a, x);
  const double r = sjl::error_sample(a, x);
  const sjl::BoundConstants constants = parse_constants(opt.constants_text);
  const EchoPairs echo = echo_pairs(opt, seed, constants);

  if (opt.format == "json") {
    ordered_json j;
    j["meta"] = meta_json("project");
    j["config"] = echo_json(echo);
    j["norm_sq"] = y.squaredNorm();
    j["r"] = r;
    ordered_json values = ordered_json::array();
    for (sjl::Index i = 0; i < y.size(); ++i) values.push_back(y[i]);
    j["y"] = values;
    emit(opt, j.dump(2) + "\n");
    return 0;
  }
  std::string out = csv_comments("project", echo);
  out += "# norm_sq=" + fmt(y.squaredNorm()) + "\n";
  out += "# r=" + fmt(r) + "\n";
  out += "index,value\n";
  for (sjl::Index i = 0; i < y.size(); ++i)
    out += std::to_string(i) + "," + fmt(y[i]) + "\n";
  emit(opt, out);
  return 0;
}

int cmd_moments(const Options& opt) {
  if (opt.method != "both" && opt.method != "exact" && opt.method != "mc")
    throw std::invalid_argument("--method must be both, exact, or mc");
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::SjlParams params = make_params(opt);
  const sjl::UnitVector x = make_x(opt, seed, params.n);
  const sjl::BoundConstants constants = parse_constants(opt.constants_text);
  const EchoPairs echo = echo_pairs(opt, seed, constants);

  struct Row {
    std::string method;
    sjl::MomentEstimate est;
  };
  std::vector<Row> rows;
  if (opt.method != "mc") {
    try {
      rows.push_back({"exact", sjl::exact_moment(params, x, opt.q, make_budget(opt))});
    } catch (const sjl::BudgetError& err) {
      if (opt.method == "exact") throw;
      std::cerr << "note: exact skipped (" << err.what() << ")\n";
    }
  }
  if (opt.method != "exact") {
    if (opt.q > 16) {
      if (opt.method == "mc")
        throw std::invalid_argument("mc moments stop at q=16; use --method exact");
      std::cerr << "note: mc skipped (q > 16)\n";
    } else {
      rows.push_back({"mc", sjl::mc_moment(params, x, opt.q, opt.trials, seed,
                                           opt.threads)});
    }
  }

  if (opt.format == "json") {
    ordered_json j;
    j["meta"] = meta_json("moments");
    j["config"] = echo_json(echo);
    ordered_json arr = ordered_json::array();
    for (const Row& row : rows)
      arr.push_back(ordered_json{{"q", row.est.q},
                                 {"method", row.method},
                                 {"value", row.est.value},
                                 {"std_error", row.est.std_error},
                                 {"trials", row.est.trials}});
    j["rows"] = arr;
    emit(opt, j.dump(2) + "\n");
    return 0;
  }
  std::string out = csv_comments("moments", echo);
  out += "q,method,value,std_error,trials\n";
  for (const Row& row : rows)
    out += std::to_string(row.est.q) + "," + row.method + "," +
           fmt(row.est.value) + "," + fmt(row.est.std_error) + "," +
           std::to_string(row.est.trials) + "\n";
  emit(opt, out);
  return 0;
}

int cmd_tail(const Options& opt) {
  if (opt.method != "both" && opt.method != "exact" && opt.method != "mc")
    throw std::invalid_argument("--method must be both, exact, or mc");
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::SjlParams params = make_params(opt);
  const sjl::UnitVector x = make_x(opt, seed, params.n);
  const sjl::BoundConstants constants = parse_constants(opt.constants_text);
  const EchoPairs echo = echo_pairs(opt, seed, constants);

  struct Row {
    std::string method;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::string failures;
    std::string trials;
  };
  std::vector<Row> rows;
  if (opt.method != "mc") {
    try {
      const double rate = sjl::exact_tail(params, x, opt.eps, make_budget(opt));
      rows.push_back({"exact", rate, rate, rate, "", ""});
    } catch (const sjl::BudgetError& err) {
      if (opt.method == "exact") throw;
      std::cerr << "note: exact skipped (" << err.what() << ")\n";
    }
  }
  if (opt.method != "exact") {
    const sjl::TailEstimate tail =
        sjl::mc_tail(params, x, opt.eps, opt.trials, seed, opt.threads);
    rows.push_back({"mc", tail.failure_rate, tail.ci_low, tail.ci_high,
                    std::to_string(tail.failures), std::to_string(tail.trials)});
  }

  if (opt.format == "json") {
    ordered_json j;
    j["meta"] = meta_json("tail");
    j["config"] = echo_json(echo);
    ordered_json arr = ordered_json::array();
    for (const Row& row : rows) {
      ordered_json entry{{"eps", opt.eps},
                         {"method", row.method},
                         {"rate", row.rate},
                         {"ci_low", row.ci_low},
                         {"ci_high", row.ci_high}};
      if (!row.failures.empty()) entry["failures"] = std::stoll(row.failures);
      if (!row.trials.empty()) entry["trials"] = std::stoll(row.trials);
      arr.push_back(entry);
    }
    j["rows"] = arr;
    emit(opt, j.dump(2) + "\n");
    return 0;
  }
  std::string out = csv_comments("tail", echo);
  out += "eps,method,rate,ci_low,ci_high,failures,trials\n";
  for (const Row& row : rows)
    out += fmt(opt.eps) + "," + row.method + "," + fmt(row.rate) + "," +
           fmt(row.ci_low) + "," + fmt(row.ci_high) + "," + row.failures + "," +
           row.trials + "\n";
  emit(opt, out);
  return 0;
}

int cmd_threshold_sweep(const Options& opt) {
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::BoundConstants constants = parse_constants(opt.constants_text);
  const std::vector<double> grid = opt.v_grid_text.empty()
                                       ? default_v_grid()
                                       : parse_double_list(opt.v_grid_text, "--v-grid");
  const std::vector<std::int64_t> ms =
      opt.m_grid_text.empty() ? std::vector<std::int64_t>{opt.m}
                              : parse_int_list(opt.m_grid_text, "--m-grid");
  const sjl::Flavor flavor = sjl::flavor_from_string(opt.flavor);

  // Without an explicit n, take the widest hard vector the grid asks for.
  sjl::Index n = sjl::Index(opt.n);
  if (!opt.n_given) {
    sjl::Index widest = 1;
    for (double v : grid) widest = std::max(widest, sjl::hard_count_even(v));
    n = widest;
  }

  const EchoPairs echo = echo_pairs(opt, seed, constants);
  struct PointRow {
    std::int64_t m;
    sjl::ThresholdPoint point;
    const sjl::RegimeReport* g;
    const sjl::RegimeReport* h;
  };
  std::vector<sjl::RegimeReport> g_reports, h_reports;
  std::vector<sjl::ThresholdCurve> curves;
  g_reports.reserve(ms.size());
  h_reports.reserve(ms.size());
  for (std::int64_t m : ms) {
    const sjl::ThresholdQuery query =
        sjl::ThresholdQuery::make(m, opt.eps, opt.delta, opt.s, constants);
    g_reports.push_back(sjl::eval_g(query));
    h_reports.push_back(sjl::eval_h(query));
    curves.push_back(sjl::empirical_threshold(m, opt.eps, opt.delta, opt.s, n,
                                              grid, opt.trials, seed, flavor,
                                              opt.threads));
  }

  ordered_json summary = ordered_json::array();
  for (std::size_t i = 0; i < ms.size(); ++i)
    summary.push_back(ordered_json{{"m", ms[i]},
                                   {"v_hat", curves[i].v_hat},
                                   {"none_passed", curves[i].none_passed}});

  if (opt.format == "json") {
    ordered_json j;
    j["meta"] = meta_json("threshold-sweep");
    j["config"] = echo_json(echo);
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < ms.size(); ++i) {
      for (const sjl::ThresholdPoint& point : curves[i].points) {
        arr.push_back(ordered_json{{"m", ms[i]},
                                   {"eps", opt.eps},
                                   {"delta", opt.delta},
                                   {"s", opt.s},
                                   {"v_nominal", point.v_nominal},
                                   {"v_effective", point.v_effective},
                                   {"N", point.hard_count},
                                   {"failure_rate", point.tail.failure_rate},
                                   {"ci_lo", point.tail.ci_low},
                                   {"ci_hi", point.tail.ci_high},
                                   {"g_value", g_reports[i].value},
                                   {"g_branch", g_reports[i].branch},
                                   {"h_value", h_reports[i].value},
                                   {"h_branch", h_reports[i].branch}});
      }
    }
    j["rows"] = arr;
    j["summary"] = summary;
    emit(opt, j.dump(2) + "\n");
    return 0;
  }

  std::string out = csv_comments("threshold-sweep", echo);
  out +=
      "m,eps,delta,s,v_nominal,v_effective,N,failure_rate,ci_lo,ci_hi,"
      "g_value,g_branch,h_value,h_branch\n";
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (const sjl::ThresholdPoint& point : curves[i].points) {
      out += std::to_string(ms[i]) + "," + fmt(opt.eps) + "," + fmt(opt.delta) +
             "," + std::to_string(opt.s) + "," + fmt(point.v_nominal) + "," +
             fmt(point.v_effective) + "," + std::to_string(point.hard_count) +
             "," + fmt(point.tail.failure_rate) + "," + fmt(point.tail.ci_low) +
             "," + fmt(point.tail.ci_high) + "," + fmt(g_reports[i].value) +
             "," + g_reports[i].branch + "," + fmt(h_reports[i].value) + "," +
             h_reports[i].branch + "\n";
    }
  }
  out += "# summary " + summary.dump() + "\n";
  emit(opt, out);
  return 0;
}

int cmd_moment_check(const Options& opt) {
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::SjlParams params = make_params(opt);
  const sjl::UnitVector x = make_x(opt, seed, params.n);
  const sjl::BoundConstants constants = parse_constants(opt.constants_text);
  const sjl::EnumerationBudget budget = make_budget(opt);
  const double v = x.linf_ratio;

  std::vector<std::int64_t> qs;
  if (opt.q_grid_text.empty()) {
    for (std::int64_t q = 2; q <= std::min<std::int64_t>(opt.m, 16); q *= 2)
      qs.push_back(q);
  } else {
    qs = parse_int_list(opt.q_grid_text, "--q-grid");
  }

  struct Row {
    int q;
    sjl::MomentEstimate exact;
    bool has_mc = false;
    sjl::MomentEstimate mc;
    sjl::RegimeReport upper;
    sjl::RegimeReport lower;
  };
  std::vector<Row> rows;
  for (std::int64_t q : qs) {
    Row row;
    row.q = int(q);
    row.exact = sjl::exact_moment(params, x, row.q, budget);
    if (q <= 16) {
      row.has_mc = true;
      row.mc = sjl::mc_moment(params, x, row.q, opt.trials, seed, opt.threads);
    }
    row.upper = sjl::eval_moment_upper(double(params.m), double(params.s), v,
                                       row.q, constants);
    row.lower = sjl::eval_moment_lower(double(params.m), double(params.s), v,
                                       row.q, constants);
    rows.push_back(std::move(row));
  }

  const auto ratio_or_empty = [](const sjl::RegimeReport& report,
                                 double exact) -> std::string {
    if (report.flagged() || !(report.value > 0.0)) return "";
    return fmt(exact / report.value);
  };

  const EchoPairs echo = echo_pairs(opt, seed, constants);
  if (opt.format == "json") {
    ordered_json j;
    j["meta"] = meta_json("moment-check");
    j["config"] = echo_json(echo);
    ordered_json arr = ordered_json::array();
    for (const Row& row : rows) {
      ordered_json entry;
      entry["q"] = row.q;
      entry["exact"] = row.exact.value;
      if (row.has_mc) {
        entry["mc"] = row.mc.value;
        entry["mc_stderr"] = row.mc.std_error;
      }
      entry["upper"] = report_json(row.upper);
      entry["lower"] = report_json(row.lower);
      arr.push_back(entry);
    }
    j["rows"] = arr;
    emit(opt, j.dump(2) + "\n");
    return 0;
  }

  std::string out = csv_comments("moment-check", echo);
  out += "# v=" + fmt(v) + "\n";
  out +=
      "q,exact,mc,mc_stderr,upper,upper_branch,lower,lower_branch,"
      "ratio_upper,ratio_lower\n";
  for (const Row& row : rows) {
    out += std::to_string(row.q) + "," + fmt(row.exact.value) + ",";
    out += row.has_mc ? fmt(row.mc.value) : std::string();
    out += ",";
    out += row.has_mc ? fmt(row.mc.std_error) : std::string();
    out += "," + fmt(row.upper.value) + "," + row.upper.branch;
    out += "," + fmt(row.lower.value) + "," + row.lower.branch;
    out += "," + ratio_or_empty(row.upper, row.exact.value);
    out += "," + ratio_or_empty(row.lower, row.exact.value) + "\n";
  }
  emit(opt, out);
  return 0;
}

int cmd_appendix_a(const Options& opt) {
  if (opt.s != 1)
    throw std::invalid_argument("appendix-a: the comparison runs at s=1");
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::BoundConstants constants = parse_constants(opt.constants_text);
  const sjl::Flavor flavor = sjl::flavor_from_string(opt.flavor);
  const std::vector<std::int64_t> ms =
      opt.m_grid_text.empty() ? std::vector<std::int64_t>{24, 56, 120}
                              : parse_int_list(opt.m_grid_text, "--m-grid");
  const double p = std::log(1.0 / opt.delta);
  const int qp = sjl::even_moment_order(opt.delta);
  if (qp > 16)
    throw std::invalid_argument(
        "appendix-a: delta is too small for the Monte Carlo moment cap q <= 16");

  struct Row {
    std::int64_t m;
    double v_nominal = 0.0;
    double v_effective = 0.0;
    sjl::Index hard_count = 0;
    bool computed = false;
    sjl::PairedMoments paired;
    std::string flag = "-";
  };
  std::vector<Row> rows;
  for (std::int64_t m : ms) {
    Row row;
    row.m = m;
    const double log_arg = double(m) * opt.eps / p;
    const double v_formula =
        log_arg > 1.0 ? std::sqrt(opt.eps) * std::log(log_arg) / p : 0.0;
    row.v_nominal = v_formula;
    if (!(v_formula > 0.0) || v_formula >= 1.0) {
      row.flag = "out-of-regime";
      rows.push_back(std::move(row));
      continue;
    }
    if (std::log(log_arg) > std::sqrt(p)) row.flag = "regime";
    row.hard_count = sjl::hard_count_even(v_formula);
    row.v_effective = 1.0 / std::sqrt(double(row.hard_count));
    sjl::SjlParams params;
    params.n = row.hard_count;
    params.m = m;
    params.s = 1;
    params.flavor = flavor;
    params.validate();
    const sjl::UnitVector x = sjl::hard_vector(row.v_effective, params.n);
    row.paired = sjl::gaussian_vs_rademacher(params, x, qp, opt.trials, seed,
                                             opt.threads);
    row.computed = true;
    rows.push_back(std::move(row));
  }
  // Control row: the single-spike vector has zero error under both sign
  // models, which pins the estimator's floor.
  {
    Row control;
    control.m = ms.front();
    control.v_nominal = 1.0;
    control.v_effective = 1.0;
    control.hard_count = 1;
    sjl::SjlParams params;
    params.n = 1;
    params.m = control.m;
    params.s = 1;
    params.flavor = flavor;
    params.validate();
    const sjl::UnitVector x = sjl::hard_vector(1.0, 1);
    control.paired = sjl::gaussian_vs_rademacher(params, x, qp, opt.trials,
                                                 seed, opt.threads);
    control.computed = true;
    control.flag = "control";
    rows.push_back(std::move(control));
  }

  const EchoPairs echo = echo_pairs(opt, seed, constants);
  if (opt.format == "json") {
    ordered_json j;
    j["meta"] = meta_json("appendix-a");
    j["config"] = echo_json(echo);
    j["q"] = qp;
    ordered_json arr = ordered_json::array();
    for (const Row& row : rows) {
      ordered_json entry;
      entry["m"] = row.m;
      entry["v_nominal"] = row.v_nominal;
      entry["v_effective"] = row.v_effective;
      entry["N"] = row.hard_count;
      if (row.computed) {
        entry["rademacher"] = row.paired.rademacher.value;
        entry["rademacher_stderr"] = row.paired.rademacher.std_error;
        entry["gaussian"] = row.paired.gaussian.value;
        entry["gaussian_stderr"] = row.paired.gaussian.std_error;
        entry["ratio"] = row.paired.ratio;
        entry["ratio_stderr"] = row.paired.ratio_std_error;
      }
      entry["flag"] = row.flag;
      arr.push_back(entry);
    }
    j["rows"] = arr;
    emit(opt, j.dump(2) + "\n");
    return 0;
  }

  std::string out = csv_comments("appendix-a", echo);
  out += "# q=" + std::to_string(qp) + "\n";
  out +=
      "m,v_nominal,v_effective,N,q,rademacher,rademacher_stderr,gaussian,"
      "gaussian_stderr,ratio,ratio_stderr,flag\n";
  for (const Row& row : rows) {
    out += std::to_string(row.m) + "," + fmt(row.v_nominal) + "," +
           fmt(row.v_effective) + "," + std::to_string(row.hard_count) + "," +
           std::to_string(qp) + ",";
    if (row.computed) {
      out += fmt(row.paired.rademacher.value) + "," +
             fmt(row.paired.rademacher.std_error) + "," +
             fmt(row.paired.gaussian.value) + "," +
             fmt(row.paired.gaussian.std_error) + "," + fmt(row.paired.ratio) +
             "," + fmt(row.paired.ratio_std_error);
    } else {
      out += ",,,,,";
    }
    out += "," + row.flag + "\n";
  }
  emit(opt, out);
  return 0;
}

int cmd_bounds(const Options& opt) {
  const sjl::Seed seed = parse_seed(opt.seed_text);
  const sjl::BoundConstants constants = parse_constants(opt.constants_text);
  const sjl::ThresholdQuery query =
      sjl::ThresholdQuery::make(opt.m, opt.eps, opt.delta, opt.s, constants);
  const sjl::RegimeReport g = sjl::eval_g(query);
  const sjl::RegimeReport h = sjl::eval_h(query);
  const sjl::RegimeReport f =
      sjl::eval_f_fkl(opt.m, opt.eps, opt.delta, constants);
  const sjl::RegimeReport kn =
      sjl::kn_dimension(opt.eps, opt.delta, opt.s, constants);
  const sjl::RegimeReport dl =
      sjl::dimension_lower(opt.eps, opt.delta, opt.s, constants);
  const int qp = sjl::even_moment_order(opt.delta);

  const EchoPairs echo = echo_pairs(opt, seed, constants);
  if (opt.format == "json") {
    ordered_json j;
    j["meta"] = meta_json("bounds");
    j["config"] = echo_json(echo);
    j["p"] = query.p;
    j["p_even"] = qp;
    j["g"] = report_json(g);
    j["h"] = report_json(h);
    j["f"] = report_json(f);
    j["kn_dimension"] = report_json(kn);
    j["dimension_lower"] = report_json(dl);
    emit(opt, j.dump(2) + "\n");
    return 0;
  }

  const auto line = [](const char* name, const sjl::RegimeReport& report) {
    std::string text = std::string(name) + " value=" + fmt(report.value) +
                       " branch=" + report.branch +
                       " flags=" + report.flag_string();
    for (const auto& [arm, value] : report.applicable)
      text += " " + arm + "=" + fmt(value);
    return text + "\n";
  };
  std::string out = csv_comments("bounds", echo);
  out += "p=" + fmt(query.p) + " p_even=" + std::to_string(qp) + "\n";
  out += line("g", g);
  out += line("h", h);
  out += line("f", f);
  out += line("kn_dimension", kn);
  out += line("dimension_lower", dl);
  emit(opt, out);
  return 0;
}

int run_command(const std::string& command, const Options& opt) {
  if (command == "sample") return cmd_sample(opt);
  if (command == "project") return cmd_project(opt);
  if (command == "moments") return cmd_moments(opt);
  if (command == "tail") return cmd_tail(opt);
  if (command == "threshold-sweep") return cmd_threshold_sweep(opt);
  if (command == "moment-check") return cmd_moment_check(opt);
  if (command == "appendix-a") return cmd_appendix_a(opt);
  if (command == "bounds") return cmd_bounds(opt);
  throw std::logic_error("unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"sparse sign-matrix projection experiments"};
  app.set_config("--config", "", "key=value file mirroring the flags");

  auto* n_option = app.add_option("--n", opt.n, "ambient dimension");
  app.add_option("--m", opt.m, "target dimension");
  app.add_option("--s", opt.s, "nonzeros per column");
  app.add_option("--flavor", opt.flavor, "uniform or block support law")
      ->check(CLI::IsMember({"uniform", "block"}));
  app.add_option("--eps", opt.eps, "distortion bound in (0,1)");
  app.add_option("--delta", opt.delta, "failure budget in (0,1)");
  app.add_option("--q", opt.q, "moment order");
  app.add_option("--trials", opt.trials, "Monte Carlo trials");
  app.add_option("--seed", opt.seed_text, "root[:stream], decimal or 0x hex")
      ->envname("SJL_SEED");
  app.add_option("--v-grid", opt.v_grid_text, "comma list of ratios in (0,1]");
  app.add_option("--m-grid", opt.m_grid_text, "comma list of target dimensions");
  app.add_option("--q-grid", opt.q_grid_text, "comma list of moment orders");
  app.add_option("--constants", opt.constants_text,
                 "name=value[,name=value] overrides for bound constants");
  app.add_option("--x", opt.x_spec, "e1 | hard:<v> | random[:k] | v1,v2,...");
  app.add_option("--matrix", opt.matrix_path, "matrix file for project");
  app.add_option("--method", opt.method, "both | exact | mc")
      ->check(CLI::IsMember({"both", "exact", "mc"}));
  app.add_option("--out", opt.out_path, "output file (default stdout)");
  app.add_option("--format", opt.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--budget", opt.budget, "exact enumeration budget");
  app.add_option("--threads", opt.threads, "worker threads");

  app.require_subcommand(1);
  app.add_subcommand("sample", "draw a matrix and write its column list")
      ->fallthrough();
  app.add_subcommand("project", "apply a stored matrix to a vector")
      ->fallthrough();
  app.add_subcommand("moments", "estimate a moment of the squared-norm error")
      ->fallthrough();
  app.add_subcommand("tail", "estimate a tail probability of the error")
      ->fallthrough();
  app.add_subcommand("threshold-sweep",
                     "sweep hard vectors and locate the empirical threshold")
      ->fallthrough();
  app.add_subcommand("moment-check",
                     "compare exact moments with estimates and formulas")
      ->fallthrough();
  app.add_subcommand("appendix-a",
                     "paired sign-versus-Gaussian moment comparison")
      ->fallthrough();
  app.add_subcommand("bounds", "evaluate the closed-form bounds at one point")
      ->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }
  opt.n_given = n_option->count() > 0;

  const std::string command = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    rc = run_command(command, opt);
  } catch (const sjl::BudgetError& err) {
    std::cerr << "error: " << err.what()
              << "\nhint: raise --budget, or use Monte Carlo (--method mc)\n";
    return 1;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  std::cerr << command << ": " << elapsed << " ms\n";
  return rc;
}
