#pragma once

// Command dispatch for the hypercolor tool. Each command turns a RunConfig
// into a versioned JSON document; the executable only parses flags and
// writes files.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercolor/errors.hpp"
#include "hypercolor/hypergraph.hpp"
#include "hypercolor/maximizer.hpp"
#include "hypercolor/moments.hpp"
#include "hypercolor/oracle.hpp"
#include "hypercolor/parallel.hpp"
#include "hypercolor/polytope.hpp"
#include "hypercolor/simulator.hpp"

namespace hypercolor::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"bounds",           "rate",
                                                 "maximize",         "simulate-core",
                                                 "simulate-cluster", "oracle-verify",
                                                 "condensation-scan"};
  return names;
}

enum ExitCode : int { kOk = 0, kUsage = 1, kDomain = 2, kBudget = 3 };

struct RunConfig {
  std::string command;
  int q = 3;
  int k = 3;
  std::optional<double> c;
  std::optional<int> n;
  std::optional<std::uint64_t> m;
  std::optional<int> s;
  std::optional<double> beta;
  std::uint64_t seed = 1;
  std::optional<std::int64_t> trials;
  int starts = 200;
  int threads = 0;
  std::string matrix = "flat";
  std::string domain = "D";
  double scale = 1.0;  ///< divisor applied to the core occurrence thresholds
  std::vector<double> gammas;
  bool members = false;
  std::string output;
  std::string format = "json";
};

/// Flattened view for CSV output.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct CommandResult {
  nlohmann::json outputs = nlohmann::json::object();
  Warnings warnings;
  Table table;
};

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

/// JSON object, or flat TOML: `key = value` lines with `#` comments.
/// Strings may be quoted; arrays use [a, b, c].
inline nlohmann::json parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError(std::string("config: ") + e.what());
    }
  }
  nlohmann::json out = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      out[key] = value.substr(1, value.size() - 2);
      continue;
    }
    try {
      out[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
      out[key] = value;
    }
  }
  return out;
}

inline nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Copies every key of `config` into `cfg` unless it is listed in
/// `explicit_keys` (flags given on the command line win).
inline void apply_config(const nlohmann::json& config, RunConfig& cfg,
                         const std::set<std::string>& explicit_keys) {
  if (!config.is_object()) throw ParameterError("config must be an object");
  for (const auto& [key, value] : config.items()) {
    if (explicit_keys.count(key)) continue;
    try {
      if (key == "command") cfg.command = value.get<std::string>();
      else if (key == "q") cfg.q = value.get<int>();
      else if (key == "k") cfg.k = value.get<int>();
      else if (key == "c") cfg.c = value.get<double>();
      else if (key == "n") cfg.n = value.get<int>();
      else if (key == "m") cfg.m = value.get<std::uint64_t>();
      else if (key == "s") cfg.s = value.get<int>();
      else if (key == "beta") cfg.beta = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "trials") cfg.trials = value.get<std::int64_t>();
      else if (key == "starts") cfg.starts = value.get<int>();
      else if (key == "threads") cfg.threads = value.get<int>();
      else if (key == "matrix") cfg.matrix = value.get<std::string>();
      else if (key == "domain") cfg.domain = value.get<std::string>();
      else if (key == "scale") cfg.scale = value.get<double>();
      else if (key == "gammas") cfg.gammas = value.get<std::vector<double>>();
      else if (key == "members") cfg.members = value.get<bool>();
      else if (key == "output") cfg.output = value.get<std::string>();
      else if (key == "format") cfg.format = value.get<std::string>();
      else throw ParameterError("config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw ParameterError("config: bad value for '" + key + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

namespace detail {

inline double require_c(const RunConfig& cfg) {
  if (!cfg.c) throw ParameterError(cfg.command + " needs --c");
  return *cfg.c;
}

inline int require_n(const RunConfig& cfg) {
  if (!cfg.n) throw ParameterError(cfg.command + " needs --n");
  return *cfg.n;
}

inline ModelParams params(const RunConfig& cfg, bool with_n) {
  ModelParams p;
  p.q = cfg.q;
  p.k = cfg.k;
  p.c = require_c(cfg);
  if (with_n) p.n = require_n(cfg);
  p.validate();
  return p;
}

inline int threads(const RunConfig& cfg) {
  return cfg.threads > 0 ? cfg.threads : default_threads();
}

/// Replaces non-finite numbers, which JSON cannot carry, by the strings
/// "inf", "-inf" and "nan".
inline void sanitize(nlohmann::json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (std::isnan(x)) j = "nan";
    else if (std::isinf(x)) j = x > 0 ? "inf" : "-inf";
  } else if (j.is_structured()) {
    for (auto& child : j) sanitize(child);
  }
}

inline std::string csv_cell(const nlohmann::json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return quoted + "\"";
  }
  return v.dump();
}

inline nlohmann::json warnings_json(const Warnings& w) {
  auto out = nlohmann::json::array();
  for (const auto& x : w) out.push_back({{"code", x.code}, {"message", x.message}});
  return out;
}

}  // namespace detail

inline nlohmann::json inputs_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["q"] = cfg.q;
  j["k"] = cfg.k;
  if (cfg.c) j["c"] = *cfg.c;
  if (cfg.n) j["n"] = *cfg.n;
  if (cfg.m) j["m"] = *cfg.m;
  if (cfg.s) j["s"] = *cfg.s;
  if (cfg.beta) j["beta"] = *cfg.beta;
  if (cfg.trials) j["trials"] = *cfg.trials;
  j["seed"] = cfg.seed;
  if (cfg.command == "maximize") {
    j["starts"] = cfg.starts;
    j["domain"] = cfg.domain;
  }
  if (cfg.command == "rate") j["matrix"] = cfg.matrix;
  if (cfg.command == "simulate-core" || cfg.command == "simulate-cluster") j["scale"] = cfg.scale;
  if (!cfg.gammas.empty()) j["gammas"] = cfg.gammas;
  j["format"] = cfg.format;
  return j;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline CommandResult run_bounds(const RunConfig& cfg) {
  CommandResult r;
  const auto b = threshold_bounds(cfg.q, cfg.k);
  const double ln_q = std::log(double(cfg.q));
  const double root = -ln_q / std::log1p(-std::exp((1.0 - cfg.k) * ln_q));
  r.outputs = {{"classical_lower", b.classical_lower},
               {"upper", b.upper},
               {"new_lower", b.new_lower},
               {"c_range", {b.c_range_lo, b.c_range_hi}},
               {"first_moment_root", root},
               {"hessian_critical_c", hessian_critical_c(cfg.q, cfg.k)}};
  if (cfg.c) r.outputs["first_moment_exponent"] = logdomain::first_moment_exponent(ln_q, cfg.k, *cfg.c);
  if (b.classical_error_term_omitted)
    warn(&r.warnings, "classical_error_term_omitted",
         "classical_lower excludes its vanishing error term");
  r.table.columns = {"quantity", "value"};
  for (const char* key : {"classical_lower", "upper", "new_lower", "first_moment_root",
                          "hessian_critical_c"})
    r.table.rows.push_back({key, r.outputs[key]});
  return r;
}

inline OverlapMatrix named_matrix(const RunConfig& cfg) {
  const std::string& name = cfg.matrix;
  if (name == "flat") return flat_overlap(cfg.q);
  if (name == "identity") return scaled_identity(cfg.q);
  if (name == "stable") return stable_overlap(cfg.q, cfg.k);
  if (name == "s-stable") {
    if (!cfg.s) throw ParameterError("--matrix s-stable needs --s");
    return s_stable_overlap(cfg.q, *cfg.s);
  }
  std::ifstream in(name);
  if (!in)
    throw ParameterError("--matrix must be flat, identity, stable, s-stable or a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '['))
    return overlap_from_json(nlohmann::json::parse(text));
  return overlap_from_csv(text);
}

inline CommandResult run_rate(const RunConfig& cfg) {
  CommandResult r;
  const auto p = detail::params(cfg, false);
  const auto a = named_matrix(cfg);
  if (a.q() != p.q) throw ParameterError("matrix size does not match --q");
  const auto v = rate(a, p);
  r.outputs = {{"matrix", to_json(a)},
               {"entropy", v.entropy},
               {"energy", v.energy},
               {"rate", v.rate},
               {"in_D", is_in_D(a)},
               {"stability_index", stability_index(a, p.k)}};
  if (cfg.matrix == "flat") r.outputs["closed_form"] = flat_rate_closed(p.q, p.k, p.c);
  r.table.columns = {"entropy", "energy", "rate"};
  r.table.rows.push_back({v.entropy, v.energy, v.rate});
  return r;
}

inline CommandResult run_maximize(const RunConfig& cfg) {
  CommandResult r;
  const auto p = detail::params(cfg, false);
  MaximizerConfig mc;
  mc.starts = cfg.starts;
  mc.seed = cfg.seed;
  mc.threads = detail::threads(cfg);
  const auto rep = maximize(parse_domain(cfg.domain), p, mc);
  r.outputs = to_json(rep);
  auto starts = nlohmann::json::array();
  r.table.columns = {"start", "value", "residual", "steps", "converged", "stability",
                     "distance_to_flat"};
  for (std::size_t t = 0; t < rep.outcomes.size(); ++t) {
    const auto& o = rep.outcomes[t];
    starts.push_back({{"value", o.value},
                      {"residual", o.residual},
                      {"steps", o.steps},
                      {"converged", o.converged},
                      {"stability", o.stability},
                      {"distance_to_flat", o.distance_to_flat}});
    r.table.rows.push_back({t, o.value, o.residual, o.steps, o.converged, o.stability,
                            o.distance_to_flat});
  }
  r.outputs["outcomes"] = starts;
  r.warnings = rep.warnings;
  return r;
}

namespace detail {

inline CoreThresholds thresholds(const RunConfig& cfg) {
  if (!(cfg.scale > 0)) throw ParameterError("--scale must be > 0");
  return CoreThresholds::defaults(cfg.k).scaled(cfg.scale);
}

}  // namespace detail

inline CommandResult run_simulate_core(const RunConfig& cfg) {
  CommandResult r;
  const auto p = detail::params(cfg, true);
  const auto t = detail::thresholds(cfg);
  const std::int64_t trials = cfg.trials.value_or(1);
  if (trials < 1) throw ParameterError("--trials must be >= 1");
  struct Trial {
    nlohmann::json report;
    Warnings warnings;
  };
  auto runs = parallel_map(std::size_t(trials), detail::threads(cfg), [&](std::size_t i) {
    Trial out;
    Rng rng = hypercolor::detail::start_rng(cfg.seed, i);
    const auto sigma = balanced_random_coloring(*p.n, p.q, rng);
    const auto h = sample_planted(p, sigma, rng, &out.warnings);
    const auto d = extract_core(h, sigma, t);
    out.report = to_json(d, cfg.members);
    out.report["edges"] = h.m();
    out.report["core_fixed_point"] = peel(h, sigma, d.core, t.t_core) == d.core;
    return out;
  });
  auto list = nlohmann::json::array();
  r.table.columns = {"trial", "edges", "W", "U", "Z", "core", "F1", "F2", "AW",
                     "cluster_size_log_bound"};
  double mean_core = 0, mean_bound = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto& rep = runs[i].report;
    for (auto& w : runs[i].warnings) warn(&r.warnings, w.code, w.message);
    const auto& s = rep["sizes"];
    r.table.rows.push_back({i, rep["edges"], s["W"], s["U"], s["Z"], s["core"], s["F1"], s["F2"],
                            s["AW"], rep["cluster_size_log_bound"]});
    mean_core += s["core"].get<double>() / double(trials);
    mean_bound += rep["cluster_size_log_bound"].get<double>() / double(trials);
    list.push_back(std::move(rep));
  }
  r.outputs = {{"thresholds", to_json(t)},
               {"trials", list},
               {"mean_core_fraction", mean_core / *p.n},
               {"mean_cluster_size_log_bound", mean_bound}};
  return r;
}

inline CommandResult run_simulate_cluster(const RunConfig& cfg) {
  CommandResult r;
  RunConfig local = cfg;
  if (!local.n) local.n = 12;
  const auto p = detail::params(local, true);
  const auto t = detail::thresholds(cfg);
  const std::int64_t trials = cfg.trials.value_or(1);
  if (trials < 1) throw ParameterError("--trials must be >= 1");
  auto list = nlohmann::json::array();
  r.table.columns = {"trial", "edges", "z_q", "z_bal", "cluster_size", "log_cluster_per_n",
                     "cluster_size_log_bound", "separable"};
  for (std::int64_t i = 0; i < trials; ++i) {
    Rng rng = hypercolor::detail::start_rng(cfg.seed, std::size_t(i));
    const auto sigma = balanced_random_coloring(*p.n, p.q, rng);
    const auto h = sample_planted(p, sigma, rng, &r.warnings);
    EnumerationOptions opts;
    opts.filter = ColoringFilter::balanced;
    opts.keep_list = true;
    opts.threads = detail::threads(cfg);
    const auto en = enumerate_colorings(h, p.q, opts);
    std::size_t cluster = 0;
    for (const auto& tau : en.colorings) cluster += in_cluster(sigma, tau, p.k);
    const auto d = extract_core(h, sigma, t);
    const double bound = cluster_size_log_bound(d);
    const double log_cluster = std::log(double(cluster)) / *p.n;
    const auto sep = separability_scan(h, sigma, en.colorings, &r.warnings);
    nlohmann::json rep = {{"edges", h.m()},
                          {"counts", to_json(en.counts)},
                          {"cluster_size", cluster},
                          {"log_cluster_per_n", log_cluster},
                          {"cluster_size_log_bound", bound},
                          {"bound_holds", log_cluster <= bound + 1e-12},
                          {"core", to_json(d, cfg.members)},
                          {"separability", to_json(sep)}};
    r.table.rows.push_back({i, h.m(), std::to_string(en.counts.z_q),
                            std::to_string(en.counts.z_bal), cluster, log_cluster, bound,
                            sep.separable()});
    list.push_back(std::move(rep));
  }
  r.outputs = {{"thresholds", to_json(t)}, {"trials", list}};
  return r;
}

inline CommandResult run_oracle_verify(const RunConfig& cfg) {
  CommandResult r;
  const int n = detail::require_n(cfg);
  if (!cfg.m) throw ParameterError("oracle-verify needs --m");
  const std::uint64_t m = *cfg.m;
  const std::int64_t trials = cfg.trials.value_or(10000);
  const auto exact = exact_expected_colorings(n, cfg.k, m, cfg.q);
  const auto exact_bal = exact_expected_balanced_colorings(n, cfg.k, m, cfg.q);
  Rng rng = hypercolor::detail::start_rng(cfg.seed, 0);
  const auto mc = empirical_first_moment(n, cfg.k, m, cfg.q, trials, rng);
  const double ex = to_double(exact);
  const double diff = mc.mean - ex;
  const bool agree = mc.std_error > 0 ? std::abs(diff) <= 3 * mc.std_error
                                      : std::abs(diff) <= 1e-9 * std::max(1.0, ex);
  r.outputs = {{"exact_expected", to_string(exact)},
               {"exact_expected_value", ex},
               {"exact_expected_balanced", to_string(exact_bal)},
               {"exact_expected_balanced_value", to_double(exact_bal)},
               {"monte_carlo", {{"mean", mc.mean}, {"std_error", mc.std_error}, {"trials", mc.trials}}},
               {"z_score", mc.std_error > 0 ? diff / mc.std_error : 0.0},
               {"agree", agree}};
  if (!agree) warn(&r.warnings, "monte_carlo_disagrees", "Monte-Carlo mean is outside 3 SE");
  r.table.columns = {"exact_expected", "mc_mean", "mc_std_error", "agree"};
  r.table.rows.push_back({ex, mc.mean, mc.std_error, agree});
  if (cfg.beta) {
    const auto h = sample_hypergraph(n, cfg.k, m, rng);
    const auto z = partition_function(h, cfg.q, *cfg.beta);
    r.outputs["potts"] = {{"hypergraph", to_text(h)},
                          {"beta", *cfg.beta},
                          {"log_z", z.log_z},
                          {"value", z.value},
                          {"proper_colorings", std::to_string(z.proper)},
                          {"log_excess", z.log_excess}};
  }
  return r;
}

inline CommandResult run_condensation_scan(const RunConfig& cfg) {
  CommandResult r;
  std::vector<double> gammas = cfg.gammas;
  if (gammas.empty()) gammas = {std::log(2.0), 1.0, 1.5, 2.0};
  const auto w = condensation_witness(cfg.q, cfg.k, gammas);
  auto rows = nlohmann::json::array();
  r.table.columns = {"table", "x", "value", "check", "positive"};
  for (const auto& row : w.rows) {
    rows.push_back({{"gamma", row.gamma},
                    {"c", row.c},
                    {"difference", row.difference},
                    {"difference_check", row.difference_check},
                    {"positive", row.positive}});
    r.table.rows.push_back({"witness", row.gamma, row.difference, row.difference_check,
                            row.positive});
  }
  ModelParams p;
  p.q = cfg.q;
  p.k = cfg.k;
  p.c = cfg.c.value_or(threshold_bounds(cfg.q, cfg.k).new_lower);
  auto gaps = nlohmann::json::array();
  for (const auto& g : s_stable_gap_table(p)) {
    gaps.push_back({{"s", g.s},
                    {"rate_s", g.rate_s},
                    {"rate_flat", g.rate_flat},
                    {"margin", g.margin},
                    {"margin_check", g.margin_check},
                    {"positive", g.positive},
                    {"stability_index_matches", g.stability_index_matches}});
    r.table.rows.push_back({"gap", g.s, g.margin, g.margin_check, g.positive});
  }
  r.outputs = {{"witness", rows}, {"gap_table_c", p.c}, {"gap_table", gaps}};
  if (w.first_positive_gamma) r.outputs["first_positive_gamma"] = *w.first_positive_gamma;
  return r;
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

inline CommandResult dispatch(const RunConfig& cfg) {
  if (cfg.q < 2) throw ParameterError("q must be >= 2");
  if (cfg.k < 2) throw ParameterError("k must be >= 2");
  if (cfg.command == "bounds") return run_bounds(cfg);
  if (cfg.command == "rate") return run_rate(cfg);
  if (cfg.command == "maximize") return run_maximize(cfg);
  if (cfg.command == "simulate-core") return run_simulate_core(cfg);
  if (cfg.command == "simulate-cluster") return run_simulate_cluster(cfg);
  if (cfg.command == "oracle-verify") return run_oracle_verify(cfg);
  if (cfg.command == "condensation-scan") return run_condensation_scan(cfg);
  throw ParameterError("unknown command '" + cfg.command + "'");
}

struct Document {
  nlohmann::json json;
  Table table;
};

/// Runs the command and wraps the result with schema, version, inputs,
/// warnings and timing.
inline Document run_document(const RunConfig& cfg) {
  const auto wall = std::chrono::system_clock::now();
  const auto start = std::chrono::steady_clock::now();
  auto result = dispatch(cfg);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::time_t now = std::chrono::system_clock::to_time_t(wall);
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream stamp;
  stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");

  Document doc;
  doc.json = {{"schema", kSchemaVersion},
              {"tool", "hypercolor"},
              {"version", kToolVersion},
              {"inputs", inputs_json(cfg)},
              {"outputs", std::move(result.outputs)},
              {"warnings", detail::warnings_json(result.warnings)},
              {"timing", {{"elapsed_seconds", elapsed}, {"timestamp", stamp.str()}}}};
  detail::sanitize(doc.json);
  doc.table = std::move(result.table);
  return doc;
}

/// The document without its timing block, dumped with sorted keys. Two runs
/// with the same inputs give byte-identical canonical text.
inline std::string canonical_json(nlohmann::json doc) {
  doc.erase("timing");
  return doc.dump(2);
}

inline std::string to_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

inline std::string render(const Document& doc, const std::string& format) {
  if (format == "json") return doc.json.dump(2) + "\n";
  if (format == "csv") return to_csv(doc.table);
  throw ParameterError("--format must be json or csv");
}

/// Runs `cfg`, writes the artifact to cfg.output (or `out`), reports errors
/// on `err` and returns the exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.format != "json" && cfg.format != "csv")
      throw ParameterError("--format must be json or csv");
    const auto doc = run_document(cfg);
    const auto text = render(doc, cfg.format);
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.output);
      if (!file) throw ParameterError("cannot write " + cfg.output);
      file << text;
    }
    return kOk;
  } catch (const BudgetError& e) {
    err << "budget error: " << e.what() << '\n';
    return kBudget;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kDomain;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << '\n';
    return kDomain;
  }
}

}  // namespace hypercolor::cli
