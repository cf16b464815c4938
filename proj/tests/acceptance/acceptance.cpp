// Acceptance runner. `acceptance <id>` runs one criterion, `acceptance`
// runs all twelve. Each prints a single PASS/FAIL line; the exit status is
// nonzero when any selected criterion fails.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hypercolor/hypercolor.hpp"
#include "../support.hpp"

using namespace hypercolor;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    failures += (failures.empty() ? "" : "; ") + what;
    pass = false;
  }
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Outcome&)> run;
};

ModelParams params(int q, int k, double c) {
  ModelParams p;
  p.q = q;
  p.k = k;
  p.c = c;
  return p;
}

int hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

// 1 ----------------------------------------------------------------------

// At c = new_lower the flat rate is ~1e-9 while entropy and energy are each
// ~2 ln q, so 1e-12 relative is out of reach for any double evaluation.
// The identity is checked through the 50-digit entry-class evaluation of
// the rate; the double matrix path is checked against the component scale.

using Big = boost::multiprecision::cpp_bin_float_50;

Big flat_reference(int q, int k, double c) {
  const Big bq(q);
  return 2 * (log(bq) + Big(c) * log(1 - pow(bq, 1 - k)));
}

double rel_err(const Big& got, const Big& want) {
  return static_cast<double>(abs(got - want) / abs(want));
}

void flat_identity(Outcome& o) {
  int cases = 0;
  double worst = 0, worst_double = 0;
  for (int q = 3; q <= 30; ++q)
    for (int k = 3; k <= 7; ++k)
      for (double c : {0.5, 1.0, threshold_bounds(q, k).new_lower}) {
        const Big want = flat_reference(q, k, c);
        const auto hp = rate_of_classes<Big>(flat_classes<Big>(q), q, k, Big(c));
        const double rel = rel_err(hp.rate, want);
        worst = std::max(worst, rel);
        ++cases;
        if (!(rel <= 1e-12))
          o.check(false, "q=" + std::to_string(q) + " k=" + std::to_string(k) + " c=" + fmt(c) +
                             " rel=" + fmt(rel));
        const auto d = rate(flat_overlap(q), params(q, k, c));
        const double scale = std::max({1.0, std::abs(d.entropy), std::abs(d.energy)});
        const double dd = static_cast<double>(abs(Big(d.rate) - want)) / scale;
        worst_double = std::max(worst_double, dd);
        if (!(dd <= 1e-12)) o.check(false, "double path q=" + std::to_string(q) + " k=" + std::to_string(k));
      }
  o.detail << cases << " cases, worst rel " << worst << " (50-digit), double path worst "
           << worst_double << " of component scale";
}

// 2 ----------------------------------------------------------------------

void half_identity(Outcome& o) {
  int cases = 0;
  double worst = 0, worst_double = 0;
  for (int q = 3; q <= 30; ++q)
    for (int k = 3; k <= 7; ++k)
      for (double c : {0.5, 1.0, threshold_bounds(q, k).new_lower}) {
        const Big bq(q);
        const std::vector<EntryClass<Big>> ident = {{1 / bq, bq}, {Big(0), bq * bq - bq}};
        const auto half = rate_of_classes<Big>(ident, q, k, Big(c));
        const auto full = rate_of_classes<Big>(flat_classes<Big>(q), q, k, Big(c));
        const double rel = rel_err(half.rate, full.rate / 2);
        worst = std::max(worst, rel);
        ++cases;
        if (!(rel <= 1e-12))
          o.check(false, "q=" + std::to_string(q) + " k=" + std::to_string(k) + " rel=" + fmt(rel));
        const auto p = params(q, k, c);
        const auto dh = rate(scaled_identity(q), p), df = rate(flat_overlap(q), p);
        const double scale = std::max({1.0, std::abs(df.entropy), std::abs(df.energy)});
        const double dd = std::abs(dh.rate - df.rate / 2) / scale;
        worst_double = std::max(worst_double, dd);
        if (!(dd <= 1e-12)) o.check(false, "double path q=" + std::to_string(q) + " k=" + std::to_string(k));
      }
  o.detail << cases << " cases, worst rel " << worst << " (50-digit), double path worst "
           << worst_double << " of component scale";
}

// 3 ----------------------------------------------------------------------

void s_stable_closed_forms(Outcome& o) {
  int cases = 0;
  double worst = 0;
  for (int q = 1; q <= 50; ++q)
    for (int s = 0; s < q; ++s) {
      const auto a = s_stable_overlap(q, s);
      const double h = entropy(a), hc = s_stable_entropy_closed(q, s);
      const double rh = std::abs(h - hc) / std::max(std::abs(hc), 1e-300);
      worst = std::max(worst, hc == 0 ? std::abs(h) : rh);
      if (!(hc == 0 ? std::abs(h) <= 1e-12 : rh <= 1e-12))
        o.check(false, "entropy q=" + std::to_string(q) + " s=" + std::to_string(s));
      for (int k = 3; k <= 7; ++k) {
        const double nv = norm_k_pow(a, k), nc = s_stable_norm_closed(q, s, k);
        const double rn = std::abs(nv - nc) / nc;
        worst = std::max(worst, rn);
        ++cases;
        if (!(rn <= 1e-12))
          o.check(false, "norm q=" + std::to_string(q) + " s=" + std::to_string(s) +
                             " k=" + std::to_string(k));
      }
    }
  o.detail << cases << " (q,s,k) cases, worst rel " << worst;
}

// 4 ----------------------------------------------------------------------

void oracle_first_moment(Outcome& o) {
  const auto exact = exact_expected_colorings(4, 3, 1, 2);
  o.check(exact == 12, "E[Z](4,3,1,2) = " + to_string(exact));
  struct Case { int n, k, m, q; };
  Rng rng(20240601);
  for (const auto& c : {Case{5, 3, 2, 2}, Case{6, 3, 3, 2}, Case{6, 3, 2, 3}}) {
    const double want = to_double(exact_expected_colorings(c.n, c.k, std::uint64_t(c.m), c.q));
    const auto emp = empirical_first_moment(c.n, c.k, std::uint64_t(c.m), c.q, 100000, rng);
    const double z = (emp.mean - want) / emp.std_error;
    const std::string tag = "(" + std::to_string(c.n) + "," + std::to_string(c.k) + "," +
                            std::to_string(c.m) + "," + std::to_string(c.q) + ")";
    o.check(std::abs(z) <= 3.0, tag + " z=" + fmt(z));
    o.detail << tag << " exact " << want << " mc " << emp.mean << " z "
             << z << "; ";
  }
  o.detail << "exact(4,3,1,2)=" << to_string(exact);
}

// 5 ----------------------------------------------------------------------

double top_eigenvalue(int q, int k, double c) {
  const auto h = hessian_at_flat(params(q, k, c));
  Eigen::MatrixXd m(h.dim, h.dim);
  for (int r = 0; r < h.dim; ++r)
    for (int s = 0; s < h.dim; ++s) m(r, s) = h(r, s);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().maxCoeff();
}

// The threshold exactly as the criterion writes it.
double stated_critical_c(int q, int k) {
  const double base = 1.0 - std::pow(double(q), 1.0 - k);
  return std::pow(double(q), 2.0 * (k - 1)) * base * base / (2.0 * k * (k - 1));
}

void hessian(Outcome& o) {
  double worst_fd = 0;
  for (int q : {3, 4, 5})
    for (int k : {3, 4})
      for (double frac : {0.1, 0.5, 0.9}) {
        const double c = frac * stated_critical_c(q, k);
        const auto h = hessian_at_flat(params(q, k, c));
        const auto fd = hctest::fd_hessian_flat(q, k, c);
        for (int t = 0; t < h.dim * h.dim; ++t) {
          const double rel = std::abs(fd[std::size_t(t)] - h.matrix[std::size_t(t)]) /
                             std::abs(h.matrix[std::size_t(t)]);
          worst_fd = std::max(worst_fd, rel);
        }
      }
  o.check(worst_fd <= 1e-4, "finite differences rel " + fmt(worst_fd));

  std::ostringstream flips;
  for (int q : {3, 4, 5})
    for (int k : {3, 4}) {
      const double stated = stated_critical_c(q, k);
      double lo = 0.0, hi = 8.0 * stated;
      while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        (top_eigenvalue(q, k, mid) < 0 ? lo : hi) = mid;
      }
      const double rel = std::abs(lo - stated) / stated;
      if (!(rel <= 1e-9))
        o.check(false, "flip at q=" + std::to_string(q) + " k=" + std::to_string(k) + " is " +
                           fmt(lo) + ", stated threshold " + fmt(stated));
      if (q == 3 && k == 3) flips << "bisected flip(3,3)=" << lo;
    }
  const double spot = stated_critical_c(3, 3);
  o.check(std::abs(spot - 16.0 / 3.0) <= 1e-12 && std::abs(hessian_critical_c(3, 3) - 16.0 / 3.0) <= 1e-12,
          "critical_c(3,3) = " + fmt(hessian_critical_c(3, 3)) + ", expected 16/3");
  o.detail << "fd worst rel " << worst_fd << "; " << flips.str();
}

// 6 ----------------------------------------------------------------------

void flattening(Outcome& o) {
  struct Case {
    bool held = false;
    double drop = 0;
  };
  const auto results = parallel_map(10000, hardware_threads(), [](std::size_t t) {
    auto rng = detail::start_rng(606, t);
    const auto fc = hctest::random_flatten_case(rng, 128);
    Case c;
    if (!averaging_condition(fc.a, fc.row, fc.cols, fc.mu, fc.params)) return c;
    c.held = true;
    c.drop = rate(fc.a, fc.params).rate - rate(flatten(fc.a, fc.row, fc.cols), fc.params).rate;
    return c;
  });
  int held = 0, violations = 0;
  double worst = 0;
  for (const auto& c : results) {
    if (!c.held) continue;
    ++held;
    worst = std::max(worst, c.drop);
    if (c.drop > 1e-12) ++violations;
  }
  o.check(violations == 0, std::to_string(violations) + " decreases");
  o.check(held > 0, "averaging condition never held");
  o.detail << held << "/10000 cases satisfy the averaging condition, largest decrease " << worst;
}

// 7 ----------------------------------------------------------------------

double grid_max_q2(int k, double c, int points) {
  double best = -1e300;
  for (int t = 0; t < points; ++t) {
    const double x = 0.5 * t / (points - 1);
    const double y = 0.5 - x;
    const double h = -2.0 * xlogx(x) - 2.0 * xlogx(y);
    const double norm = 2.0 * std::pow(x, k) + 2.0 * std::pow(y, k);
    best = std::max(best, h + c * std::log(1.0 - 2.0 * std::pow(2.0, 1 - k) + norm));
  }
  return best;
}

void maximizer(Outcome& o) {
  MaximizerConfig cfg;
  cfg.starts = 200;
  cfg.seed = 7;
  cfg.threads = hardware_threads();
  for (int q = 3; q <= 6; ++q) {
    const double c = 0.75 * hessian_critical_c(q, 3);
    const auto r = maximize(DomainTag::D(), params(q, 3, c), cfg);
    const std::string tag = "q=" + std::to_string(q) + " c=" + fmt(c);
    o.check(r.best_value <= r.flat_value + 1e-9,
            tag + " best " + fmt(r.best_value) + " > F(flat) " + fmt(r.flat_value));
    o.check(r.starts_near_flat > 0, tag + " no start within 1e-6 of flat");
    o.detail << "q=" << q << " gap " << r.best_value - r.flat_value << " near_flat "
             << r.starts_near_flat << "; ";
  }
  MaximizerConfig small = cfg;
  small.starts = 20;
  const double c2 = 0.75 * hessian_critical_c(2, 3);
  const auto r2 = maximize(DomainTag::D(), params(2, 3, c2), small);
  const double grid = grid_max_q2(3, c2, 1000000);
  o.check(std::abs(r2.best_value - grid) <= 1e-8, "q=2 slice off by " + fmt(r2.best_value - grid));
  o.detail << "q=2 |diff| " << std::abs(r2.best_value - grid);
}

// 8 ----------------------------------------------------------------------

void gap_table(Outcome& o) {
  for (int q : {3, 10, 100, 1000}) {
    const auto rows = s_stable_gap_table(params(q, 3, threshold_bounds(q, 3).new_lower));
    double worst = 0;
    std::vector<int> negative;
    for (const auto& r : rows) {
      worst = std::max(worst, std::abs(r.margin - r.margin_check));
      if (!r.positive) negative.push_back(r.s);
    }
    o.check(worst <= 1e-10, "q=" + std::to_string(q) + " second path off by " + fmt(worst));
    if (q >= 100 && !negative.empty()) {
      std::string list;
      for (int s : negative) list += (list.empty() ? "" : ",") + std::to_string(s);
      o.check(false, "q=" + std::to_string(q) + " nonpositive at s=" + list + " (margin " +
                         fmt(rows[std::size_t(negative.front() - 1)].margin) + ")");
    }
    o.detail << "q=" << q << " rows " << rows.size() << " nonpositive "
             << negative.size() << " check " << worst << "; ";
  }
}

// 9 ----------------------------------------------------------------------

void planted(Outcome& o) {
  const int n = 300, trials = 10000;
  ModelParams p = params(3, 3, 9.0);
  p.n = n;
  Rng rng(909);
  double sum = 0, sq = 0;
  long long mono = 0;
  for (int t = 0; t < trials; ++t) {
    const auto sigma = balanced_random_coloring(n, 3, rng);
    const auto h = sample_planted(p, sigma, rng);
    mono += monochromatic_count(h, sigma);
    sum += double(h.m());
    sq += double(h.m()) * double(h.m());
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / (trials - 1) );
  const double z = (mean - 9.0 * n) / se;
  o.check(std::abs(z) <= 3.0, "mean " + fmt(mean) + " vs cn " + fmt(9.0 * n) + " z " + fmt(z));
  o.check(mono == 0, std::to_string(mono) + " monochromatic edges");
  o.detail << "mean " << mean << " se " << se << " z " << z << " mono " << mono;
}

// 10 ---------------------------------------------------------------------

// Checks each core vertex against the core inequality using an incidence
// table built here from the raw edge list.
bool naive_core_ok(const Hypergraph& h, const Coloring& sigma, const std::vector<int>& core,
                   double t_core) {
  std::vector<std::vector<std::vector<int>>> incident(static_cast<std::size_t>(h.n()));
  for (const auto& e : h.edge_list())
    for (int v : e) incident[std::size_t(v)].push_back(e);
  std::vector<char> in(static_cast<std::size_t>(h.n()), 0);
  for (int v : core) in[std::size_t(v)] = 1;
  for (int v : core)
    for (int i = 0; i < sigma.q(); ++i) {
      if (i == sigma[v]) continue;
      long long count = 0;
      for (const auto& e : incident[std::size_t(v)]) {
        bool ok = true;
        for (int u : e)
          if (u != v && !(in[std::size_t(u)] && sigma[u] == i)) ok = false;
        count += ok;
      }
      if (double(count) < t_core) return false;
    }
  return true;
}

void core(Outcome& o) {
  const int n = 3000;
  ModelParams p = params(3, 3, 9.0);
  p.n = n;
  const auto t = CoreThresholds::defaults(3).scaled(30.0);
  int recheck_fail = 0, containment_fail = 0, repeel_fail = 0;
  long long core_total = 0;
  int nonempty = 0;
  for (int inst = 0; inst < 100; ++inst) {
    auto rng = detail::start_rng(1010, std::size_t(inst));
    const auto sigma = balanced_random_coloring(n, 3, rng);
    const auto h = sample_planted(p, sigma, rng);
    const auto d = extract_core(h, sigma, t);
    if (!naive_core_ok(h, sigma, d.core, t.t_core)) ++recheck_fail;
    const auto in_core = to_mask(n, d.core), w = to_mask(n, d.w), z = to_mask(n, d.z);
    for (int v = 0; v < n; ++v)
      if (!w[std::size_t(v)] && !z[std::size_t(v)] && !in_core[std::size_t(v)]) {
        ++containment_fail;
        break;
      }
    if (peel(h, sigma, d.core, t.t_core) != d.core) ++repeel_fail;
    core_total += long(d.core.size());
    nonempty += !d.core.empty();
  }
  o.check(recheck_fail == 0, std::to_string(recheck_fail) + " instances fail the naive recheck");
  o.check(containment_fail == 0, std::to_string(containment_fail) + " instances break containment");
  o.check(repeel_fail == 0, std::to_string(repeel_fail) + " instances change on re-peel");
  o.detail << "100 instances, nonempty cores " << nonempty
           << ", mean core size " << double(core_total) / 100.0;
}

// 11 ---------------------------------------------------------------------

void potts(Outcome& o) {
  const auto single = Hypergraph::from_edges(3, 3, {{0, 1, 2}});
  for (double beta : {0.0, 1.0, 10.0}) {
    const double expect = 6.0 + 2.0 * std::exp(-beta);
    const auto z = partition_function(single, 2, beta);
    o.check(std::abs(z.value - expect) <= 1e-12 * expect,
            "single edge beta=" + fmt(beta) + " gives " + fmt(z.value));
  }
  Rng rng(1111);
  for (int t = 0; t < 5; ++t) {
    const int n = 3 + int(rng() % 6), q = 2 + int(rng() % 3);
    const auto m = rng() % (binomial_u64(std::uint64_t(n), 3) + 1);
    const auto h = sample_hypergraph(n, 3, m, rng);
    const auto z0 = partition_function(h, q, 0.0);
    o.check(z0.value == std::pow(double(q), n), "beta=0 instance " + std::to_string(t));
    const auto zb = partition_function(h, q, 1000.0);
    const auto proper = count_colorings(h, q).z_q;
    o.check(zb.proper == proper && std::abs(zb.value - double(proper)) <= std::exp(-900.0),
            "beta=1000 instance " + std::to_string(t) + ": " + fmt(zb.value) + " vs " +
                std::to_string(proper));
  }
  o.detail << "single edge, 5 random instances at beta 0 and 1000";
}

// 12 ---------------------------------------------------------------------

bool run_cli(const std::string& args, std::string& out) {
  const std::string cmd = std::string(HYPERCOLOR_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return false;
  out.clear();
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

void determinism(Outcome& o) {
  const char* commands[] = {
      "bounds --q 7 --k 3",
      "rate --q 4 --k 3 --c 3 --matrix stable",
      "maximize --q 3 --k 3 --c 6 --starts 24 --seed 12",
      "maximize --q 3 --k 3 --c 2 --starts 24 --seed 12 --threads 1",
      "simulate-core --q 3 --k 3 --c 9 --n 3000 --trials 4 --scale 30 --seed 12",
      "simulate-cluster --q 2 --k 3 --c 1 --n 10 --trials 3 --seed 12",
      "oracle-verify --n 6 --k 3 --m 2 --q 3 --trials 2000 --beta 2 --seed 12",
      "condensation-scan --q 10 --k 3",
  };
  int count = 0;
  for (const char* args : commands) {
    std::string a, b;
    if (!run_cli(args, a) || !run_cli(args, b)) {
      o.check(false, std::string("'") + args + "' did not exit 0");
      continue;
    }
    try {
      const auto ca = cli::canonical_json(nlohmann::json::parse(a));
      const auto cb = cli::canonical_json(nlohmann::json::parse(b));
      o.check(ca == cb, std::string("'") + args + "' differs between runs");
    } catch (const nlohmann::json::exception&) {
      o.check(false, std::string("'") + args + "' printed invalid JSON");
    }
    ++count;
  }
  // threads must not change results
  std::string one, many;
  if (run_cli("simulate-core --q 3 --k 3 --c 9 --n 900 --trials 6 --seed 3 --threads 1", one) &&
      run_cli("simulate-core --q 3 --k 3 --c 9 --n 900 --trials 6 --seed 3 --threads 4", many)) {
    auto a = nlohmann::json::parse(one), b = nlohmann::json::parse(many);
    a["inputs"].erase("threads");
    b["inputs"].erase("threads");
    o.check(cli::canonical_json(a) == cli::canonical_json(b), "thread count changes simulate-core output");
  } else {
    o.check(false, "simulate-core thread comparison did not run");
  }
  o.detail << count << " commands rerun, thread-count invariance checked";
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "flat-point identity", 1, flat_identity},
      {2, "half identity", 1, half_identity},
      {3, "s-stable closed forms", 5, s_stable_closed_forms},
      {4, "oracle first moment", 120, oracle_first_moment},
      {5, "hessian at the flat point", 30, hessian},
      {6, "flattening monotonicity", 30, flattening},
      {7, "maximizer sanity", 300, maximizer},
      {8, "s-stable gap table", 10, gap_table},
      {9, "planted model", 60, planted},
      {10, "core correctness", 300, core},
      {11, "potts oracle", 10, potts},
      {12, "cli determinism", 60, determinism},
  };
  return all;
}

bool run_one(const Criterion& c) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    c.run(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(secs <= c.budget_seconds, "runtime " + fmt(secs) + " s over budget " + fmt(c.budget_seconds) + " s");
  std::printf("criterion %d (%s): %s [%.2fs] %s%s%s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
              secs, o.detail.str().c_str(), o.failures.empty() ? "" : " | failed: ",
              o.failures.c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long id = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || id < 1 || id > 12) {
      std::cerr << "usage: acceptance [1-12 ...]\n";
      return 2;
    }
    ids.push_back(int(id));
  }
  if (ids.empty())
    for (const auto& c : criteria()) ids.push_back(c.id);
  bool ok = true;
  for (int id : ids) ok = run_one(criteria()[std::size_t(id - 1)]) && ok;
  return ok ? 0 : 1;
}
