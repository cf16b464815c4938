#pragma once

// Exhaustive references at tiny scale: coloring enumeration, the exact first
// moment, cluster enumeration, the Potts partition function and Monte-Carlo
// first moments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "hypercolor/coloring.hpp"
#include "hypercolor/errors.hpp"
#include "hypercolor/hypergraph.hpp"
#include "hypercolor/moments.hpp"
#include "hypercolor/numeric.hpp"
#include "hypercolor/parallel.hpp"
#include "hypercolor/simulator.hpp"

namespace hypercolor {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr double kDefaultStateBudget = 1e8;

enum class ColoringFilter { all, balanced };

struct EnumerationOptions {
  ColoringFilter filter = ColoringFilter::all;
  bool keep_list = false;
  bool count_tame = false;
  double budget = kDefaultStateBudget;
  int threads = 1;
};

struct ExactCounts {
  std::uint64_t z_q = 0;    ///< proper colorings
  std::uint64_t z_bal = 0;  ///< balanced proper colorings
  std::optional<std::uint64_t> z_tame;
  /// (|V_1|, ..., |V_q|) -> number of proper colorings with those class sizes
  std::map<std::vector<int>, std::uint64_t> by_class_profile;
};

struct ColoringEnumeration {
  ExactCounts counts;
  std::vector<Coloring> colorings;  ///< proper maps passing the filter, when kept
  Warnings warnings;
};

namespace detail {

inline void check_budget(int n, int q, double budget) {
  const double states = std::pow(double(q), double(n));
  if (states > budget)
    throw BudgetError(std::to_string(q) + "^" + std::to_string(n) + " = " + format_double(states) +
                      " maps exceed the enumeration budget of " + format_double(budget) +
                      "; shrink n or raise the budget");
}

/// closing[v] = edges whose largest vertex is v; an edge's color pattern is
/// final once that vertex is assigned.
inline std::vector<std::vector<int>> closing_edges(const Hypergraph& h) {
  std::vector<std::vector<int>> closing(static_cast<std::size_t>(h.n()));
  for (std::size_t id = 0; id < h.m(); ++id) {
    const auto e = h.edge(id);
    closing[std::size_t(*std::max_element(e.begin(), e.end()))].push_back(int(id));
  }
  return closing;
}

/// Depth-first walk over all maps with vertex 0 fixed to `first`, in
/// lexicographic order (vertex 0 most significant). visit(colors, mono)
/// receives each complete map and its number of monochromatic edges. With
/// `prune` set, branches that already contain a monochromatic edge are cut.
template <class Visit>
void walk_maps(const Hypergraph& h, int q, int first, bool prune,
               const std::vector<std::vector<int>>& closing, Visit&& visit) {
  const int n = h.n();
  std::vector<int> colors(static_cast<std::size_t>(n), -1);
  std::vector<int> mono_at(static_cast<std::size_t>(n) + 1, 0);  // mono edges among vertices < v
  auto closed_mono = [&](int v) {
    int count = 0;
    for (int id : closing[std::size_t(v)]) {
      const auto e = h.edge(std::size_t(id));
      bool same = true;
      for (int u : e) same = same && colors[std::size_t(u)] == colors[std::size_t(v)];
      count += same;
    }
    return count;
  };
  colors[0] = first;
  const int m0 = closed_mono(0);
  if (prune && m0) return;
  mono_at[1] = m0;
  int v = 1;
  if (n == 1) {
    visit(colors, mono_at[1]);
    return;
  }
  // colors[v] == -1 means v is about to receive its first color
  while (v >= 1) {
    if (v == n) {
      visit(colors, mono_at[std::size_t(n)]);
      --v;
      continue;
    }
    int& c = colors[std::size_t(v)];
    bool placed = false;
    while (++c < q) {
      const int add = closed_mono(v);
      if (prune && add) continue;
      mono_at[std::size_t(v) + 1] = mono_at[std::size_t(v)] + add;
      placed = true;
      break;
    }
    if (placed) {
      ++v;
    } else {
      c = -1;
      --v;
    }
  }
}

inline std::vector<int> class_profile(const std::vector<int>& colors, int q) {
  std::vector<int> sizes(static_cast<std::size_t>(q), 0);
  for (int c : colors) ++sizes[std::size_t(c)];
  return sizes;
}

inline bool profile_balanced(const std::vector<int>& sizes, int n) {
  const int q = int(sizes.size());
  const double target = double(n) / q, slack = std::sqrt(double(n));
  for (int s : sizes)
    if (std::abs(s - target) > slack) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact first moment
// ---------------------------------------------------------------------------

inline BigInt big_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace detail {

template <class Fn>
void for_each_profile(int n, int q, std::vector<int>& sizes, int pos, int left, Fn& fn) {
  if (pos == q - 1) {
    sizes[std::size_t(pos)] = left;
    fn(sizes);
    return;
  }
  for (int s = 0; s <= left; ++s) {
    sizes[std::size_t(pos)] = s;
    for_each_profile(n, q, sizes, pos + 1, left - s, fn);
  }
}

inline BigRational expected_by_profile(int n, int k, std::uint64_t m, int q, bool balanced_only) {
  if (n < 0 || k < 1 || q < 1) throw ParameterError("invalid (n, k, q)");
  const std::uint64_t total_sets = binomial_u64(std::uint64_t(n), std::uint64_t(k));
  if (m > total_sets)
    throw ParameterError("m = " + std::to_string(m) + " exceeds C(n,k) = " +
                         std::to_string(total_sets));
  const BigInt denom = big_binomial(total_sets, m);
  std::vector<BigInt> factorial(static_cast<std::size_t>(n) + 1, 1);
  for (int t = 1; t <= n; ++t) factorial[std::size_t(t)] = factorial[std::size_t(t) - 1] * t;
  BigInt numer = 0;
  std::vector<int> sizes(static_cast<std::size_t>(q), 0);
  auto add = [&](const std::vector<int>& s) {
    if (balanced_only && !profile_balanced(s, n)) return;
    std::uint64_t mono = 0;
    BigInt maps = factorial[std::size_t(n)];
    for (int x : s) {
      mono += binomial_u64(std::uint64_t(x), std::uint64_t(k));
      maps /= factorial[std::size_t(x)];
    }
    numer += maps * big_binomial(total_sets - mono, m);
  };
  for_each_profile(n, q, sizes, 0, n, add);
  return BigRational(numer, denom);
}

}  // namespace detail

/// E[Z_q] over H(n, k, m): the sum over class-size profiles of the number of
/// maps with that profile times C(C(n,k) - sum_i C(n_i,k), m) / C(C(n,k), m),
/// in exact rational arithmetic.
inline BigRational exact_expected_colorings(int n, int k, std::uint64_t m, int q) {
  return detail::expected_by_profile(n, k, m, q, false);
}

/// Same sum restricted to balanced profiles: E[Z_{q,bal}].
inline BigRational exact_expected_balanced_colorings(int n, int k, std::uint64_t m, int q) {
  return detail::expected_by_profile(n, k, m, q, true);
}

inline double to_double(const BigRational& x) { return x.convert_to<double>(); }

inline std::string to_string(const BigRational& x) {
  if (denominator(x) == 1) return numerator(x).str();
  return numerator(x).str() + "/" + denominator(x).str();
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Proper colorings of H, optionally keeping the list. With
/// opts.count_tame the tame count is also computed; that needs the balanced
/// list and a quadratic separability pass, so the squared balanced count is
/// charged against the budget as well.
inline ColoringEnumeration enumerate_colorings(const Hypergraph& h, int q,
                                               const EnumerationOptions& opts = {}) {
  if (q < 1) throw ParameterError("q must be >= 1");
  detail::check_budget(h.n(), q, opts.budget);
  ColoringEnumeration out;
  if (h.n() == 0) {
    out.counts.z_q = out.counts.z_bal = 1;
    out.counts.by_class_profile[std::vector<int>(std::size_t(q), 0)] = 1;
    if (opts.keep_list) out.colorings.emplace_back(q, std::vector<int>{});
    if (opts.count_tame) out.counts.z_tame = 1;
    return out;
  }
  const auto closing = detail::closing_edges(h);
  const bool keep_balanced = opts.keep_list || opts.count_tame;
  struct Shard {
    ExactCounts counts;
    std::vector<std::vector<int>> kept;
  };
  const int n = h.n();
  auto shards = parallel_map(std::size_t(q), opts.threads, [&](std::size_t first) {
    Shard s;
    detail::walk_maps(h, q, int(first), true, closing, [&](const std::vector<int>& colors, int) {
      auto profile = detail::class_profile(colors, q);
      const bool bal = detail::profile_balanced(profile, n);
      ++s.counts.z_q;
      s.counts.z_bal += bal;
      ++s.counts.by_class_profile[std::move(profile)];
      const bool pass = opts.filter == ColoringFilter::all || bal;
      if ((opts.keep_list && pass) || (opts.count_tame && bal)) s.kept.push_back(colors);
    });
    return s;
  });
  std::vector<Coloring> balanced;
  for (auto& s : shards) {
    out.counts.z_q += s.counts.z_q;
    out.counts.z_bal += s.counts.z_bal;
    for (auto& [profile, count] : s.counts.by_class_profile)
      out.counts.by_class_profile[profile] += count;
    if (!keep_balanced) continue;
    for (auto& colors : s.kept) {
      Coloring c(q, std::move(colors));
      const bool bal = c.is_balanced();
      if (opts.count_tame && bal) balanced.push_back(c);
      if (opts.keep_list && (opts.filter == ColoringFilter::all || bal))
        out.colorings.push_back(std::move(c));
    }
  }
  if (opts.count_tame) {
    const double pairs = double(balanced.size()) * double(balanced.size());
    if (pairs > opts.budget)
      throw BudgetError("tame count needs " + format_double(pairs) +
                        " coloring pairs, above the budget; shrink n");
    const double limit = to_double(exact_expected_balanced_colorings(n, h.k(), h.m(), q));
    warn(&out.warnings, "tame_cluster_limit_bare",
         "T3 compares cluster size with the bare E[Z_bal] (no constant factors)");
    const auto window = separability_window(q, h.k(), &out.warnings);
    const double cluster_cut = stability_threshold(q, h.k());
    std::uint64_t tame = 0;
    for (const auto& sigma : balanced) {
      bool separable = true;
      std::uint64_t cluster = 0;
      for (const auto& tau : balanced) {
        const auto a = overlap_of(sigma, tau);
        bool member = true;
        for (int i = 0; i < q; ++i) member = member && a(i, i) > cluster_cut;
        cluster += member;
        for (double x : a.entries()) separable = separable && !in_window(window, x);
        if (!separable) break;
      }
      tame += separable && double(cluster) <= limit;
    }
    out.counts.z_tame = tame;
  }
  return out;
}

inline ExactCounts count_colorings(const Hypergraph& h, int q, double budget = kDefaultStateBudget) {
  EnumerationOptions opts;
  opts.budget = budget;
  return enumerate_colorings(h, q, opts).counts;
}

/// All balanced proper τ with min_i a_ii(σ, τ) above the stability
/// threshold. σ must be a proper balanced coloring of H.
inline std::vector<Coloring> enumerate_cluster(const Hypergraph& h, const Coloring& sigma, int k,
                                               double budget = kDefaultStateBudget) {
  check_compatible(h, sigma);
  if (h.k() != k) throw ParameterError("k does not match the hypergraph");
  if (!is_proper(h, sigma)) throw ParameterError("sigma is not a proper coloring");
  if (!sigma.is_balanced()) throw ParameterError("sigma is not balanced");
  EnumerationOptions opts;
  opts.filter = ColoringFilter::balanced;
  opts.keep_list = true;
  opts.budget = budget;
  auto all = enumerate_colorings(h, sigma.q(), opts).colorings;
  std::vector<Coloring> out;
  for (auto& tau : all)
    if (in_cluster(sigma, tau, k)) out.push_back(std::move(tau));
  return out;
}

// ---------------------------------------------------------------------------
// Potts partition function
// ---------------------------------------------------------------------------

/// histogram[E] = number of maps [n] -> [q] with exactly E monochromatic
/// edges.
inline std::vector<std::uint64_t> energy_histogram(const Hypergraph& h, int q,
                                                   double budget = kDefaultStateBudget,
                                                   int threads = 1) {
  if (q < 1) throw ParameterError("q must be >= 1");
  detail::check_budget(h.n(), q, budget);
  std::vector<std::uint64_t> hist(h.m() + 1, 0);
  if (h.n() == 0) {
    hist[0] = 1;
    return hist;
  }
  const auto closing = detail::closing_edges(h);
  auto parts = parallel_map(std::size_t(q), threads, [&](std::size_t first) {
    std::vector<std::uint64_t> part(h.m() + 1, 0);
    detail::walk_maps(h, q, int(first), false, closing,
                      [&](const std::vector<int>&, int mono) { ++part[std::size_t(mono)]; });
    return part;
  });
  for (const auto& part : parts)
    for (std::size_t e = 0; e < hist.size(); ++e) hist[e] += part[e];
  return hist;
}

struct PottsValue {
  double beta = 0;
  double log_z = 0;       ///< ln Z_{q,beta}
  double value = 0;       ///< Z_{q,beta} summed directly (exact integer at beta = 0)
  double log_excess = 0;  ///< ln(Z_{q,beta} - Z_q), -inf when no map has an edge violated
  std::uint64_t proper = 0;
};

/// Z_{q,beta}(H) = sum over all maps of exp(-beta E), from the energy
/// histogram, accumulated in the log domain.
inline PottsValue potts_from_histogram(const std::vector<std::uint64_t>& hist, double beta) {
  if (!(beta >= 0) || !std::isfinite(beta)) throw ParameterError("beta must be finite and >= 0");
  PottsValue r;
  r.beta = beta;
  r.proper = hist.empty() ? 0 : hist[0];
  std::vector<double> all, excess;
  CompensatedSum<long double> direct;
  for (std::size_t e = 0; e < hist.size(); ++e) {
    if (!hist[e]) continue;
    const double term = std::log(double(hist[e])) - beta * double(e);
    all.push_back(term);
    if (e) excess.push_back(term);
    direct.add(static_cast<long double>(hist[e]) * std::exp(-static_cast<long double>(beta) * e));
  }
  r.log_z = all.empty() ? -std::numeric_limits<double>::infinity() : log_sum_exp(all);
  r.log_excess =
      excess.empty() ? -std::numeric_limits<double>::infinity() : log_sum_exp(excess);
  r.value = double(direct.value());
  return r;
}

inline PottsValue partition_function(const Hypergraph& h, int q, double beta,
                                     double budget = kDefaultStateBudget, int threads = 1) {
  return potts_from_histogram(energy_histogram(h, q, budget, threads), beta);
}

// ---------------------------------------------------------------------------
// Monte-Carlo first moment
// ---------------------------------------------------------------------------

struct EmpiricalMoment {
  double mean = 0;
  double std_error = 0;
  std::int64_t trials = 0;
};

/// Mean and standard error of Z_q over `trials` independent uniform draws
/// from H(n, k, m).
inline EmpiricalMoment empirical_first_moment(int n, int k, std::uint64_t m, int q,
                                              std::int64_t trials, Rng& rng,
                                              double budget = kDefaultStateBudget) {
  if (trials < 2) throw ParameterError("empirical_first_moment needs trials >= 2");
  detail::check_budget(n, q, budget);
  CompensatedSum<double> sum, sq;
  for (std::int64_t t = 0; t < trials; ++t) {
    const auto h = sample_hypergraph(n, k, m, rng);
    const double z = double(count_colorings(h, q, budget).z_q);
    sum.add(z);
    sq.add(z * z);
  }
  EmpiricalMoment r;
  r.trials = trials;
  r.mean = sum.value() / double(trials);
  const double var = std::max(0.0, (sq.value() - double(trials) * r.mean * r.mean) / double(trials - 1));
  r.std_error = std::sqrt(var / double(trials));
  return r;
}

inline EmpiricalMoment empirical_first_moment(const ModelParams& p, std::int64_t trials, Rng& rng,
                                              double budget = kDefaultStateBudget) {
  p.validate();
  if (!p.n) throw ParameterError("empirical_first_moment needs n");
  return empirical_first_moment(int(*p.n), p.k, std::uint64_t(p.m()), p.q, trials, rng, budget);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Exact integers are emitted as strings.
inline nlohmann::json to_json(const ExactCounts& c) {
  nlohmann::json j;
  j["z_q"] = std::to_string(c.z_q);
  j["z_bal"] = std::to_string(c.z_bal);
  if (c.z_tame) j["z_tame"] = std::to_string(*c.z_tame);
  auto& profiles = j["by_class_profile"] = nlohmann::json::array();
  for (const auto& [profile, count] : c.by_class_profile)
    profiles.push_back({{"sizes", profile}, {"count", std::to_string(count)}});
  return j;
}

}  // namespace hypercolor
