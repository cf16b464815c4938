#pragma once

// k-uniform hypergraphs: storage, text I/O, and uniform sampling of H(n,k,m).

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "hypercolor/coloring.hpp"
#include "hypercolor/errors.hpp"
#include "hypercolor/moments.hpp"
#include "hypercolor/overlap_matrix.hpp"
#include "hypercolor/numeric.hpp"

namespace hypercolor {

/// n vertices (0-based), distinct edges of exactly k distinct vertices.
/// Edges are stored flat and sorted internally; incidence lists give the
/// edge ids containing each vertex.
class Hypergraph {
 public:
  Hypergraph() = default;
  Hypergraph(int n, int k) : n_(n), k_(k), incident_(static_cast<std::size_t>(n)) {
    if (n < 0) throw ParameterError("n must be >= 0");
    if (k < 1) throw ParameterError("k must be >= 1");
  }

  /// Throws ParameterError on invalid or repeated edges.
  static Hypergraph from_edges(int n, int k, const std::vector<std::vector<int>>& edges) {
    Hypergraph h(n, k);
    for (const auto& e : edges)
      if (!h.add_edge(e)) throw ParameterError("duplicate edge");
    return h;
  }

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  std::size_t m() const noexcept { return k_ ? flat_.size() / std::size_t(k_) : 0; }

  std::span<const int> edge(std::size_t id) const {
    return std::span<const int>(flat_).subspan(id * std::size_t(k_), std::size_t(k_));
  }
  const std::vector<int>& incident(int v) const { return incident_[std::size_t(v)]; }

  bool contains(std::span<const int> sorted_edge) const { return keys_.count(key(sorted_edge)) > 0; }

  /// Adds the edge (any vertex order); returns false if already present.
  bool add_edge(std::vector<int> e) {
    if (int(e.size()) != k_) throw ParameterError("edge must have exactly k vertices");
    std::sort(e.begin(), e.end());
    for (std::size_t t = 0; t < e.size(); ++t) {
      if (e[t] < 0 || e[t] >= n_) throw ParameterError("edge vertex out of range");
      if (t && e[t] == e[t - 1]) throw ParameterError("edge has a repeated vertex");
    }
    if (!keys_.insert(key(e)).second) return false;
    const int id = int(m());
    flat_.insert(flat_.end(), e.begin(), e.end());
    for (int v : e) incident_[std::size_t(v)].push_back(id);
    return true;
  }

  /// Reorders edges lexicographically so equal edge sets compare and print
  /// identically regardless of insertion order.
  void canonicalize() {
    const std::size_t count = m();
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(edge(a).begin(), edge(a).end(), edge(b).begin(),
                                          edge(b).end());
    });
    std::vector<int> flat;
    flat.reserve(flat_.size());
    for (std::size_t id : order) flat.insert(flat.end(), edge(id).begin(), edge(id).end());
    flat_ = std::move(flat);
    for (auto& list : incident_) list.clear();
    for (std::size_t id = 0; id < count; ++id)
      for (int v : edge(id)) incident_[std::size_t(v)].push_back(int(id));
  }

  std::vector<std::vector<int>> edge_list() const {
    std::vector<std::vector<int>> out;
    for (std::size_t id = 0; id < m(); ++id) out.emplace_back(edge(id).begin(), edge(id).end());
    return out;
  }

  bool operator==(const Hypergraph& o) const {
    return n_ == o.n_ && k_ == o.k_ && flat_ == o.flat_;
  }

 private:
  static std::string key(std::span<const int> e) {
    return std::string(reinterpret_cast<const char*>(e.data()), e.size() * sizeof(int));
  }

  int n_ = 0;
  int k_ = 1;
  std::vector<int> flat_;
  std::vector<std::vector<int>> incident_;
  std::unordered_set<std::string> keys_;
};

// ---------------------------------------------------------------------------
// Text formats: header "n k m", one sorted edge per line, 1-based vertices.
// Colorings: one line of n colors in 1..q.
// ---------------------------------------------------------------------------

inline void write_hypergraph(std::ostream& out, const Hypergraph& h) {
  out << h.n() << ' ' << h.k() << ' ' << h.m() << '\n';
  for (std::size_t id = 0; id < h.m(); ++id) {
    const auto e = h.edge(id);
    for (std::size_t t = 0; t < e.size(); ++t) out << (t ? " " : "") << e[t] + 1;
    out << '\n';
  }
}

inline std::string to_text(const Hypergraph& h) {
  std::ostringstream s;
  write_hypergraph(s, h);
  return s.str();
}

inline Hypergraph read_hypergraph(std::istream& in) {
  long long n, k, m;
  if (!(in >> n >> k >> m)) throw ParameterError("hypergraph header must be 'n k m'");
  if (n < 0 || k < 1 || m < 0) throw ParameterError("invalid hypergraph header");
  Hypergraph h(static_cast<int>(n), static_cast<int>(k));
  for (long long id = 0; id < m; ++id) {
    std::vector<int> e(static_cast<std::size_t>(k));
    for (auto& v : e) {
      if (!(in >> v)) throw ParameterError("truncated edge list");
      --v;
    }
    if (!h.add_edge(std::move(e))) throw ParameterError("duplicate edge in input");
  }
  return h;
}

inline Hypergraph hypergraph_from_text(const std::string& text) {
  std::istringstream s(text);
  return read_hypergraph(s);
}

inline void write_coloring(std::ostream& out, const Coloring& c) {
  for (int v = 0; v < c.n(); ++v) out << (v ? " " : "") << c[v] + 1;
  out << '\n';
}

/// Reads n colors in 1..q from the first nonempty line.
inline Coloring read_coloring(std::istream& in, int q) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  std::istringstream s(line);
  std::vector<int> colors;
  int x;
  while (s >> x) colors.push_back(x - 1);
  if (!s.eof()) throw ParameterError("coloring line has a non-integer token");
  return Coloring(q, std::move(colors));
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

/// Uniform k-subset of {0..n-1}, sorted (Floyd's algorithm).
inline std::vector<int> random_k_subset(int n, int k, Rng& rng) {
  std::vector<int> out;
  out.reserve(std::size_t(k));
  for (int j = n - k; j < n; ++j) {
    const int t = std::uniform_int_distribution<int>(0, j)(rng);
    if (std::find(out.begin(), out.end(), t) == out.end())
      out.push_back(t);
    else
      out.push_back(j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Advances a sorted k-subset of {0..n-1} to its lexicographic successor.
inline bool next_combination(std::vector<int>& c, int n) {
  const int k = int(c.size());
  int i = k - 1;
  while (i >= 0 && c[std::size_t(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++c[std::size_t(i)];
  for (int j = i + 1; j < k; ++j) c[std::size_t(j)] = c[std::size_t(j - 1)] + 1;
  return true;
}

/// Selection sampling of exactly `want` items out of the `total` k-subsets
/// accepted by `keep`, visited in lexicographic order.
template <class Keep>
void select_dense(Hypergraph& h, int n, int k, std::uint64_t total, std::uint64_t want,
                  Rng& rng, Keep keep) {
  if (want == 0) return;
  std::vector<int> c(static_cast<std::size_t>(k));
  std::iota(c.begin(), c.end(), 0);
  std::uint64_t seen = 0, taken = 0;
  do {
    if (!keep(c)) continue;
    const std::uint64_t left = total - seen;
    ++seen;
    if (std::uniform_int_distribution<std::uint64_t>(0, left - 1)(rng) < want - taken) {
      h.add_edge(c);
      if (++taken == want) return;
    }
  } while (next_combination(c, n));
}

inline constexpr std::uint64_t kDenseLimit = 2'000'000;

}  // namespace detail

/// Uniform random m-subset of all k-subsets of [n]. Uses rejection into a
/// dedup set when edges are sparse and selection sampling over the full
/// enumeration otherwise.
inline Hypergraph sample_hypergraph(int n, int k, std::uint64_t m, Rng& rng) {
  if (n < k || k < 1) throw ParameterError("sample_hypergraph needs 1 <= k <= n");
  const std::uint64_t total = binomial_u64(std::uint64_t(n), std::uint64_t(k));
  if (m > total)
    throw ParameterError("m = " + std::to_string(m) + " exceeds C(n,k) = " + std::to_string(total));
  Hypergraph h(n, k);
  if (total <= detail::kDenseLimit && 2 * m > total / 8) {
    detail::select_dense(h, n, k, total, m, rng, [](const std::vector<int>&) { return true; });
  } else {
    while (h.m() < m) h.add_edge(detail::random_k_subset(n, k, rng));
  }
  h.canonicalize();
  return h;
}

/// Number of k-subsets of [n] that are not monochromatic under sigma.
inline std::uint64_t nonmonochromatic_sets(const Coloring& sigma, int k) {
  std::uint64_t total = binomial_u64(std::uint64_t(sigma.n()), std::uint64_t(k));
  for (int s : sigma.class_sizes()) total -= binomial_u64(std::uint64_t(s), std::uint64_t(k));
  return total;
}

/// p = c n / (C(n,k) - sum_j C(|V_j|, k)), so the expected edge count of the
/// planted model is c n. n is taken from sigma.
inline double planted_edge_probability(const ModelParams& p, const Coloring& sigma,
                                       Warnings* warnings = nullptr) {
  p.validate();
  if (sigma.q() != p.q) throw ParameterError("coloring has a different q");
  if (p.n && *p.n != sigma.n()) throw ParameterError("coloring has a different n");
  if (sigma.n() < p.k) throw ParameterError("planted model needs n >= k");
  if (!sigma.is_balanced())
    warn(warnings, "unbalanced_planted_coloring", "planted coloring is not balanced");
  const std::uint64_t denom = nonmonochromatic_sets(sigma, p.k);
  if (denom == 0) throw ParameterError("every k-set is monochromatic under the coloring");
  const double prob = p.c * sigma.n() / double(denom);
  if (prob > 1.0)
    throw ParameterError("planted edge probability " + format_double(prob) +
                         " exceeds 1; density too high for n = " + std::to_string(sigma.n()));
  return prob;
}

/// Includes each k-set that is not monochromatic under sigma independently
/// with probability planted_edge_probability. The edge count is drawn from
/// its binomial law first and the edges are then a uniform subset of that
/// size, which gives the same distribution.
inline Hypergraph sample_planted(const ModelParams& p, const Coloring& sigma, Rng& rng,
                                 Warnings* warnings = nullptr) {
  const double prob = planted_edge_probability(p, sigma, warnings);
  const int n = sigma.n(), k = p.k;
  const std::uint64_t pool = nonmonochromatic_sets(sigma, k);
  const auto want = std::uint64_t(
      std::binomial_distribution<std::int64_t>(std::int64_t(pool), prob)(rng));
  auto mono = [&](const std::vector<int>& e) {
    for (int v : e)
      if (sigma[v] != sigma[e[0]]) return false;
    return true;
  };
  Hypergraph h(n, k);
  const std::uint64_t total = binomial_u64(std::uint64_t(n), std::uint64_t(k));
  if (total <= detail::kDenseLimit && 2 * want > pool / 8) {
    detail::select_dense(h, n, k, pool, want, rng,
                         [&](const std::vector<int>& e) { return !mono(e); });
  } else {
    while (h.m() < want) {
      auto e = detail::random_k_subset(n, k, rng);
      if (!mono(e)) h.add_edge(std::move(e));
    }
  }
  h.canonicalize();
  return h;
}

}  // namespace hypercolor
