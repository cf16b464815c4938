#pragma once

// Coloring predicates, edge-count statistics m_alpha, the core process and
// the cluster-size bound on a fixed (planted) instance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercolor/coloring.hpp"
#include "hypercolor/errors.hpp"
#include "hypercolor/hypergraph.hpp"
#include "hypercolor/moments.hpp"
#include "hypercolor/polytope.hpp"

namespace hypercolor {

/// Membership mask over the n vertices.
using VertexMask = std::vector<char>;

inline VertexMask to_mask(int n, std::span<const int> members) {
  VertexMask m(static_cast<std::size_t>(n), 0);
  for (int v : members) m[std::size_t(v)] = 1;
  return m;
}

inline std::vector<int> to_list(const VertexMask& m) {
  std::vector<int> out;
  for (std::size_t v = 0; v < m.size(); ++v)
    if (m[v]) out.push_back(int(v));
  return out;
}

inline void check_compatible(const Hypergraph& h, const Coloring& c) {
  if (h.n() != c.n())
    throw ParameterError("coloring has n = " + std::to_string(c.n()) + ", hypergraph has n = " +
                         std::to_string(h.n()));
}

/// Number of edges on which tau is constant.
inline std::int64_t monochromatic_count(const Hypergraph& h, const Coloring& tau) {
  check_compatible(h, tau);
  std::int64_t count = 0;
  for (std::size_t id = 0; id < h.m(); ++id) {
    const auto e = h.edge(id);
    bool mono = true;
    for (int v : e) mono = mono && tau[v] == tau[e[0]];
    count += mono;
  }
  return count;
}

inline bool is_proper(const Hypergraph& h, const Coloring& tau) {
  return monochromatic_count(h, tau) == 0;
}

inline bool is_balanced(const Coloring& sigma) { return sigma.is_balanced(); }

// ---------------------------------------------------------------------------
// m_alpha
// ---------------------------------------------------------------------------

/// With R = e \ {x}: some alpha distinct vertices of R lie in X2 and the rest
/// of R lies in X3. That holds iff R \ X3 ⊆ X2 and |R \ X3| <= alpha <= |R ∩ X2|.
inline bool edge_qualifies_at(std::span<const int> e, int x, int alpha, const VertexMask& x2,
                              const VertexMask& x3) {
  int outside = 0, inside = 0;
  for (int u : e) {
    if (u == x) continue;
    const bool in2 = x2[std::size_t(u)], in3 = x3[std::size_t(u)];
    if (!in3) {
      if (!in2) return false;
      ++outside;
    }
    inside += in2;
  }
  return outside <= alpha && alpha <= inside;
}

/// m_alpha(X1, X2, X3): edges e with some x ∈ e ∩ X1 at which the edge
/// qualifies. For alpha = k - 1 the X3 argument has no effect.
inline std::int64_t edge_count_m(const Hypergraph& h, int alpha, const VertexMask& x1,
                                 const VertexMask& x2, const VertexMask& x3) {
  if (alpha < 1 || alpha > h.k() - 1)
    throw ParameterError("alpha must lie in [1, k-1], got " + std::to_string(alpha));
  std::int64_t count = 0;
  for (std::size_t id = 0; id < h.m(); ++id) {
    const auto e = h.edge(id);
    for (int x : e)
      if (x1[std::size_t(x)] && edge_qualifies_at(e, x, alpha, x2, x3)) {
        ++count;
        break;
      }
  }
  return count;
}

inline std::int64_t edge_count_m(const Hypergraph& h, int alpha, std::span<const int> x1,
                                 std::span<const int> x2, std::span<const int> x3) {
  return edge_count_m(h, alpha, to_mask(h.n(), x1), to_mask(h.n(), x2), to_mask(h.n(), x3));
}

/// m_alpha({v}, X2, X3) using only the edges at v.
inline std::int64_t vertex_count_m(const Hypergraph& h, int v, int alpha, const VertexMask& x2,
                                   const VertexMask& x3) {
  std::int64_t count = 0;
  for (int id : h.incident(v)) count += edge_qualifies_at(h.edge(std::size_t(id)), v, alpha, x2, x3);
  return count;
}

/// m_{k-1}({v}, S): edges at v whose other vertices all lie in S.
inline std::int64_t vertex_count_full(const Hypergraph& h, int v, const VertexMask& s) {
  std::int64_t count = 0;
  for (int id : h.incident(v)) {
    bool all = true;
    for (int u : h.edge(std::size_t(id))) all = all && (u == v || s[std::size_t(u)]);
    count += all;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Core decomposition
// ---------------------------------------------------------------------------

struct CoreThresholds {
  double t_w = 0;       ///< CR1: v ∈ W_ij when m_{k-1}(v, V_j) < t_w
  double t_u = 0;       ///< CR2: v ∈ U_ij when m_1(v, W_j, V_j) > t_u
  double t_z = 0;       ///< CR3: v joins Z when m_1(v, Z, V_j) > t_z
  double t_core = 0;    ///< core: m_{k-1}(v, V_i ∩ core) >= t_core for all i != σ(v)
  double blocked_min = 1;  ///< v is j-blocked with at least this many edges into core ∩ V_j
  double y_min = 15;    ///< measured set: v ∉ V_i with m_{k-1}(v, V_i) < y_min

  static CoreThresholds defaults(int k) {
    CoreThresholds t;
    t.t_w = 300.0 * k;
    t.t_u = t.t_z = t.t_core = 100.0 * k;
    return t;
  }
  /// Divides the four occurrence thresholds by `factor`.
  CoreThresholds scaled(double factor) const {
    CoreThresholds t = *this;
    t.t_w /= factor;
    t.t_u /= factor;
    t.t_z /= factor;
    t.t_core /= factor;
    return t;
  }
  static CoreThresholds all(double value) {
    return {value, value, value, value, value, value};
  }
};

struct CoreDecomposition {
  int n = 0;
  int q = 0;
  CoreThresholds thresholds;
  std::vector<std::vector<std::vector<int>>> w_ij;  ///< [i][j], empty on the diagonal
  std::vector<int> w, u, z, core;
  std::vector<int> z_order;  ///< vertices added by CR3, in order
  std::vector<int> a0, a00, az, aw;
  std::vector<int> sigma_complete;
  std::vector<int> f1, f2;
  std::int64_t y_count = 0;  ///< pairs (v, i) with v ∉ V_i and m_{k-1}(v, V_i) < y_min
  std::vector<int> y_vertices;
};

namespace detail {

/// counts[j] = m_{k-1}(v, S ∩ V_j) for every color j.
inline std::vector<std::int64_t> class_full_counts(const Hypergraph& h, const Coloring& sigma,
                                                   int v, const VertexMask& s) {
  std::vector<std::int64_t> counts(std::size_t(sigma.q()), 0);
  for (int id : h.incident(v)) {
    int color = -1;
    bool ok = true;
    for (int u : h.edge(std::size_t(id))) {
      if (u == v) continue;
      if (!s[std::size_t(u)] || (color >= 0 && sigma[u] != color)) {
        ok = false;
        break;
      }
      color = sigma[u];
    }
    if (ok) ++counts[std::size_t(color)];
  }
  return counts;
}

inline bool violates_core(const std::vector<std::int64_t>& counts, int own, double t_core) {
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (int(i) != own && double(counts[i]) < t_core) return true;
  return false;
}

/// True when m_1(v, Z, V_j) > t_z for some j != σ(v).
inline bool joins_z(const Hypergraph& h, const Coloring& sigma, int v, const VertexMask& z,
                    const std::vector<VertexMask>& classes, double t_z) {
  for (int j = 0; j < sigma.q(); ++j) {
    if (j == sigma[v]) continue;
    if (double(vertex_count_m(h, v, 1, z, classes[std::size_t(j)])) > t_z) return true;
  }
  return false;
}

}  // namespace detail

/// Largest subset of `start` in which every vertex v has
/// m_{k-1}(v, V_i ∩ subset) >= t_core for every color i != σ(v). Violators
/// are deleted from a work queue; only vertices that lose a supporting edge
/// are rechecked.
inline std::vector<int> peel(const Hypergraph& h, const Coloring& sigma,
                             std::span<const int> start, double t_core) {
  check_compatible(h, sigma);
  VertexMask in = to_mask(h.n(), start);
  std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(h.n()));
  std::deque<int> queue;
  VertexMask queued(static_cast<std::size_t>(h.n()), 0);
  for (int v : start) {
    counts[std::size_t(v)] = detail::class_full_counts(h, sigma, v, in);
    if (detail::violates_core(counts[std::size_t(v)], sigma[v], t_core)) {
      queue.push_back(v);
      queued[std::size_t(v)] = 1;
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    // Edges that supported another member u had e \ {u} inside the set and
    // inside one class; removing v breaks each of them.
    for (int id : h.incident(v)) {
      const auto e = h.edge(std::size_t(id));
      for (int u : e) {
        if (u == v || !in[std::size_t(u)]) continue;
        int color = -1;
        bool ok = true;
        for (int x : e) {
          if (x == u) continue;
          if (!in[std::size_t(x)] || (color >= 0 && sigma[x] != color)) {
            ok = false;
            break;
          }
          color = sigma[x];
        }
        if (!ok) continue;
        auto& cu = counts[std::size_t(u)];
        --cu[std::size_t(color)];
        if (!queued[std::size_t(u)] && color != sigma[u] && double(cu[std::size_t(color)]) < t_core) {
          queue.push_back(u);
          queued[std::size_t(u)] = 1;
        }
      }
    }
    in[std::size_t(v)] = 0;
  }
  return to_list(in);
}

/// Runs CR1-CR3, the core peeling, and the A-set / free-vertex bookkeeping.
inline CoreDecomposition extract_core(const Hypergraph& h, const Coloring& sigma,
                                      const CoreThresholds& t) {
  check_compatible(h, sigma);
  const int n = h.n(), q = sigma.q();
  CoreDecomposition d;
  d.n = n;
  d.q = q;
  d.thresholds = t;

  std::vector<VertexMask> classes(static_cast<std::size_t>(q), VertexMask(std::size_t(n), 0));
  for (int v = 0; v < n; ++v) classes[std::size_t(sigma[v])][std::size_t(v)] = 1;
  // full[v][j] = m_{k-1}(v, V_j)
  const VertexMask everyone(static_cast<std::size_t>(n), 1);
  std::vector<std::vector<std::int64_t>> full(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) full[std::size_t(v)] = detail::class_full_counts(h, sigma, v, everyone);

  // CR1
  d.w_ij.assign(std::size_t(q), std::vector<std::vector<int>>(std::size_t(q)));
  VertexMask w(static_cast<std::size_t>(n), 0);
  std::vector<VertexMask> w_class(static_cast<std::size_t>(q), VertexMask(std::size_t(n), 0));
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < q; ++j) {
      if (j == sigma[v] || double(full[std::size_t(v)][std::size_t(j)]) >= t.t_w) continue;
      d.w_ij[std::size_t(sigma[v])][std::size_t(j)].push_back(v);
      w[std::size_t(v)] = 1;
      w_class[std::size_t(sigma[v])][std::size_t(v)] = 1;
    }
  d.w = to_list(w);

  // CR2
  VertexMask u(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < q && !u[std::size_t(v)]; ++j)
      if (j != sigma[v] &&
          double(vertex_count_m(h, v, 1, w_class[std::size_t(j)], classes[std::size_t(j)])) > t.t_u)
        u[std::size_t(v)] = 1;
  d.u = to_list(u);

  // CR3: the qualifying condition only grows with Z, so a candidate set
  // ordered by id yields the lowest-id choice at every step.
  VertexMask z = u;
  std::set<int> candidates;
  for (int v = 0; v < n; ++v)
    if (!z[std::size_t(v)] && detail::joins_z(h, sigma, v, z, classes, t.t_z)) candidates.insert(v);
  while (!candidates.empty()) {
    const int v = *candidates.begin();
    candidates.erase(candidates.begin());
    z[std::size_t(v)] = 1;
    d.z_order.push_back(v);
    for (int id : h.incident(v))
      for (int x : h.edge(std::size_t(id)))
        if (!z[std::size_t(x)] && !candidates.count(x) &&
            detail::joins_z(h, sigma, x, z, classes, t.t_z))
          candidates.insert(x);
  }
  d.z = to_list(z);

  // Core
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) all[std::size_t(v)] = v;
  d.core = peel(h, sigma, all, t.t_core);
  const VertexMask core = to_mask(n, d.core);

  // A-sets over all q colors
  std::vector<int> a_hits(static_cast<std::size_t>(n), 0);
  VertexMask a0(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < q; ++i)
      if (i != sigma[v] && full[std::size_t(v)][std::size_t(i)] == 0) {
        ++a_hits[std::size_t(v)];
        a0[std::size_t(v)] = 1;
      }
  d.a0 = to_list(a0);
  for (int v = 0; v < n; ++v)
    if (a_hits[std::size_t(v)] >= 2) d.a00.push_back(v);

  std::vector<VertexMask> z_class(static_cast<std::size_t>(q), VertexMask(std::size_t(n), 0));
  for (int v : d.z) z_class[std::size_t(sigma[v])][std::size_t(v)] = 1;
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < q; ++i)
      if (i != sigma[v] &&
          vertex_count_m(h, v, 1, z_class[std::size_t(i)], classes[std::size_t(i)]) > 0) {
        d.az.push_back(v);
        break;
      }

  std::vector<VertexMask> unweak(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    unweak[std::size_t(i)] = classes[std::size_t(i)];
    for (int v = 0; v < n; ++v)
      if (w_class[std::size_t(i)][std::size_t(v)]) unweak[std::size_t(i)][std::size_t(v)] = 0;
  }
  for (int v = 0; v < n; ++v) {
    if (a0[std::size_t(v)]) continue;
    for (int i = 0; i < q; ++i)
      if (i != sigma[v] && vertex_count_full(h, v, unweak[std::size_t(i)]) == 0) {
        d.aw.push_back(v);
        break;
      }
  }

  // Blocked colors and free vertices
  for (int v = 0; v < n; ++v) {
    const auto into_core = detail::class_full_counts(h, sigma, v, core);
    int open = 0, blocked_other = 0;
    for (int j = 0; j < q; ++j) {
      const bool blocked = double(into_core[std::size_t(j)]) >= t.blocked_min;
      open += !blocked;
      blocked_other += blocked && j != sigma[v];
    }
    if (open >= 2) d.f1.push_back(v);
    if (open >= 3) d.f2.push_back(v);
    if (blocked_other == q - 1) d.sigma_complete.push_back(v);
  }

  VertexMask y(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < q; ++i)
      if (i != sigma[v] && double(full[std::size_t(v)][std::size_t(i)]) < t.y_min) {
        ++d.y_count;
        y[std::size_t(v)] = 1;
      }
  d.y_vertices = to_list(y);
  return d;
}

/// (|F1 \ (F2 ∪ AW)| ln 2 + |F2 ∪ AW| ln q) / n: log of the cluster-size
/// upper bound per vertex.
inline double cluster_size_log_bound(const CoreDecomposition& d, int q, int n) {
  if (n <= 0) throw ParameterError("cluster_size_log_bound needs n > 0");
  std::vector<int> wide;
  std::set_union(d.f2.begin(), d.f2.end(), d.aw.begin(), d.aw.end(), std::back_inserter(wide));
  std::vector<int> narrow;
  std::set_difference(d.f1.begin(), d.f1.end(), wide.begin(), wide.end(),
                      std::back_inserter(narrow));
  return (double(narrow.size()) * std::log(2.0) + double(wide.size()) * std::log(double(q))) / n;
}

inline double cluster_size_log_bound(const CoreDecomposition& d) {
  return cluster_size_log_bound(d, d.q, d.n);
}

// ---------------------------------------------------------------------------
// Clusters and separability on an instance
// ---------------------------------------------------------------------------

/// min_i a_ii(σ, τ) > q^{-1} (1.01/k)^{1/(k-1)}.
inline bool in_cluster(const Coloring& sigma, const Coloring& tau, int k,
                       Warnings* warnings = nullptr) {
  if (!tau.is_balanced()) warn(warnings, "unbalanced_tau", "cluster test on an unbalanced coloring");
  const auto a = overlap_of(sigma, tau);
  const double t = stability_threshold(a.q(), k);
  for (int i = 0; i < a.q(); ++i)
    if (!(a(i, i) > t)) return false;
  return true;
}

struct SeparabilityViolation {
  std::size_t tau_index = 0;
  int i = 0;
  int j = 0;
  double value = 0;
  bool operator==(const SeparabilityViolation&) const = default;
};

struct SeparabilityReport {
  SeparabilityWindow window;
  std::vector<SeparabilityViolation> violations;
  bool separable() const { return violations.empty(); }
};

/// Every (τ, i, j) with a_ij(σ, τ) inside the forbidden window. Each τ must
/// be a proper balanced coloring of H.
inline SeparabilityReport separability_scan(const Hypergraph& h, const Coloring& sigma,
                                            std::span<const Coloring> taus,
                                            Warnings* warnings = nullptr) {
  SeparabilityReport r;
  r.window = separability_window(sigma.q(), h.k(), warnings);
  for (std::size_t t = 0; t < taus.size(); ++t) {
    const auto& tau = taus[t];
    if (!is_proper(h, tau))
      throw ParameterError("coloring " + std::to_string(t) + " is not proper");
    if (!tau.is_balanced())
      throw ParameterError("coloring " + std::to_string(t) + " is not balanced");
    const auto a = overlap_of(sigma, tau);
    for (int i = 0; i < a.q(); ++i)
      for (int j = 0; j < a.q(); ++j)
        if (in_window(r.window, a(i, j))) r.violations.push_back({t, i, j, a(i, j)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const CoreThresholds& t) {
  return {{"t_w", t.t_w},         {"t_u", t.t_u},   {"t_z", t.t_z}, {"t_core", t.t_core},
          {"blocked_min", t.blocked_min}, {"y_min", t.y_min}};
}

/// Set sizes always; member lists when `members` is set (1-based ids).
inline nlohmann::json to_json(const CoreDecomposition& d, bool members = false) {
  nlohmann::json j;
  j["n"] = d.n;
  j["q"] = d.q;
  j["thresholds"] = to_json(d.thresholds);
  auto put = [&](const char* name, const std::vector<int>& s) {
    j["sizes"][name] = s.size();
    if (members) {
      auto& out = j["members"][name] = nlohmann::json::array();
      for (int v : s) out.push_back(v + 1);
    }
  };
  put("W", d.w);
  put("U", d.u);
  put("Z", d.z);
  put("core", d.core);
  put("A0", d.a0);
  put("A00", d.a00);
  put("AZ", d.az);
  put("AW", d.aw);
  put("sigma_complete", d.sigma_complete);
  put("F1", d.f1);
  put("F2", d.f2);
  put("Y", d.y_vertices);
  j["y_pairs"] = d.y_count;
  auto& wij = j["sizes"]["W_ij"] = nlohmann::json::array();
  for (const auto& row : d.w_ij) {
    auto r = nlohmann::json::array();
    for (const auto& s : row) r.push_back(s.size());
    wij.push_back(r);
  }
  j["cluster_size_log_bound"] = d.n > 0 ? cluster_size_log_bound(d) : 0.0;
  return j;
}

inline nlohmann::json to_json(const SeparabilityReport& r) {
  nlohmann::json j;
  j["window"] = {{"lo", r.window.lo}, {"hi", r.window.hi}, {"kappa", r.window.kappa},
                 {"clamped", r.window.clamped}};
  j["separable"] = r.separable();
  auto& v = j["violations"] = nlohmann::json::array();
  for (const auto& x : r.violations)
    v.push_back({{"tau", x.tau_index}, {"i", x.i + 1}, {"j", x.j + 1}, {"value", x.value}});
  return j;
}

}  // namespace hypercolor
