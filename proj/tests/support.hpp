#pragma once

// Shared helpers for the unit and acceptance suites: hand-rolled random
// generators and independent numeric oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hypercolor/moments.hpp"
#include "hypercolor/overlap_matrix.hpp"
#include "hypercolor/simulator.hpp"

namespace hctest {

using hypercolor::ModelParams;
using hypercolor::OverlapMatrix;

/// Row of q nonnegative entries summing to 1/q. Roughly a third of the
/// draws zero out a random subset of entries to exercise boundary cases.
inline std::vector<double> random_row(int q, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_int_distribution<int> coin(0, 2);
  std::vector<double> row(static_cast<std::size_t>(q));
  const bool sparse = coin(rng) == 0;
  double total = 0.0;
  for (int j = 0; j < q; ++j) {
    row[std::size_t(j)] = (sparse && coin(rng) == 0) ? 0.0 : expo(rng);
    total += row[std::size_t(j)];
  }
  if (total == 0.0) {
    row[0] = 1.0;
    total = 1.0;
  }
  for (double& x : row) x /= total * q;
  return row;
}

/// Random subset of {lo, .., q-1}, nonempty, of size at most max_size.
inline std::vector<int> random_subset(int q, int lo, int max_size, std::mt19937_64& rng) {
  std::vector<int> all;
  for (int j = lo; j < q; ++j) all.push_back(j);
  std::shuffle(all.begin(), all.end(), rng);
  std::uniform_int_distribution<int> size(1, std::max(1, std::min<int>(max_size, int(all.size()))));
  all.resize(std::size_t(size(rng)));
  std::sort(all.begin(), all.end());
  return all;
}

/// F∘L where L maps the first q^2 - 1 entries to a matrix whose last entry
/// is 1 minus their sum. Computed directly, without the library's rate().
inline double rate_reduced(const std::vector<double>& x, int q, int k, double c) {
  double h = 0.0, norm = 0.0, mass = 0.0;
  for (double v : x) {
    h -= v * std::log(v);
    norm += std::pow(v, k);
    mass += v;
  }
  const double last = 1.0 - mass;
  h -= last * std::log(last);
  norm += std::pow(last, k);
  return h + c * std::log(1.0 - 2.0 * std::pow(double(q), 1 - k) + norm);
}

/// Central-difference Hessian of F∘L at the flat point.
inline std::vector<double> fd_hessian_flat(int q, int k, double c, double step = 1e-5) {
  const int dim = q * q - 1;
  const std::vector<double> base(std::size_t(dim), 1.0 / (double(q) * q));
  std::vector<double> out(std::size_t(dim) * dim);
  auto f = [&](int i, double di, int j, double dj) {
    auto x = base;
    x[std::size_t(i)] += di;
    x[std::size_t(j)] += dj;
    return rate_reduced(x, q, k, c);
  };
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      double v;
      if (i == j) {
        auto xp = base, xm = base;
        xp[std::size_t(i)] += step;
        xm[std::size_t(i)] -= step;
        v = (rate_reduced(xp, q, k, c) - 2.0 * rate_reduced(base, q, k, c) +
             rate_reduced(xm, q, k, c)) /
            (step * step);
      } else {
        v = (f(i, step, j, step) - f(i, step, j, -step) - f(i, -step, j, step) +
             f(i, -step, j, -step)) /
            (4.0 * step * step);
      }
      out[std::size_t(i) * dim + j] = out[std::size_t(j) * dim + i] = v;
    }
  return out;
}

}  // namespace hctest

namespace hctest {

/// A flattening case for which the averaging condition is designed to
/// hold: rows of a random point in S, with row i rebuilt so that a block J
/// of size ceil(q^μ) stays below the entry bound.
struct FlattenCase {
  OverlapMatrix a;
  int row;
  std::vector<int> cols;
  double mu;
  ModelParams params;
};

/// q is drawn from [94, q_hi]; below 94 no μ <= 1 is admissible.
inline FlattenCase random_flatten_case(std::mt19937_64& rng, int q_hi = 160) {
  std::uniform_int_distribution<int> qd(94, std::max(94, q_hi));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  while (true) {
    const int q = qd(rng);
    const int k = 3;
    const double lq = std::log(double(q)), llq = std::log(lq);
    const double mu_lo = 3.0 * llq / lq;
    if (mu_lo > 1.0) continue;
    const double mu = mu_lo + (1.0 - mu_lo) * u(rng);
    const auto b = hypercolor::threshold_bounds(q, k);
    ModelParams p;
    p.q = q;
    p.k = k;
    p.c = 0.5 + (b.new_lower - 0.5) * u(rng);
    const double cap = std::pow(0.995 / (k * std::pow(double(q), k - 1)) * (mu - llq / lq),
                                1.0 / (k - 1));
    const int size = std::min(q, int(std::ceil(std::exp(mu * lq) - 1e-9)));

    std::vector<double> e(std::size_t(q) * q);
    for (int i = 0; i < q; ++i) {
      double total = 0.0;
      for (int j = 0; j < q; ++j) total += (e[std::size_t(i) * q + j] = expo(rng));
      for (int j = 0; j < q; ++j) e[std::size_t(i) * q + j] /= total * q;
    }
    const int row = std::uniform_int_distribution<int>(0, q - 1)(rng);
    std::vector<int> perm(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) perm[std::size_t(j)] = j;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> cols(perm.begin(), perm.begin() + size);
    std::sort(cols.begin(), cols.end());

    double in_mass = 0.0;
    for (int j : cols) in_mass += (e[std::size_t(row) * q + j] = 0.999 * cap * u(rng));
    if (size == q) {
      for (int j : cols) e[std::size_t(row) * q + j] *= 1.0 / (q * in_mass);
    } else {
      if (in_mass >= 1.0 / q) continue;
      double out_mass = 0.0;
      for (int t = size; t < q; ++t) out_mass += e[std::size_t(row) * q + perm[std::size_t(t)]];
      const double f = (1.0 / q - in_mass) / out_mass;
      for (int t = size; t < q; ++t) e[std::size_t(row) * q + perm[std::size_t(t)]] *= f;
    }
    double top = 0.0;
    for (int j : cols) top = std::max(top, e[std::size_t(row) * q + j]);
    if (!(top < cap)) continue;
    return {OverlapMatrix(q, std::move(e)), row, std::move(cols), mu, p};
  }
}


// ---------------------------------------------------------------------------
// Simulator oracles
// ---------------------------------------------------------------------------

/// m_alpha by brute force over every x in the edge and every alpha-subset of
/// the remaining vertices, testing membership literally.
inline long long naive_edge_count_m(const hypercolor::Hypergraph& h, int alpha,
                                    const std::vector<int>& x1, const std::vector<int>& x2,
                                    const std::vector<int>& x3) {
  auto has = [](const std::vector<int>& s, int v) {
    return std::find(s.begin(), s.end(), v) != s.end();
  };
  long long count = 0;
  for (const auto& e : h.edge_list()) {
    bool hit = false;
    for (int x : e) {
      if (!has(x1, x)) continue;
      std::vector<int> rest;
      for (int u : e)
        if (u != x) rest.push_back(u);
      const int r = int(rest.size());
      for (int mask = 0; mask < (1 << r) && !hit; ++mask) {
        if (__builtin_popcount(unsigned(mask)) != alpha) continue;
        bool ok = true;
        for (int t = 0; t < r; ++t) {
          const bool chosen = mask >> t & 1;
          if (chosen && !has(x2, rest[std::size_t(t)])) ok = false;
          if (!chosen && alpha != h.k() - 1 && !has(x3, rest[std::size_t(t)])) ok = false;
        }
        hit = ok;
      }
      if (hit) break;
    }
    count += hit;
  }
  return count;
}

/// Rechecks the core inequality for every member by scanning the full edge
/// list. Returns the first failing vertex or -1.
inline int naive_core_violation(const hypercolor::Hypergraph& h, const hypercolor::Coloring& sigma,
                                const std::vector<int>& core, double t_core) {
  std::vector<char> in(static_cast<std::size_t>(h.n()), 0);
  for (int v : core) in[std::size_t(v)] = 1;
  for (int v : core)
    for (int i = 0; i < sigma.q(); ++i) {
      if (i == sigma[v]) continue;
      long long count = 0;
      for (const auto& e : h.edge_list()) {
        if (std::find(e.begin(), e.end(), v) == e.end()) continue;
        bool ok = true;
        for (int u : e)
          if (u != v && !(in[std::size_t(u)] && sigma[u] == i)) ok = false;
        count += ok;
      }
      if (double(count) < t_core) return v;
    }
  return -1;
}

/// Uniform coloring of n vertices with q colors (not necessarily balanced).
inline hypercolor::Coloring random_coloring(int n, int q, std::mt19937_64& rng) {
  std::vector<int> c(static_cast<std::size_t>(n));
  for (auto& x : c) x = std::uniform_int_distribution<int>(0, q - 1)(rng);
  return hypercolor::Coloring(q, std::move(c));
}

}  // namespace hctest
