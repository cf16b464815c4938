#pragma once

// Domains of overlap matrices (D, S, D_s, D_tame), membership predicates,
// Sinkhorn projection, random sampling, and the row-flattening move.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hypercolor/coloring.hpp"
#include "hypercolor/errors.hpp"
#include "hypercolor/moments.hpp"
#include "hypercolor/numeric.hpp"
#include "hypercolor/overlap_matrix.hpp"

namespace hypercolor {

/// a_ij = |σ^{-1}(i) ∩ τ^{-1}(j)| / n.
inline OverlapMatrix overlap_of(const Coloring& sigma, const Coloring& tau) {
  if (sigma.n() != tau.n()) throw ParameterError("overlap_of: colorings differ in n");
  if (sigma.q() != tau.q()) throw ParameterError("overlap_of: colorings differ in q");
  if (sigma.n() == 0) throw ParameterError("overlap_of: empty colorings");
  const int q = sigma.q();
  std::vector<long long> counts(std::size_t(q) * q, 0);
  for (int v = 0; v < sigma.n(); ++v) ++counts[std::size_t(sigma[v]) * q + tau[v]];
  std::vector<double> e(counts.size());
  for (std::size_t t = 0; t < e.size(); ++t) e[t] = double(counts[t]) / sigma.n();
  return OverlapMatrix(q, std::move(e));
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

inline bool is_in_S(const OverlapMatrix& a, double tol = 1e-9) {
  const double target = 1.0 / a.q();
  for (int i = 0; i < a.q(); ++i)
    if (std::abs(a.row_sum(i) - target) > tol) return false;
  return true;
}

inline bool is_in_D(const OverlapMatrix& a, double tol = 1e-9) {
  if (!is_in_S(a, tol)) return false;
  const double target = 1.0 / a.q();
  for (int j = 0; j < a.q(); ++j)
    if (std::abs(a.col_sum(j) - target) > tol) return false;
  return true;
}

/// q^{-1} (1.01/k)^{1/(k-1)}.
inline double stability_threshold(int q, int k) { return stability_constant(k) / q; }

/// Number of entries strictly above the stability threshold.
inline int stability_index(const OverlapMatrix& a, int k) {
  const double t = stability_threshold(a.q(), k);
  return int(std::count_if(a.entries().begin(), a.entries().end(),
                           [t](double x) { return x > t; }));
}

/// Forbidden open interval (lo, hi) for entries of a separable matrix.
struct SeparabilityWindow {
  double lo = 0;
  double hi = 0;
  double kappa = 0;
  bool clamped = false;  ///< κ replaced by 0 because the window was empty
};

/// (const/q, (1-κ)/q). When 1 - κ does not exceed the stability constant
/// (small q) the window is empty; it is then clamped to (const/q, 1/q) and
/// a warning is emitted.
inline SeparabilityWindow separability_window(int q, int k, Warnings* warnings = nullptr) {
  SeparabilityWindow w;
  w.kappa = kappa(q, k, warnings);
  w.lo = stability_constant(k) / q;
  w.hi = (1.0 - w.kappa) / q;
  if (w.hi <= w.lo) {
    w.hi = 1.0 / q;
    w.clamped = true;
    warn(warnings, "separability_window_clamped",
         "separability window empty at q=" + std::to_string(q) + ", k=" + std::to_string(k) +
             "; using (" + format_double(w.lo) + ", 1/q)");
  }
  return w;
}

inline bool in_window(const SeparabilityWindow& w, double x) { return x > w.lo && x < w.hi; }

inline bool is_separable_matrix(const OverlapMatrix& a, int k, Warnings* warnings = nullptr) {
  const auto w = separability_window(a.q(), k, warnings);
  for (double x : a.entries())
    if (in_window(w, x)) return false;
  return true;
}

inline bool is_tame_matrix(const OverlapMatrix& a, int k, double tol = 1e-9,
                           Warnings* warnings = nullptr) {
  return is_in_D(a, tol) && stability_index(a, k) < a.q() &&
         is_separable_matrix(a, k, warnings);
}

struct DomainTag {
  enum class Kind { D, S, Ds, Tame };
  Kind kind = Kind::D;
  int s = 0;  ///< stability index, only for Ds

  static DomainTag D() { return {Kind::D, 0}; }
  static DomainTag S() { return {Kind::S, 0}; }
  static DomainTag Ds(int s) { return {Kind::Ds, s}; }
  static DomainTag Tame() { return {Kind::Tame, 0}; }

  std::string name() const {
    switch (kind) {
      case Kind::D: return "D";
      case Kind::S: return "S";
      case Kind::Ds: return "D_" + std::to_string(s);
      case Kind::Tame: return "D_tame";
    }
    return "?";
  }
  bool operator==(const DomainTag&) const = default;
};

inline DomainTag parse_domain(const std::string& text) {
  if (text == "D") return DomainTag::D();
  if (text == "S") return DomainTag::S();
  if (text == "tame" || text == "D_tame") return DomainTag::Tame();
  if (text.rfind("D_", 0) == 0 || text.rfind("Ds", 0) == 0) {
    const auto digits = text.substr(2);
    if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit))
      return DomainTag::Ds(std::stoi(digits));
  }
  throw ParameterError("unknown domain '" + text + "' (expected D, S, D_<s>, tame)");
}

/// D_s is the s-stable part of D_tame: in D, separable, stability index s.
inline bool domain_contains(const DomainTag& tag, const OverlapMatrix& a, int k,
                            double tol = 1e-9, Warnings* warnings = nullptr) {
  switch (tag.kind) {
    case DomainTag::Kind::S: return is_in_S(a, tol);
    case DomainTag::Kind::D: return is_in_D(a, tol);
    case DomainTag::Kind::Tame: return is_tame_matrix(a, k, tol, warnings);
    case DomainTag::Kind::Ds:
      return is_in_D(a, tol) && stability_index(a, k) == tag.s &&
             is_separable_matrix(a, k, warnings);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Flattening
// ---------------------------------------------------------------------------

namespace detail {

inline void check_columns(int q, std::span<const int> cols) {
  if (cols.empty()) throw ParameterError("column set J must be nonempty");
  std::vector<char> seen(std::size_t(q), 0);
  for (int j : cols) {
    if (j < 0 || j >= q) throw ParameterError("column index out of range");
    if (seen[std::size_t(j)]) throw ParameterError("column set J has duplicates");
    seen[std::size_t(j)] = 1;
  }
}

}  // namespace detail

/// Replaces the entries (i, j), j ∈ J, by their mean. Row sums are kept.
inline OverlapMatrix flatten(const OverlapMatrix& a, int i, std::span<const int> cols) {
  if (i < 0 || i >= a.q()) throw ParameterError("row index out of range");
  detail::check_columns(a.q(), cols);
  CompensatedSum<double> s;
  for (int j : cols) s.add(a(i, j));
  const double mean = s.value() / double(cols.size());
  std::vector<double> e(a.entries().begin(), a.entries().end());
  for (int j : cols) e[a.index(i, j)] = mean;
  return OverlapMatrix(a.q(), std::move(e));
}

/// |J| >= q^μ and max_{j∈J} a_ij^{k-1} < 0.995/(k q^{k-1}) (μ - ln ln q / ln q).
/// Outside 3 ln ln q / ln q <= μ <= 1 the condition is not applicable and
/// false is returned with a warning.
inline bool averaging_condition(const OverlapMatrix& a, int i, std::span<const int> cols,
                                double mu, const ModelParams& p,
                                Warnings* warnings = nullptr) {
  if (i < 0 || i >= a.q()) throw ParameterError("row index out of range");
  detail::check_columns(a.q(), cols);
  const double lq = std::log(double(a.q()));
  const double llq = std::log(lq);
  if (!(mu <= 1.0) || !(mu >= 3.0 * llq / lq)) {
    warn(warnings, "averaging_mu_out_of_range",
         "mu=" + format_double(mu) + " outside [3 lnln q/ln q, 1] at q=" +
             std::to_string(a.q()));
    return false;
  }
  // |J| >= q^μ compared in logs, with slack for the rounding of μ ln q.
  if (std::log(double(cols.size())) < mu * lq - 1e-12) return false;
  double top = 0.0;
  for (int j : cols) top = std::max(top, a(i, j));
  const double bound = 0.995 / (p.k * std::pow(double(a.q()), p.k - 1)) * (mu - llq / lq);
  return std::pow(top, p.k - 1) < bound;
}

// ---------------------------------------------------------------------------
// Sinkhorn projection and sampling
// ---------------------------------------------------------------------------

struct SinkhornResult {
  std::vector<double> entries;
  double residual = 0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline double marginal_residual(const std::vector<double>& m, int q, std::span<const double> rows,
                                std::span<const double> cols) {
  double r = 0.0;
  for (int i = 0; i < q; ++i) {
    CompensatedSum<double> s;
    for (int j = 0; j < q; ++j) s.add(m[std::size_t(i) * q + j]);
    r = std::max(r, std::abs(s.value() - rows[std::size_t(i)]));
  }
  for (int j = 0; j < q; ++j) {
    CompensatedSum<double> s;
    for (int i = 0; i < q; ++i) s.add(m[std::size_t(i) * q + j]);
    r = std::max(r, std::abs(s.value() - cols[std::size_t(j)]));
  }
  return r;
}

/// One row pass and one column pass.
inline void sinkhorn_sweep(std::vector<double>& e, int q, std::span<const double> rows,
                           std::span<const double> cols) {
  for (int i = 0; i < q; ++i) {
    CompensatedSum<double> s;
    for (int j = 0; j < q; ++j) s.add(e[std::size_t(i) * q + j]);
    const double sum = s.value();
    if (sum <= 0.0) {
      if (rows[std::size_t(i)] > 0.0) throw DomainError("sinkhorn: zero row with positive target");
      continue;
    }
    const double f = rows[std::size_t(i)] / sum;
    for (int j = 0; j < q; ++j) e[std::size_t(i) * q + j] *= f;
  }
  for (int j = 0; j < q; ++j) {
    CompensatedSum<double> s;
    for (int i = 0; i < q; ++i) s.add(e[std::size_t(i) * q + j]);
    const double sum = s.value();
    if (sum <= 0.0) {
      if (cols[std::size_t(j)] > 0.0) throw DomainError("sinkhorn: zero column with positive target");
      continue;
    }
    const double f = cols[std::size_t(j)] / sum;
    for (int i = 0; i < q; ++i) e[std::size_t(i) * q + j] *= f;
  }
}

/// Damped Newton step on the scaling potential
///   phi(x, y) = sum_ij K_ij e^{x_i + y_j} - <rows, x> - <cols, y>
/// at x = y = 0, with y_{q-1} pinned. Sweeps minimize the same potential one
/// block at a time and crawl when K is close to a permutation pattern.
/// Returns the rescaled matrix, or nullopt when the step makes no progress.
inline std::optional<std::vector<double>> newton_balance(const std::vector<double>& k, int q,
                                                         std::span<const double> rows,
                                                         std::span<const double> cols) {
  const int dim = 2 * q - 1;
  Eigen::VectorXd grad(dim);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < q; ++i) {
    double rs = 0.0;
    for (int j = 0; j < q; ++j) rs += k[std::size_t(i) * q + j];
    grad(i) = rs - rows[std::size_t(i)];
    hess(i, i) = rs;
  }
  for (int j = 0; j + 1 < q; ++j) {
    double cs = 0.0;
    for (int i = 0; i < q; ++i) {
      const double v = k[std::size_t(i) * q + j];
      cs += v;
      hess(i, q + j) = hess(q + j, i) = v;
    }
    grad(q + j) = cs - cols[std::size_t(j)];
    hess(q + j, q + j) = cs;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(hess);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd step = -llt.solve(grad);
  if (!step.allFinite()) return std::nullopt;

  auto potential = [&](double t, std::vector<double>* out) {
    CompensatedSum<double> acc;
    for (int i = 0; i < q; ++i) {
      acc.add(-rows[std::size_t(i)] * t * step(i));
      for (int j = 0; j < q; ++j) {
        const double y = j + 1 < q ? step(q + j) : 0.0;
        const double v = k[std::size_t(i) * q + j] * std::exp(t * (step(i) + y));
        acc.add(v);
        if (out) (*out)[std::size_t(i) * q + j] = v;
      }
    }
    for (int j = 0; j + 1 < q; ++j) acc.add(-cols[std::size_t(j)] * t * step(q + j));
    return acc.value();
  };
  const double base = potential(0.0, nullptr);
  const double slope = grad.dot(step);
  if (!(slope < 0.0)) return std::nullopt;
  std::vector<double> out(k.size());
  for (double t = 1.0; t > 1e-10; t *= 0.5) {
    const double v = potential(t, &out);
    if (std::isfinite(v) && v <= base + 1e-4 * t * slope) return out;
  }
  return std::nullopt;
}

}  // namespace detail

/// Scales a nonnegative q x q matrix to the given marginals. Plain
/// row/column sweeps run first; if they have not converged after a few
/// dozen passes, damped Newton steps on the dual potential take over
/// (falling back to a sweep whenever a Newton step stalls). Every sweep or
/// Newton step counts as one iteration. The residual is the largest row or
/// column deviation.
inline SinkhornResult sinkhorn(std::vector<double> e, int q, std::span<const double> rows,
                               std::span<const double> cols, int max_iterations,
                               double tol) {
  for (double x : e)
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("sinkhorn: entries must be finite and >= 0");

  constexpr int kPlainSweeps = 50;
  SinkhornResult out;
  out.residual = detail::marginal_residual(e, q, rows, cols);
  if (out.residual <= tol) {
    out.entries = std::move(e);
    out.converged = true;
    return out;
  }
  for (int it = 1; it <= max_iterations; ++it) {
    bool swept = true;
    if (it > kPlainSweeps) {
      if (auto next = detail::newton_balance(e, q, rows, cols)) {
        e = std::move(*next);
        swept = false;
      }
    }
    if (swept) detail::sinkhorn_sweep(e, q, rows, cols);
    out.iterations = it;
    out.residual = detail::marginal_residual(e, q, rows, cols);
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
  }
  out.entries = std::move(e);
  return out;
}

/// Sinkhorn projection onto D. A matrix already in D (within tol) is
/// returned unchanged. Throws ConvergenceError carrying the final residual.
inline OverlapMatrix project_to_D(const OverlapMatrix& a, int iterations = 100000,
                                  double tol = 1e-12) {
  const int q = a.q();
  const std::vector<double> targets(std::size_t(q), 1.0 / q);
  auto r = sinkhorn(std::vector<double>(a.entries().begin(), a.entries().end()), q, targets,
                    targets, iterations, tol);
  if (!r.converged)
    throw ConvergenceError("Sinkhorn projection did not converge, residual " +
                               format_double(r.residual),
                           r.residual);
  return OverlapMatrix(q, std::move(r.entries));
}

/// Rescales each row to sum 1/q.
inline OverlapMatrix project_to_S(const OverlapMatrix& a) {
  const int q = a.q();
  std::vector<double> e(a.entries().begin(), a.entries().end());
  for (int i = 0; i < q; ++i) {
    const double s = a.row_sum(i);
    if (s <= 0.0) throw DomainError("project_to_S: zero row");
    for (int j = 0; j < q; ++j) e[std::size_t(i) * q + j] /= s * q;
  }
  return OverlapMatrix(q, std::move(e));
}

/// Entrywise Exp(1) matrix, projected onto D.
inline OverlapMatrix random_point_in_D(int q, Rng& rng) {
  if (q < 1) throw ParameterError("q must be >= 1");
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> e(std::size_t(q) * q);
  for (double& x : e) x = expo(rng);
  CompensatedSum<double> total;
  for (double x : e) total.add(x);
  for (double& x : e) x /= total.value();
  return project_to_D(OverlapMatrix(q, std::move(e)));
}

/// Entrywise Exp(1) matrix with rows rescaled to 1/q.
inline OverlapMatrix random_point_in_S(int q, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> e(std::size_t(q) * q);
  for (double& x : e) x = expo(rng);
  for (int i = 0; i < q; ++i) {
    CompensatedSum<double> s;
    for (int j = 0; j < q; ++j) s.add(e[std::size_t(i) * q + j]);
    for (int j = 0; j < q; ++j) e[std::size_t(i) * q + j] /= s.value() * q;
  }
  return OverlapMatrix(q, std::move(e));
}

/// Plants s entries at positions (i, π(i)) of a random partial permutation,
/// each drawn in [hi, 1/q] with hi the top of the separability window, fills
/// the remaining mass by a Sinkhorn-scaled random matrix on the other
/// positions, and rejects results that are not in D_s.
/// Largest s for which the sampler can produce s-stable tame points. With a
/// clamped window the planted entries are exactly 1/q, and the leftover
/// (q-s) x (q-s) block needs q - s >= 2 to keep its entries below const/q.
inline int max_tame_stability(int q, int k) {
  return separability_window(q, k).clamped ? q - 2 : q - 1;
}

inline OverlapMatrix random_point_in_tame(int q, int k, int s, Rng& rng,
                                          int max_attempts = 1000) {
  if (s < 0 || s >= q) throw ParameterError("tame sampling needs 0 <= s < q");
  if (s > max_tame_stability(q, k))
    throw ParameterError("no separable " + std::to_string(s) + "-stable point exists at q=" +
                         std::to_string(q) + " with a clamped window");
  const auto w = separability_window(q, k);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<int> perm_rows(static_cast<std::size_t>(q)), perm_cols(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) perm_rows[std::size_t(i)] = perm_cols[std::size_t(i)] = i;
    std::shuffle(perm_rows.begin(), perm_rows.end(), rng);
    std::shuffle(perm_cols.begin(), perm_cols.end(), rng);

    std::vector<double> planted(std::size_t(q) * q, 0.0);
    std::vector<char> is_planted(std::size_t(q) * q, 0);
    std::vector<double> row_t(std::size_t(q), 1.0 / q), col_t(std::size_t(q), 1.0 / q);
    for (int t = 0; t < s; ++t) {
      const int i = perm_rows[std::size_t(t)], j = perm_cols[std::size_t(t)];
      const double v = w.hi + (1.0 / q - w.hi) * unit(rng);
      planted[std::size_t(i) * q + j] = v;
      is_planted[std::size_t(i) * q + j] = 1;
      row_t[std::size_t(i)] = std::max(0.0, 1.0 / q - v);
      col_t[std::size_t(j)] = std::max(0.0, 1.0 / q - v);
    }
    std::vector<double> rest(std::size_t(q) * q, 0.0);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        const std::size_t t = std::size_t(i) * q + j;
        if (!is_planted[t] && row_t[std::size_t(i)] > 0.0 && col_t[std::size_t(j)] > 0.0)
          rest[t] = expo(rng);
      }
    SinkhornResult r;
    try {
      r = sinkhorn(std::move(rest), q, row_t, col_t, 10000, 1e-13);
    } catch (const DomainError&) {
      continue;
    }
    if (!r.converged) continue;
    std::vector<double> e(std::size_t(q) * q);
    for (std::size_t t = 0; t < e.size(); ++t) e[t] = planted[t] + r.entries[t];
    OverlapMatrix a(q, std::move(e));
    if (domain_contains(DomainTag::Ds(s), a, k)) return a;
  }
  throw ConvergenceError("could not sample a tame point with s=" + std::to_string(s) +
                             " at q=" + std::to_string(q),
                         0.0);
}

}  // namespace hypercolor
