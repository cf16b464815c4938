#pragma once

// Maximization of the rate over D, S, D_s and D_tame by multistart entropic
// mirror ascent with row-flattening moves, plus the closed-form dominance
// tables for the s-stable candidates and the condensation witness.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercolor/errors.hpp"
#include "hypercolor/moments.hpp"
#include "hypercolor/numeric.hpp"
#include "hypercolor/overlap_matrix.hpp"
#include "hypercolor/parallel.hpp"
#include "hypercolor/polytope.hpp"

namespace hypercolor {

struct MaximizerConfig {
  int starts = 200;
  int max_steps = 10000;
  double grad_tol = 1e-10;
  /// A start that stops because no step size increases F any further is
  /// still counted as converged when its residual is below this level.
  double stall_tol = 1e-6;
  double initial_step = 0.1;
  double min_step = 1e-18;
  double membership_tol = 1e-9;
  bool flattening = true;
  /// Keep the F value after every accepted step in StartOutcome::trace.
  bool record_trace = false;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct StartOutcome {
  OverlapMatrix point;
  double value = 0;
  double residual = 0;
  int steps = 0;
  bool converged = false;
  bool stalled = false;
  int restarts = 0;
  int flattening_moves = 0;
  int stability = 0;
  double distance_to_flat = 0;
  std::vector<double> trace;
};

struct PerSResult {
  int s = 0;
  int starts = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  double bound = 0;  ///< F(ā(s)) + q^{0.999-k}
};

struct MaximizationReport {
  DomainTag domain;
  OverlapMatrix best_point;
  double best_value = 0;
  double flat_value = 0;
  double gap = 0;
  int starts = 0;
  int converged_starts = 0;
  int stalled_starts = 0;
  int restarts = 0;
  int flattening_moves = 0;
  int starts_near_flat = 0;  ///< final point within 1e-6 (max-norm) of ā
  std::vector<PerSResult> per_s_results;
  std::vector<StartOutcome> outcomes;
  Warnings warnings;
};

// ---------------------------------------------------------------------------
// Local quantities
// ---------------------------------------------------------------------------

/// (∂/∂a_ix - ∂/∂a_iy) F(a)
///   = ln(a_iy / a_ix) + c k (a_ix^{k-1} - a_iy^{k-1}) / (1 - 2q^{1-k} + ||a||_k^k).
inline double directional_derivative(const OverlapMatrix& a, int i, int x, int y,
                                      const ModelParams& p) {
  const int q = a.q();
  if (i < 0 || i >= q || x < 0 || x >= q || y < 0 || y >= q)
    throw ParameterError("directional_derivative: index out of range");
  const double ax = a(i, x), ay = a(i, y);
  if (!(ax > 0.0) || !(ay > 0.0))
    throw DomainError("directional_derivative: zero entry at row " + std::to_string(i));
  const double denom = 1.0 + (norm_k_pow(a, p.k) - 2.0 * std::pow(double(q), 1 - p.k));
  return std::log(ay / ax) +
         p.c * p.k * (std::pow(ax, p.k - 1) - std::pow(ay, p.k - 1)) / denom;
}

namespace detail {

inline double rate_raw(std::span<const double> e, int q, const ModelParams& p) {
  return entropy<double>(e) + energy_from_norm(norm_k_pow<double>(e, p.k), q, p.k, p.c);
}

/// ∇F without the constant -1 of the entropy part, which every domain
/// projects out. Entries are clipped at 1e-300 before the log.
inline std::vector<double> rate_gradient(std::span<const double> e, int q,
                                         const ModelParams& p) {
  const double denom = 1.0 + (norm_k_pow<double>(e, p.k) - 2.0 * std::pow(double(q), 1 - p.k));
  std::vector<double> g(e.size());
  for (std::size_t t = 0; t < e.size(); ++t)
    g[t] = -std::log(std::max(e[t], 1e-300)) + p.c * p.k * std::pow(e[t], p.k - 1) / denom;
  return g;
}

/// Largest mass-weighted deviation of the gradient from the space of row
/// (and, for D-type domains, column) potentials, scaled by q^2. Zero exactly
/// at interior stationary points.
inline double stationarity_residual(std::span<const double> e, std::span<const double> g,
                                    int q, bool columns) {
  std::vector<double> u(std::size_t(q), 0.0), v(std::size_t(q), 0.0);
  const int sweeps = columns ? 200 : 1;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 0; i < q; ++i) {
      double num = 0.0, den = 0.0;
      for (int j = 0; j < q; ++j) {
        const std::size_t t = std::size_t(i) * q + j;
        num += e[t] * (g[t] - v[std::size_t(j)]);
        den += e[t];
      }
      const double nu = den > 0 ? num / den : 0.0;
      change = std::max(change, std::abs(nu - u[std::size_t(i)]));
      u[std::size_t(i)] = nu;
    }
    if (columns) {
      for (int j = 0; j < q; ++j) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < q; ++i) {
          const std::size_t t = std::size_t(i) * q + j;
          num += e[t] * (g[t] - u[std::size_t(i)]);
          den += e[t];
        }
        const double nv = den > 0 ? num / den : 0.0;
        change = std::max(change, std::abs(nv - v[std::size_t(j)]));
        v[std::size_t(j)] = nv;
      }
    }
    if (change < 1e-15) break;
  }
  double r = 0.0;
  const double scale = double(q) * q;
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const std::size_t t = std::size_t(i) * q + j;
      r = std::max(r, scale * e[t] * std::abs(g[t] - u[std::size_t(i)] - v[std::size_t(j)]));
    }
  return r;
}

inline bool uses_columns(const DomainTag& d) { return d.kind != DomainTag::Kind::S; }

/// Mirror step a ⊙ exp(η g) followed by the domain's projection. Returns
/// nullopt when the projection fails.
inline std::optional<std::vector<double>> mirror_step(std::span<const double> e,
                                                      std::span<const double> g, double eta,
                                                      int q, const DomainTag& domain) {
  const double top = *std::max_element(g.begin(), g.end());
  std::vector<double> next(e.size());
  for (std::size_t t = 0; t < e.size(); ++t) next[t] = e[t] * std::exp(eta * (g[t] - top));
  const std::vector<double> targets(std::size_t(q), 1.0 / q);
  if (!uses_columns(domain)) {
    for (int i = 0; i < q; ++i) {
      CompensatedSum<double> s;
      for (int j = 0; j < q; ++j) s.add(next[std::size_t(i) * q + j]);
      if (!(s.value() > 0.0)) return std::nullopt;
      for (int j = 0; j < q; ++j) next[std::size_t(i) * q + j] /= s.value() * q;
    }
    return next;
  }
  try {
    auto r = sinkhorn(std::move(next), q, targets, targets, 2000, 1e-14);
    if (!r.converged) return std::nullopt;
    return std::move(r.entries);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

inline bool entries_in_domain(const std::vector<double>& e, int q, const DomainTag& domain,
                              int k, double tol) {
  try {
    return domain_contains(domain, OverlapMatrix(q, e, tol), k, tol);
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace detail

/// One greedy sweep over the rows: for each row, the largest prefix J of
/// its entries sorted ascending (μ = min(1, ln|J| / ln q)) that satisfies
/// the averaging condition is flattened. In S the move is applied directly
/// and must not decrease F; in D-type domains the result is projected back
/// and kept only if F increases and membership holds. Returns the number of
/// applied moves.
inline int flattening_pass(OverlapMatrix& a, const ModelParams& p, const DomainTag& domain,
                           double tol, Warnings* warnings = nullptr) {
  const int q = a.q();
  const double lq = std::log(double(q));
  if (q < 3) return 0;
  const double mu_min = 3.0 * std::log(lq) / lq;
  if (mu_min > 1.0) return 0;
  int moves = 0;
  for (int i = 0; i < q; ++i) {
    std::vector<int> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(i, x) < a(i, y); });
    for (int m = q; m >= 1; --m) {
      const double mu = std::min(1.0, std::log(double(m)) / lq);
      if (mu < mu_min) break;
      std::vector<int> cols(order.begin(), order.begin() + m);
      if (!averaging_condition(a, i, cols, mu, p)) continue;
      bool constant = true;
      for (int j : cols) constant = constant && a(i, j) == a(i, cols.front());
      if (constant) break;
      const auto flat = flatten(a, i, cols);
      const double before = rate(a, p).rate;
      const double after = rate(flat, p).rate;
      if (after < before - 1e-12) {
        warn(warnings, "flattening_decreased_rate",
             "flattening lowered F by " + format_double(before - after));
        break;
      }
      if (!detail::uses_columns(domain)) {
        a = flat;
        ++moves;
      } else {
        try {
          auto projected = project_to_D(flat, 2000, 1e-14);
          if (rate(projected, p).rate > before &&
              domain_contains(domain, projected, p.k, tol)) {
            a = std::move(projected);
            ++moves;
          }
        } catch (const std::exception&) {
        }
      }
      break;
    }
  }
  return moves;
}

namespace detail {

inline Rng start_rng(std::uint64_t seed, std::size_t start) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(start),
                    std::uint32_t(std::uint64_t(start) >> 32)};
  return Rng(seq);
}

inline OverlapMatrix start_point(const DomainTag& domain, int q, int k, std::size_t start,
                                 Rng& rng) {
  switch (domain.kind) {
    case DomainTag::Kind::D: return random_point_in_D(q, rng);
    case DomainTag::Kind::S: return random_point_in_S(q, rng);
    case DomainTag::Kind::Ds: return random_point_in_tame(q, k, domain.s, rng);
    case DomainTag::Kind::Tame: {
      const int top = max_tame_stability(q, k);
      return random_point_in_tame(q, k, int(start % std::size_t(top + 1)), rng);
    }
  }
  throw ParameterError("unknown domain");
}

}  // namespace detail

/// One ascent from a start point. Every accepted step strictly increases F
/// and keeps domain membership; otherwise the step size is halved, and the
/// ascent stops once no step size down to min_step helps.
inline StartOutcome ascend(OverlapMatrix a, const DomainTag& domain, const ModelParams& p,
                           const MaximizerConfig& cfg, Warnings* warnings = nullptr) {
  const int q = a.q();
  StartOutcome out;
  std::vector<double> e(a.entries().begin(), a.entries().end());
  double value = detail::rate_raw(e, q, p);
  if (cfg.record_trace) out.trace.push_back(value);
  for (int step = 0; step < cfg.max_steps; ++step) {
    if (cfg.flattening && step % 50 == 0) {
      OverlapMatrix cur(q, e, cfg.membership_tol);
      const int moves = flattening_pass(cur, p, domain, cfg.membership_tol, warnings);
      if (moves > 0) {
        const double v = rate(cur, p).rate;
        if (!(v >= value - 1e-12))
          throw std::logic_error("flattening pass decreased the rate");
        e.assign(cur.entries().begin(), cur.entries().end());
        value = v;
        out.flattening_moves += moves;
        if (cfg.record_trace) out.trace.push_back(value);
      }
    }
    const auto g = detail::rate_gradient(e, q, p);
    out.residual = detail::stationarity_residual(e, g, q, detail::uses_columns(domain));
    if (out.residual < cfg.grad_tol) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (double eta = cfg.initial_step; eta >= cfg.min_step; eta *= 0.5) {
      auto cand = detail::mirror_step(e, g, eta, q, domain);
      if (!cand) continue;
      double v;
      try {
        v = detail::rate_raw(*cand, q, p);
      } catch (const DomainError&) {
        continue;
      }
      if (!(v > value)) continue;
      if (domain.kind == DomainTag::Kind::Ds || domain.kind == DomainTag::Kind::Tame) {
        if (!detail::entries_in_domain(*cand, q, domain, p.k, cfg.membership_tol)) continue;
      }
      e = std::move(*cand);
      value = v;
      accepted = true;
      if (cfg.record_trace) out.trace.push_back(value);
      break;
    }
    out.steps = step + 1;
    if (!accepted) {
      out.stalled = true;
      out.converged = out.residual <= cfg.stall_tol;
      break;
    }
  }
  out.point = OverlapMatrix(q, std::move(e), cfg.membership_tol);
  out.value = value;
  out.stability = stability_index(out.point, p.k);
  out.distance_to_flat = max_abs_diff(out.point, flat_overlap(q));
  return out;
}

inline MaximizationReport maximize(const DomainTag& domain, const ModelParams& p,
                                   const MaximizerConfig& cfg) {
  p.validate();
  if (cfg.starts < 1) throw ParameterError("starts must be >= 1");
  if (domain.kind == DomainTag::Kind::Ds &&
      (domain.s < 0 || domain.s > max_tame_stability(p.q, p.k)))
    throw ParameterError("D_" + std::to_string(domain.s) + " is empty at q=" +
                         std::to_string(p.q));
  MaximizationReport rep;
  rep.domain = domain;
  rep.starts = cfg.starts;
  rep.flat_value = rate(flat_overlap(p.q), p).rate;
  if (domain.kind == DomainTag::Kind::Ds || domain.kind == DomainTag::Kind::Tame)
    separability_window(p.q, p.k, &rep.warnings);

  struct Task {
    StartOutcome outcome;
    Warnings warnings;
  };
  auto tasks = parallel_map(std::size_t(cfg.starts), cfg.threads, [&](std::size_t start) {
    Task task;
    Rng rng = detail::start_rng(cfg.seed, start);
    int restarts = 0;
    while (true) {
      try {
        const auto a0 = detail::start_point(domain, p.q, p.k, start, rng);
        if (!domain_contains(domain, a0, p.k, cfg.membership_tol)) {
          if (++restarts > 20) throw ConvergenceError("no valid start point", 0.0);
          continue;
        }
        task.outcome = ascend(a0, domain, p, cfg, &task.warnings);
        if (!domain_contains(domain, task.outcome.point, p.k, cfg.membership_tol)) {
          if (++restarts > 20) throw ConvergenceError("ascent left the domain", 0.0);
          continue;
        }
        break;
      } catch (const ConvergenceError&) {
        if (++restarts > 20) throw;
      }
    }
    task.outcome.restarts = restarts;
    return task;
  });

  bool have_best = false;
  for (auto& task : tasks) {
    for (auto& w : task.warnings) warn(&rep.warnings, w.code, w.message);
    const auto& o = task.outcome;
    rep.converged_starts += o.converged ? 1 : 0;
    rep.stalled_starts += o.stalled ? 1 : 0;
    rep.restarts += o.restarts;
    rep.flattening_moves += o.flattening_moves;
    rep.starts_near_flat += o.distance_to_flat <= 1e-6 ? 1 : 0;
    if (!have_best || o.value > rep.best_value ||
        (o.value == rep.best_value && o.point < rep.best_point)) {
      rep.best_value = o.value;
      rep.best_point = o.point;
      have_best = true;
    }
    rep.outcomes.push_back(o);
  }
  rep.gap = rep.best_value - rep.flat_value;
  if (rep.starts - rep.converged_starts > 0)
    warn(&rep.warnings, "nonconvergent_starts",
         std::to_string(rep.starts - rep.converged_starts) + " of " +
             std::to_string(rep.starts) + " starts did not reach the residual tolerance");

  if (domain.kind == DomainTag::Kind::Ds || domain.kind == DomainTag::Kind::Tame) {
    const double ln_q = std::log(double(p.q));
    const double slack = std::exp((0.999 - p.k) * ln_q);
    for (int s = 0; s <= max_tame_stability(p.q, p.k); ++s) {
      PerSResult r;
      r.s = s;
      r.bound = (s == 0 ? logdomain::flat_rate(ln_q, p.k, p.c)
                        : logdomain::s_stable_rate(ln_q, s, p.k, p.c)) +
                slack;
      for (const auto& o : rep.outcomes)
        if (o.stability == s) {
          ++r.starts;
          r.best_value = std::max(r.best_value, o.value);
        }
      if (r.starts > 0) rep.per_s_results.push_back(r);
    }
  }
  return rep;
}

inline nlohmann::json to_json(const MaximizationReport& r) {
  nlohmann::json per_s = nlohmann::json::array();
  for (const auto& s : r.per_s_results)
    per_s.push_back({{"s", s.s},
                     {"starts", s.starts},
                     {"best_value", s.best_value},
                     {"bound", s.bound},
                     {"below_bound", s.best_value < s.bound}});
  return {{"domain", r.domain.name()},
          {"best_point", to_json(r.best_point)},
          {"best_value", r.best_value},
          {"flat_value", r.flat_value},
          {"gap", r.gap},
          {"starts", r.starts},
          {"converged_starts", r.converged_starts},
          {"stalled_starts", r.stalled_starts},
          {"restarts", r.restarts},
          {"flattening_moves", r.flattening_moves},
          {"starts_near_flat", r.starts_near_flat},
          {"per_s_results", per_s}};
}

// ---------------------------------------------------------------------------
// s-stable dominance table
// ---------------------------------------------------------------------------

struct GapRow {
  int s = 0;
  double rate_s = 0;     ///< F(ā(s))
  double rate_flat = 0;  ///< F(ā)
  double margin = 0;     ///< F(ā) - F(ā(s)) - q^{0.999-k}
  double margin_check = 0;  ///< same, 50-digit evaluation over entry classes
  bool positive = false;
  /// ā(s) has exactly s entries above the stability threshold. False at
  /// s = q - 1, where ā(q-1) = q^{-1} id.
  bool stability_index_matches = false;
};

/// Rows s = 1 .. q-1. The primary column uses the log-domain closed forms;
/// margin_check re-evaluates entropy and norm from the entry classes of the
/// matrices in 50-digit floating point.
inline std::vector<GapRow> s_stable_gap_table(const ModelParams& p) {
  p.validate();
  using Big = boost::multiprecision::cpp_bin_float_50;
  const int q = p.q, k = p.k;
  const double ln_q = std::log(double(q));
  const double slack = std::exp((0.999 - k) * ln_q);
  const double flat = logdomain::flat_rate(ln_q, k, p.c);
  const Big c_big(p.c);
  const Big flat_big = rate_of_classes<Big>(flat_classes<Big>(q), q, k, c_big).rate;
  using boost::multiprecision::pow;
  const Big slack_big = pow(Big(q), Big(0.999) - Big(k));
  const double thr = stability_threshold(q, k);
  std::vector<GapRow> rows;
  for (int s = 1; s < q; ++s) {
    GapRow r;
    r.s = s;
    r.rate_s = logdomain::s_stable_rate(ln_q, s, k, p.c);
    r.rate_flat = flat;
    r.margin = flat - r.rate_s - slack;
    const Big rs = rate_of_classes<Big>(s_stable_classes<Big>(q, s), q, k, c_big).rate;
    r.margin_check = static_cast<double>(flat_big - rs - slack_big);
    r.positive = r.margin > 0;
    const bool block_above = 1.0 / (double(q) * (q - s)) > thr;
    const int index = (1.0 / q > thr ? s : 0) + (block_above ? (q - s) * (q - s) : 0);
    r.stability_index_matches = index == s;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Condensation witness
// ---------------------------------------------------------------------------

struct WitnessRow {
  double gamma = 0;
  double c = 0;
  double difference = 0;        ///< F(a_stable) - F(ā), entry classes in double
  double difference_check = 0;  ///< second path (matrix or 50-digit classes)
  bool positive = false;
};

struct WitnessReport {
  int q = 0, k = 0;
  std::vector<WitnessRow> rows;
  std::optional<double> first_positive_gamma;
};

/// F(a_stable) - F(ā) at c = (q^{k-1} - 1/2) ln q - γ for each γ. The check
/// column evaluates the materialized matrices through rate() when q <= 2000
/// and the 50-digit entry classes otherwise.
inline WitnessReport condensation_witness(int q, int k, std::span<const double> gammas) {
  if (q < 3 || k < 3) throw ParameterError("condensation witness needs q >= 3, k >= 3");
  using Big = boost::multiprecision::cpp_bin_float_50;
  WitnessReport rep;
  rep.q = q;
  rep.k = k;
  const double upper = threshold_bounds(q, k).upper;
  for (double gamma : gammas) {
    if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
    if (gamma > upper) throw ParameterError("gamma exceeds the upper bound; c would be negative");
    WitnessRow r;
    r.gamma = gamma;
    r.c = upper - gamma;
    const auto st = stable_classes<double>(q, k);
    const auto fl = flat_classes<double>(q);
    r.difference = rate_of_classes<double>(st, q, k, r.c).rate -
                   rate_of_classes<double>(fl, q, k, r.c).rate;
    if (q <= 2000) {
      ModelParams p;
      p.q = q;
      p.k = k;
      p.c = r.c;
      r.difference_check = rate(stable_overlap(q, k), p).rate - rate(flat_overlap(q), p).rate;
    } else {
      const Big cb(r.c);
      r.difference_check = static_cast<double>(
          rate_of_classes<Big>(stable_classes<Big>(q, k), q, k, cb).rate -
          rate_of_classes<Big>(flat_classes<Big>(q), q, k, cb).rate);
    }
    r.positive = r.difference > 0;
    if (r.positive && !rep.first_positive_gamma) rep.first_positive_gamma = gamma;
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace hypercolor
