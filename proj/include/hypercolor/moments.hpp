#pragma once

// Scalar machinery of the second moment: entropy, energy and rate of an
// overlap matrix, the first-moment exponent, threshold bounds, the canonical
// overlap matrices, the Hessian at the flat point, and the auxiliary
// inequalities used by the local-variation argument.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "hypercolor/errors.hpp"
#include "hypercolor/numeric.hpp"
#include "hypercolor/overlap_matrix.hpp"

namespace hypercolor {

struct ModelParams {
  int q = 2;
  int k = 2;
  double c = 1.0;
  std::optional<std::int64_t> n;

  /// Throws ParameterError unless q >= 2, k >= 2, c >= 0 and, with n set,
  /// n >= k and m = ceil(c n) <= C(n, k).
  void validate() const {
    if (q < 2) throw ParameterError("q must be >= 2, got " + std::to_string(q));
    if (k < 2) throw ParameterError("k must be >= 2, got " + std::to_string(k));
    if (!(c >= 0.0) || !std::isfinite(c))
      throw ParameterError("c must be finite and >= 0");
    if (n) {
      if (*n < k) throw ParameterError("n must be >= k");
      const double total = std::exp(log_binomial(double(*n), double(k)));
      if (double(m()) > total * (1 + 1e-12))
        throw ParameterError("m = ceil(c n) exceeds C(n, k)");
    }
  }

  /// m = ceil(c n).
  std::int64_t m() const {
    if (!n) throw ParameterError("m requires n");
    return static_cast<std::int64_t>(std::ceil(c * double(*n) - 1e-9));
  }
};

struct ThresholdBounds {
  double classical_lower = 0;  ///< (q^{k-1} - 1) ln q - 1, error term omitted
  double upper = 0;            ///< (q^{k-1} - 1/2) ln q
  double new_lower = 0;        ///< upper - ln 2 - 1.01 ln q / q
  double c_range_lo = 0;       ///< upper - 2
  double c_range_hi = 0;       ///< new_lower
  /// The vanishing error term of the classical bound has no closed form and
  /// is not included in classical_lower.
  bool classical_error_term_omitted = true;
};

struct RateValue {
  double entropy = 0;
  double energy = 0;
  double rate = 0;
  bool log_domain = false;
};

namespace detail {

template <class Real>
Real log1p_any(const Real& x) {
  if constexpr (std::is_floating_point_v<Real>) {
    return std::log1p(x);
  } else {
    using std::log;
    return log(Real(1) + x);
  }
}

template <class Real>
Real pow_int(Real base, int e) {
  Real r(1);
  bool neg = e < 0;
  unsigned u = neg ? unsigned(-e) : unsigned(e);
  while (u) {
    if (u & 1u) r *= base;
    base *= base;
    u >>= 1;
  }
  return neg ? Real(1) / r : r;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entropy, energy, rate
// ---------------------------------------------------------------------------

/// -sum a ln a over the entries, with 0 ln 0 = 0.
template <class Real>
Real entropy(std::span<const Real> entries) {
  CompensatedSum<Real> acc;
  for (const Real& x : entries) {
    if (x < Real(0)) throw DomainError("entropy: negative entry");
    if (x > Real(1)) throw DomainError("entropy: entry above 1");
    acc.add(-xlogx(x));
  }
  return acc.value();
}

inline double entropy(const OverlapMatrix& a) {
  return entropy<double>(a.entries());
}

/// ||a||_k^k = sum a^k.
template <class Real>
Real norm_k_pow(std::span<const Real> entries, int k) {
  CompensatedSum<Real> acc;
  for (const Real& x : entries) acc.add(detail::pow_int(x, k));
  return acc.value();
}

inline double norm_k_pow(const OverlapMatrix& a, int k) {
  return norm_k_pow<double>(a.entries(), k);
}

/// c ln(1 - 2 q^{1-k} + norm), evaluated through log1p of the deviation.
template <class Real>
Real energy_from_norm(const Real& norm, int q, int k, const Real& c) {
  const Real dev = norm - Real(2) * detail::pow_int(Real(q), 1 - k);
  if (!(Real(1) + dev > Real(0))) {
    throw DomainError("energy: nonpositive log argument 1 - 2q^{1-k} + ||a||_k^k = " +
                      std::to_string(static_cast<double>(Real(1) + dev)));
  }
  if (c == Real(0)) return Real(0);
  return c * detail::log1p_any(dev);
}

inline double energy(const OverlapMatrix& a, const ModelParams& p) {
  if (a.q() != p.q) throw ParameterError("energy: matrix dimension differs from q");
  return energy_from_norm(norm_k_pow(a, p.k), p.q, p.k, p.c);
}

inline RateValue rate(const OverlapMatrix& a, const ModelParams& p) {
  RateValue r;
  r.entropy = entropy(a);
  r.energy = energy(a, p);
  r.rate = r.entropy + r.energy;
  return r;
}

/// Entries of a structured matrix grouped as (value, multiplicity).
template <class Real>
struct EntryClass {
  Real value;
  Real multiplicity;
};

/// Entropy, energy and rate of a matrix given as entry classes. Used for
/// the canonical matrices at large q, where materializing q^2 entries is
/// wasteful, and as a high-precision evaluation route.
template <class Real>
struct ClassRate {
  Real entropy;
  Real norm;
  Real energy;
  Real rate;
};

template <class Real>
ClassRate<Real> rate_of_classes(std::span<const EntryClass<Real>> classes, int q,
                                int k, const Real& c) {
  CompensatedSum<Real> h, nrm;
  for (const auto& e : classes) {
    if (e.value < Real(0)) throw DomainError("entry class with negative value");
    h.add(-e.multiplicity * xlogx(e.value));
    nrm.add(e.multiplicity * detail::pow_int(e.value, k));
  }
  ClassRate<Real> r{h.value(), nrm.value(), Real(0), Real(0)};
  r.energy = energy_from_norm(r.norm, q, k, c);
  r.rate = r.entropy + r.energy;
  return r;
}

template <class Real>
std::vector<EntryClass<Real>> flat_classes(int q) {
  const Real qq(q);
  return {{Real(1) / (qq * qq), qq * qq}};
}

template <class Real>
std::vector<EntryClass<Real>> s_stable_classes(int q, int s) {
  if (s < 0 || s >= q) throw ParameterError("s-stable overlap needs 0 <= s < q");
  const Real qq(q), ss(s), rest(q - s);
  return {{Real(1) / qq, ss},
          {Real(1) / (qq * rest), rest * rest},
          {Real(0), qq * qq - ss - rest * rest}};
}

template <class Real>
std::vector<EntryClass<Real>> stable_classes(int q, int k) {
  const Real qq(q);
  const Real qk = detail::pow_int(qq, -k);
  return {{Real(1) / qq - qk, qq}, {qk / (qq - Real(1)), qq * (qq - Real(1))}};
}

// ---------------------------------------------------------------------------
// First moment and thresholds
// ---------------------------------------------------------------------------

/// ln q + c ln(1 - q^{1-k}); the exponential order of the expected number
/// of (balanced) colorings.
inline double first_moment_exponent(const ModelParams& p) {
  p.validate();
  return std::log(double(p.q)) + p.c * std::log1p(-std::pow(double(p.q), 1.0 - p.k));
}

inline ThresholdBounds threshold_bounds(int q, int k) {
  if (q < 3 || k < 3) throw ParameterError("threshold bounds need q >= 3, k >= 3");
  const double lq = std::log(double(q));
  const double qk1 = std::pow(double(q), k - 1);
  ThresholdBounds b;
  b.classical_lower = (qk1 - 1.0) * lq - 1.0;
  b.upper = (qk1 - 0.5) * lq;
  b.new_lower = b.upper - std::numbers::ln2 - 1.01 * lq / q;
  b.c_range_lo = b.upper - 2.0;
  b.c_range_hi = b.new_lower;
  return b;
}

// ---------------------------------------------------------------------------
// Canonical overlap matrices
// ---------------------------------------------------------------------------

/// All entries q^{-2}.
inline OverlapMatrix flat_overlap(int q) {
  if (q < 1) throw ParameterError("q must be >= 1");
  return OverlapMatrix(q, std::vector<double>(std::size_t(q) * q, 1.0 / (double(q) * q)));
}

/// Block diagonal: first s diagonal entries 1/q, lower-right (q-s)x(q-s)
/// block constant (q(q-s))^{-1}, zeros elsewhere.
inline OverlapMatrix s_stable_overlap(int q, int s) {
  if (q < 1 || s < 0 || s >= q)
    throw ParameterError("s-stable overlap needs 0 <= s < q, got s=" + std::to_string(s) +
                         " q=" + std::to_string(q));
  std::vector<double> e(std::size_t(q) * q, 0.0);
  const double block = 1.0 / (double(q) * (q - s));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      if (i == j && i < s) e[std::size_t(i) * q + j] = 1.0 / q;
      if (i >= s && j >= s) e[std::size_t(i) * q + j] = block;
    }
  return OverlapMatrix(q, std::move(e));
}

/// (q^{-1} - q^{-k}) id + q^{-k} (q-1)^{-1} (J - id), J the all-ones matrix.
inline OverlapMatrix stable_overlap(int q, int k) {
  if (q < 2 || k < 2) throw ParameterError("stable overlap needs q >= 2, k >= 2");
  const double qk = std::pow(double(q), -k);
  std::vector<double> e(std::size_t(q) * q, qk / (q - 1));
  for (int i = 0; i < q; ++i) e[std::size_t(i) * q + i] = 1.0 / q - qk;
  return OverlapMatrix(q, std::move(e));
}

/// q^{-1} id.
inline OverlapMatrix scaled_identity(int q) {
  if (q < 1) throw ParameterError("q must be >= 1");
  std::vector<double> e(std::size_t(q) * q, 0.0);
  for (int i = 0; i < q; ++i) e[std::size_t(i) * q + i] = 1.0 / q;
  return OverlapMatrix(q, std::move(e));
}

// ---------------------------------------------------------------------------
// Closed forms, native precision and log domain
// ---------------------------------------------------------------------------

inline double flat_rate_closed(int q, int k, double c) {
  return 2.0 * (std::log(double(q)) + c * std::log1p(-std::pow(double(q), 1.0 - k)));
}

inline double s_stable_entropy_closed(int q, int s) {
  const double qq = q;
  return (s / qq) * std::log(qq) + ((qq - s) / qq) * std::log(qq * (qq - s));
}

inline double s_stable_norm_closed(int q, int s, int k) {
  const double qk = std::pow(double(q), -k);
  return s * qk + qk * std::pow(double(q - s), 2.0 - k);
}

/// Log-domain variants take ln q, so q far beyond the double range of q^k
/// (up to about 10^300) stays representable.
namespace logdomain {

inline double first_moment_exponent(double ln_q, int k, double c) {
  return ln_q + c * std::log1p(-std::exp((1.0 - k) * ln_q));
}

inline double flat_rate(double ln_q, int k, double c) {
  return 2.0 * first_moment_exponent(ln_q, k, c);
}

/// F(ā(s)) with s given as a real count of stable colors, 0 <= s < q.
inline double s_stable_rate(double ln_q, double s, int k, double c) {
  const double frac = s * std::exp(-ln_q);  // s / q
  const double ln_rest = ln_q + std::log1p(-frac);  // ln(q - s)
  const double entropy = frac * ln_q + (1.0 - frac) * (ln_q + ln_rest);
  // -2 q^{1-k} + s q^{-k} + q^{-k} (q-s)^{2-k}
  //   = q^{1-k} (-2 + s/q + (1 - s/q)^{2-k} q^{... }) handled termwise in logs
  const double t_stable = std::exp(std::log(s) - k * ln_q);
  const double t_block = std::exp(-k * ln_q + (2.0 - k) * ln_rest);
  const double dev = -2.0 * std::exp((1.0 - k) * ln_q) + (s > 0 ? t_stable : 0.0) + t_block;
  return entropy + c * std::log1p(dev);
}

}  // namespace logdomain

// ---------------------------------------------------------------------------
// Hessian of F∘L at the flat point
// ---------------------------------------------------------------------------

/// Closed-form Hessian of F∘L at ā, where L drops the (q, q) entry and
/// recovers it from the unit total mass. The Hessian equals λ (id + J) with
/// λ = -q^2 (1 - c / critical_c).
struct FlatHessian {
  int dim = 0;                 ///< q^2 - 1
  std::vector<double> matrix;  ///< dim x dim, row-major
  double lambda = 0;
  double critical_c = 0;       ///< q^{2(k-1)} (1 - q^{1-k})^2 / (k (k-1))
  double top_eigenvalue = 0;
  double bottom_eigenvalue = 0;
  bool negative_definite = false;

  double operator()(int r, int c) const { return matrix[std::size_t(r) * dim + c]; }
};

inline double hessian_critical_c(int q, int k) {
  const double base = 1.0 - std::pow(double(q), 1.0 - k);
  return std::pow(double(q), 2.0 * (k - 1)) * base * base / (double(k) * (k - 1));
}

inline FlatHessian hessian_at_flat(const ModelParams& p) {
  p.validate();
  FlatHessian h;
  const int q = p.q;
  h.dim = q * q - 1;
  h.critical_c = hessian_critical_c(q, p.k);
  h.lambda = -double(q) * q * (1.0 - p.c / h.critical_c);
  h.matrix.assign(std::size_t(h.dim) * h.dim, h.lambda);
  for (int r = 0; r < h.dim; ++r) h.matrix[std::size_t(r) * h.dim + r] = 2.0 * h.lambda;
  // Spectrum of id + J: q^2 once (all-ones direction), 1 with multiplicity q^2 - 2.
  const double big = h.lambda * q * q;
  h.top_eigenvalue = std::max(big, h.lambda);
  h.bottom_eigenvalue = std::min(big, h.lambda);
  h.negative_definite = h.top_eigenvalue < 0.0;
  return h;
}

// ---------------------------------------------------------------------------
// Row entropy bounds
// ---------------------------------------------------------------------------

/// Entropy of the probability vector q·row: -sum (q a_j) ln(q a_j).
inline double scaled_row_entropy(std::span<const double> row) {
  const double q = double(row.size());
  CompensatedSum<double> acc;
  for (double x : row) acc.add(-xlogx(q * x));
  return acc.value();
}

namespace detail {

inline void check_row(std::span<const double> row, double tol) {
  const double q = double(row.size());
  CompensatedSum<double> s;
  for (double x : row) {
    if (x < 0) throw DomainError("row entry must be nonnegative");
    s.add(x);
  }
  if (std::abs(s.value() - 1.0 / q) > tol)
    throw DomainError("row must sum to 1/q, got " + std::to_string(s.value()));
}

inline double mass_on(std::span<const double> row, std::span<const int> cols) {
  CompensatedSum<double> s;
  for (int j : cols) {
    if (j < 0 || j >= int(row.size())) throw ParameterError("column index out of range");
    s.add(double(row.size()) * row[std::size_t(j)]);
  }
  return s.value();
}

}  // namespace detail

/// Upper bound h(r) + r ln|J| + (1-r) ln(q-|J|) on scaled_row_entropy(row),
/// where r is the mass of q·row on the columns J.
inline double entropy_row_bound(std::span<const double> row, std::span<const int> cols,
                                double tol = 1e-9) {
  detail::check_row(row, tol);
  const int q = int(row.size());
  const int size = int(cols.size());
  double r = std::clamp(detail::mass_on(row, cols), 0.0, 1.0);
  if (size == q) r = 1.0;
  return binary_entropy(r) + xlogy(r, size) + xlogy(1.0 - r, q - size);
}

/// Refinement with the first entry pinned: for J ⊆ {1, .., q-1} with
/// 0 < |J| < q-1 and q·row[0] < 1,
/// h(q a_0) + (1 - q a_0) h(r / (1 - q a_0)) + r ln|J| + (1 - r - q a_0) ln(q - |J| - 1).
inline double entropy_row_bound2(std::span<const double> row, std::span<const int> cols,
                                 double tol = 1e-9) {
  detail::check_row(row, tol);
  const int q = int(row.size());
  const int size = int(cols.size());
  if (size <= 0 || size >= q - 1)
    throw ParameterError("pinned row bound needs 0 < |J| < q - 1");
  for (int j : cols)
    if (j == 0) throw ParameterError("pinned row bound: J must exclude the pinned column");
  const double pinned = q * row[0];
  if (!(pinned < 1.0)) throw DomainError("pinned row bound needs q a_0 < 1");
  const double r = std::clamp(detail::mass_on(row, cols), 0.0, 1.0 - pinned);
  return binary_entropy(pinned) + (1.0 - pinned) * binary_entropy(r / (1.0 - pinned)) +
         xlogy(r, size) + xlogy(std::max(0.0, 1.0 - r - pinned), q - size - 1);
}

// ---------------------------------------------------------------------------
// Stability constants and the independent-set window condition
// ---------------------------------------------------------------------------

/// (1.01 / k)^{1 / (k - 1)}.
inline double stability_constant(int k) {
  if (k < 2) throw ParameterError("stability constant needs k >= 2");
  return std::pow(1.01 / k, 1.0 / (k - 1));
}

/// κ = q^{1-k} (ln q)^20. Warns when 1 - κ falls to or below the stability
/// constant, i.e. the separability window is empty at this q.
inline double kappa(int q, int k, Warnings* warnings = nullptr) {
  if (q < 2 || k < 2) throw ParameterError("kappa needs q >= 2, k >= 2");
  const double lq = std::log(double(q));
  const double value = std::exp((1.0 - k) * lq + 20.0 * std::log(lq));
  if (1.0 - value <= stability_constant(k)) {
    warn(warnings, "kappa_out_of_range",
         "kappa(q=" + std::to_string(q) + ",k=" + std::to_string(k) + ") = " +
             format_double(value) + " leaves an empty separability window");
  }
  return value;
}

/// φ(x) = (1 + x) ln(1 + x) - x, the Chernoff rate.
inline double chernoff_phi(double x) {
  if (!(x >= -1.0)) throw DomainError("chernoff_phi needs x >= -1");
  return xlogx(1.0 + x) - x;
}

inline constexpr double kWindowConstant = std::numbers::sqrt2 * std::numbers::e;

/// Independent-set window condition
///   C / q^{(1 - k s^{k-1}) / 2} < 1 - s,   C = √2 e by default,
/// evaluated in the log domain from ln q.
inline bool separable_window_check_log(double ln_q, int k, double s,
                                       std::optional<double> constant = std::nullopt) {
  if (!(s > 0.0 && s < 1.0)) return false;
  const double lhs_log = std::log(constant.value_or(kWindowConstant)) -
                         0.5 * (1.0 - k * std::pow(s, k - 1)) * ln_q;
  return lhs_log < std::log1p(-s);
}

inline bool separable_window_check(double q, int k, double s,
                                   std::optional<double> constant = std::nullopt) {
  if (!(q >= 1.0)) throw ParameterError("separable window check needs q >= 1");
  return separable_window_check_log(std::log(q), k, s, constant);
}

/// Left-hand side of the window condition, ln-domain in and linear out.
inline double separable_window_lhs(double ln_q, int k, double s,
                                   std::optional<double> constant = std::nullopt) {
  return std::exp(std::log(constant.value_or(kWindowConstant)) -
                  0.5 * (1.0 - k * std::pow(s, k - 1)) * ln_q);
}

/// Both endpoints of the window, s_lo = stability_constant(k) and
/// s_hi = 1 - q^{(1.01 - k)/2}, evaluated under the given constant.
struct WindowEndpointReport {
  double s_lo = 0, s_hi = 0;
  bool holds_at_lo = false, holds_at_hi = false;
  /// k s_lo^{k-1} < 1; when false the left side grows with q and the
  /// condition cannot hold at s_lo for any q.
  bool exponent_positive_at_lo = false;
};

inline WindowEndpointReport separable_window_endpoints(double ln_q, int k,
                                                       std::optional<double> constant = std::nullopt) {
  WindowEndpointReport r;
  r.s_lo = stability_constant(k);
  r.s_hi = -std::expm1(0.5 * (1.01 - k) * ln_q);
  r.holds_at_lo = separable_window_check_log(ln_q, k, r.s_lo, constant);
  r.holds_at_hi = separable_window_check_log(ln_q, k, r.s_hi, constant);
  r.exponent_positive_at_lo = k * std::pow(r.s_lo, k - 1) < 1.0;
  return r;
}

}  // namespace hypercolor
