#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "hypercolor/errors.hpp"

namespace hypercolor {

/// Default tolerances. Closed-form identities are checked at 1e-12 relative,
/// finite-difference comparisons at 1e-4, stochasticity at 1e-9.
struct Tolerances {
  double identity = 1e-12;
  double finite_difference = 1e-4;
  double stochastic = 1e-9;
};

/// x ln x with the convention 0 ln 0 = 0.
template <class Real>
Real xlogx(const Real& x) {
  using std::log;
  if (x == Real(0)) return Real(0);
  return x * log(x);
}

/// w ln m with 0 whenever the weight vanishes (so 0 ln 0 = 0).
inline double xlogy(double w, double m) {
  if (w == 0.0) return 0.0;
  return w * std::log(m);
}

/// Binary entropy h(z) = -z ln z - (1-z) ln(1-z) in nats.
inline double binary_entropy(double z) {
  return -xlogx(z) - xlogx(1.0 - z);
}

inline double log_sum_exp(std::span<const double> terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

/// Exact C(n, k) in 64 bits; throws ParameterError on overflow.
inline std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max())
      throw ParameterError("binomial C(" + std::to_string(n) + "," +
                           std::to_string(k) + ") overflows 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

inline double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

/// Neumaier-compensated running sum.
template <class Real>
class CompensatedSum {
 public:
  void add(const Real& x) {
    using std::abs;
    const Real t = sum_ + x;
    if (abs(sum_) >= abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_{0};
  Real comp_{0};
};

/// |x - y| <= tol * max(1, |x|, |y|).
inline bool close_rel(double x, double y, double tol) {
  const double scale = std::max({1.0, std::abs(x), std::abs(y)});
  return std::abs(x - y) <= tol * scale;
}

}  // namespace hypercolor
