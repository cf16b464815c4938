#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercolor/errors.hpp"
#include "hypercolor/numeric.hpp"

namespace hypercolor {

/// q x q nonnegative matrix with total mass 1, stored row-major.
///
/// Entry (i, j) is the fraction of vertices colored i by the first coloring
/// and j by the second. Colors are 0-based in this API.
class OverlapMatrix {
 public:
  /// The 1 x 1 matrix (1).
  OverlapMatrix() : q_(1), entries_{1.0} {}

  /// Validates nonnegativity and total mass within `tol`.
  OverlapMatrix(int q, std::vector<double> entries, double tol = 1e-9)
      : q_(q), entries_(std::move(entries)) {
    if (q < 1) throw ParameterError("overlap matrix dimension must be >= 1");
    if (entries_.size() != static_cast<std::size_t>(q) * q)
      throw ParameterError("overlap matrix needs q*q entries");
    CompensatedSum<double> total;
    for (double x : entries_) {
      if (!(x >= 0.0) || !std::isfinite(x))
        throw DomainError("overlap matrix entry must be finite and >= 0, got " +
                          std::to_string(x));
      total.add(x);
    }
    if (std::abs(total.value() - 1.0) > tol)
      throw DomainError("overlap matrix entries must sum to 1, got " +
                        std::to_string(total.value()));
  }

  int q() const noexcept { return q_; }
  double operator()(int i, int j) const { return entries_[index(i, j)]; }
  std::span<const double> entries() const noexcept { return entries_; }
  std::span<const double> row(int i) const {
    return std::span<const double>(entries_).subspan(
        static_cast<std::size_t>(i) * q_, q_);
  }

  double row_sum(int i) const {
    CompensatedSum<double> s;
    for (double x : row(i)) s.add(x);
    return s.value();
  }
  double col_sum(int j) const {
    CompensatedSum<double> s;
    for (int i = 0; i < q_; ++i) s.add((*this)(i, j));
    return s.value();
  }

  OverlapMatrix transposed() const {
    std::vector<double> t(entries_.size());
    for (int i = 0; i < q_; ++i)
      for (int j = 0; j < q_; ++j) t[index(j, i)] = (*this)(i, j);
    return OverlapMatrix(q_, std::move(t));
  }

  /// Returns a copy with entries replaced; total mass is re-validated.
  OverlapMatrix with_entries(std::vector<double> e, double tol = 1e-9) const {
    return OverlapMatrix(q_, std::move(e), tol);
  }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * q_ + j;
  }

  bool operator==(const OverlapMatrix&) const = default;
  /// Lexicographic on (q, entries); used for reproducible tie-breaking.
  std::weak_ordering operator<=>(const OverlapMatrix& o) const {
    if (q_ != o.q_) return q_ <=> o.q_;
    return std::lexicographical_compare_three_way(
        entries_.begin(), entries_.end(), o.entries_.begin(), o.entries_.end(),
        [](double a, double b) { return std::weak_order(a, b); });
  }

 private:
  int q_;
  std::vector<double> entries_;
};

inline double max_abs_diff(const OverlapMatrix& a, const OverlapMatrix& b) {
  double d = 0.0;
  for (std::size_t t = 0; t < a.entries().size(); ++t)
    d = std::max(d, std::abs(a.entries()[t] - b.entries()[t]));
  return d;
}

// Serialization. Doubles are written in shortest round-trip form, so a
// write/read cycle reproduces every bit.

inline nlohmann::json to_json(const OverlapMatrix& a) {
  return {{"q", a.q()},
          {"entries", std::vector<double>(a.entries().begin(),
                                          a.entries().end())}};
}

inline OverlapMatrix overlap_from_json(const nlohmann::json& j,
                                       double tol = 1e-9) {
  return OverlapMatrix(j.at("q").get<int>(),
                       j.at("entries").get<std::vector<double>>(), tol);
}

inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw DomainError("cannot format double");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DomainError("cannot parse number '" + std::string(s) + "'");
  return x;
}

/// One row per line, comma separated.
inline std::string to_csv(const OverlapMatrix& a) {
  std::string out;
  for (int i = 0; i < a.q(); ++i) {
    for (int j = 0; j < a.q(); ++j) {
      if (j) out += ',';
      out += format_double(a(i, j));
    }
    out += '\n';
  }
  return out;
}

inline OverlapMatrix overlap_from_csv(std::string_view text, double tol = 1e-9) {
  std::vector<double> entries;
  int rows = 0;
  std::size_t cols = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t count = 0, start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      entries.push_back(parse_double(std::string_view(line).substr(
          start, comma == std::string::npos ? std::string::npos : comma - start)));
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw DomainError("ragged CSV matrix");
    ++rows;
  }
  if (static_cast<std::size_t>(rows) != cols)
    throw DomainError("CSV matrix must be square");
  return OverlapMatrix(rows, std::move(entries), tol);
}

}  // namespace hypercolor
