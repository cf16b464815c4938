#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hypercolor/errors.hpp"

namespace hypercolor {

using Rng = std::mt19937_64;

/// Map from n vertices to q colors. Vertices and colors are 0-based in the
/// API; text formats shift both to 1-based.
class Coloring {
 public:
  Coloring() = default;
  Coloring(int q, std::vector<int> colors) : q_(q), colors_(std::move(colors)) {
    if (q < 1) throw ParameterError("coloring needs q >= 1");
    sizes_.assign(std::size_t(q), 0);
    for (int c : colors_) {
      if (c < 0 || c >= q)
        throw ParameterError("color " + std::to_string(c) + " out of range [0," +
                             std::to_string(q) + ")");
      ++sizes_[std::size_t(c)];
    }
  }

  int q() const noexcept { return q_; }
  int n() const noexcept { return int(colors_.size()); }
  int operator[](int v) const { return colors_[std::size_t(v)]; }
  const std::vector<int>& colors() const noexcept { return colors_; }
  /// |V_i|, the size of color class i.
  int class_size(int i) const { return sizes_[std::size_t(i)]; }
  const std::vector<int>& class_sizes() const noexcept { return sizes_; }

  /// Every class within sqrt(n) of n/q.
  bool is_balanced() const {
    const double target = double(n()) / q_;
    const double slack = std::sqrt(double(n()));
    for (int s : sizes_)
      if (std::abs(s - target) > slack) return false;
    return true;
  }

  std::vector<int> class_members(int i) const {
    std::vector<int> out;
    for (int v = 0; v < n(); ++v)
      if (colors_[std::size_t(v)] == i) out.push_back(v);
    return out;
  }

  bool operator==(const Coloring&) const = default;

 private:
  int q_ = 1;
  std::vector<int> colors_;
  std::vector<int> sizes_;
};

/// Round-robin assignment v -> v mod q, shuffled; class sizes differ by at
/// most one.
inline Coloring balanced_random_coloring(int n, int q, Rng& rng) {
  std::vector<int> c(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) c[std::size_t(v)] = v % q;
  std::shuffle(c.begin(), c.end(), rng);
  return Coloring(q, std::move(c));
}

}  // namespace hypercolor
