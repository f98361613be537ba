#pragma once

// Brute-force reference solutions used only by tests. Nothing here calls into
// the solvers it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace oracle {

inline double weighted_sse(std::span<const double> y, std::span<const double> w, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * (y[i] - f[i]) * (y[i] - f[i]);
  return s;
}

/// Exact univariate isotonic regression: the optimum is a partition into
/// consecutive blocks at their weighted means; enumerate all 2^(n-1) of them.
inline std::vector<double> isotonic_by_block_enumeration(std::span<const double> y, std::span<const double> w) {
  const std::size_t n = y.size();
  std::vector<double> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<double> f(n);
    std::size_t start = 0;
    bool feasible = true;
    double previous = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const bool cut = i == n - 1 || (mask >> i & 1u);
      if (!cut) continue;
      double sw = 0.0, swy = 0.0;
      for (std::size_t k = start; k <= i; ++k) {
        sw += w[k];
        swy += w[k] * y[k];
      }
      const double v = swy / sw;
      if (v < previous - 1e-15) feasible = false;
      previous = v;
      for (std::size_t k = start; k <= i; ++k) f[k] = v;
      start = i + 1;
    }
    if (!feasible) continue;
    const double obj = weighted_sse(y, w, f);
    if (obj < best_obj) {
      best_obj = obj;
      best = f;
    }
  }
  return best;
}

/// Minimum of sum_i cost_i(f_i) over nondecreasing f with every f_i on the
/// grid {lo, lo + step, ..., hi}; dynamic programming equals exhaustive
/// enumeration of nondecreasing grid vectors.
inline double monotone_grid_minimum(std::size_t n, const std::function<double(std::size_t, double)>& cost, double lo,
                                    double hi, double step) {
  const auto levels = static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> best(levels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double running = std::numeric_limits<double>::infinity();
    std::vector<double> next(levels);
    for (std::size_t g = 0; g < levels; ++g) {
      running = std::min(running, best[g]);  // best over predecessors at levels <= g
      next[g] = running + cost(i, lo + step * static_cast<double>(g));
    }
    best = std::move(next);
  }
  return *std::min_element(best.begin(), best.end());
}

inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
  }
  return true;
}

/// Exact isotonic regression over the coordinate-wise order for small n:
/// every optimum assigns each level set its weighted mean, so enumerate all
/// set partitions (restricted growth strings) and keep the best feasible one.
inline std::vector<double> isotonic_by_partition_enumeration(const std::vector<std::vector<double>>& x,
                                                             std::span<const double> y, std::span<const double> w) {
  const std::size_t n = y.size();
  std::vector<std::size_t> label(n, 0);
  std::vector<double> best;
  double best_obj = std::numeric_limits<double>::infinity();
  while (true) {
    std::size_t blocks = 0;
    for (auto l : label) blocks = std::max(blocks, l + 1);
    std::vector<double> sw(blocks, 0.0), swy(blocks, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sw[label[i]] += w[i];
      swy[label[i]] += w[i] * y[i];
    }
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = swy[label[i]] / sw[label[i]];
    bool feasible = true;
    for (std::size_t i = 0; i < n && feasible; ++i) {
      for (std::size_t j = 0; j < n && feasible; ++j) {
        if (i != j && dominates(x[i], x[j]) && f[i] > f[j] + 1e-12) feasible = false;
      }
    }
    if (feasible) {
      const double obj = weighted_sse(y, w, f);
      if (obj < best_obj) {
        best_obj = obj;
        best = f;
      }
    }
    // Next restricted growth string.
    std::size_t i = n;
    while (i-- > 1) {
      std::size_t prefix_max = 0;
      for (std::size_t k = 0; k < i; ++k) prefix_max = std::max(prefix_max, label[k]);
      if (label[i] <= prefix_max) {
        ++label[i];
        std::fill(label.begin() + static_cast<std::ptrdiff_t>(i) + 1, label.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return best;
}

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
