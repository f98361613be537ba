#include "revperf/rng.hpp"

#include <cmath>

namespace revperf {

double Rng::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * factor;
  has_cached_normal_ = true;
  return u * factor;
}

std::uint64_t Rng::binomial(std::uint64_t n, double p) noexcept {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  // Work with the smaller tail so the expected number of steps is n*min(p,1-p).
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  const double ratio = q / (1.0 - q);
  double pmf = std::pow(1.0 - q, static_cast<double>(n));
  if (pmf < 1e-300) {
    // pmf at zero underflows for very large n; fall back to counting.
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) k += bernoulli(q) ? 1 : 0;
    return flip ? n - k : k;
  }
  double u = uniform();
  std::uint64_t k = 0;
  while (u > pmf && k < n) {
    u -= pmf;
    pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
  }
  return flip ? n - k : k;
}

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  // Rejection on the top range keeps the result exactly uniform.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x >= limit);
  return x % n;
}

}  // namespace revperf
