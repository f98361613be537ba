#include "revperf/proportions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "revperf/errors.hpp"

namespace revperf {

void ProportionObservation::validate() const {
  if (sample_size < 1) throw ArgumentError("observation sample size must be >= 1");
  double total = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("observation proportion outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ArgumentError("observation proportions sum to " + std::to_string(total));
}

std::vector<double> estimate_direct(std::span<const int> actions, int count) {
  if (actions.empty()) throw ArgumentError("estimate_direct: no actions observed");
  if (count < 2) throw ArgumentError("estimate_direct: count must be >= 2");
  std::vector<std::size_t> tally(count, 0);
  for (int a : actions) {
    if (a < 0 || a >= count) throw ArgumentError("estimate_direct: action " + std::to_string(a) + " out of range");
    ++tally[a];
  }
  std::vector<double> out(count);
  const double n = static_cast<double>(actions.size());
  for (int a = 0; a < count; ++a) out[a] = static_cast<double>(tally[a]) / n;
  return out;
}

double smallest_singular_value(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw ArgumentError("smallest_singular_value: need a square matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  return svd.singularValues().minCoeff();
}

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  double total = 0.0;
  bool clipped = false;
  for (auto& x : out) {
    if (x < 0.0) {
      x = 0.0;
      clipped = true;
    }
    total += x;
  }
  // Already on the simplex up to rounding: leave the values bit-for-bit.
  if (!clipped && std::abs(total - 1.0) <= 1e-12) return out;
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return out;
  }
  for (auto& x : out) x /= total;
  return out;
}

std::vector<double> estimate_moment_matching(std::span<const Eigen::VectorXd> h_values, const Eigen::MatrixXd& delta) {
  if (h_values.empty()) throw ArgumentError("estimate_moment_matching: no samples");
  const auto k = delta.rows();
  if (delta.cols() != k) throw ArgumentError("estimate_moment_matching: Delta must be square");
  const double smin = smallest_singular_value(delta);
  if (smin < kMinSingularValue) {
    throw IllConditionedError("estimate_moment_matching: smallest singular value " + std::to_string(smin) +
                              " below 1e-8; the discriminating function cannot separate actions");
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
  for (const auto& h : h_values) {
    if (h.size() != k) throw ArgumentError("estimate_moment_matching: h(Z) has wrong length");
    mean += h;
  }
  mean /= static_cast<double>(h_values.size());
  const Eigen::VectorXd pi = delta.partialPivLu().solve(mean);
  return project_to_simplex(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())));
}

}  // namespace revperf
