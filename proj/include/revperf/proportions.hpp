#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace revperf {

/// One deployed model's benefit vector (or scalar gap), its estimated action
/// proportions and the number of agents they were estimated from.
struct ProportionObservation {
  std::vector<double> benefits;
  std::vector<double> proportions;
  std::size_t sample_size = 1;

  /// Throws ArgumentError unless proportions lie on the simplex (1e-9) and n >= 1.
  void validate() const;
};

/// Empirical action frequencies.
std::vector<double> estimate_direct(std::span<const int> actions, int count);

double smallest_singular_value(const Eigen::MatrixXd& matrix);

inline constexpr double kMinSingularValue = 1e-8;

/// Moment matching: pi = Delta^{-1} mean(h(Z)), clipped to [0, inf) and
/// renormalized. `delta` has columns E[h(Z) | A = a]. Throws
/// IllConditionedError when sigma_min(delta) < 1e-8.
std::vector<double> estimate_moment_matching(std::span<const Eigen::VectorXd> h_values,
                                             const Eigen::MatrixXd& delta);

/// Same, applying `h` to raw samples first.
template <class Sample>
std::vector<double> estimate_moment_matching(std::span<const Sample> z_samples,
                                             const std::function<Eigen::VectorXd(const Sample&)>& h,
                                             const Eigen::MatrixXd& delta) {
  std::vector<Eigen::VectorXd> values;
  values.reserve(z_samples.size());
  for (const auto& z : z_samples) values.push_back(h(z));
  return estimate_moment_matching(std::span<const Eigen::VectorXd>(values), delta);
}

/// Clip negatives to zero and renormalize; uniform if everything clips.
std::vector<double> project_to_simplex(std::span<const double> v);

}  // namespace revperf
