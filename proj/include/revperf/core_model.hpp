#pragma once

#include <functional>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "revperf/distributions.hpp"
#include "revperf/rng.hpp"

namespace revperf {

inline constexpr double kUnaffordable = std::numeric_limits<double>::infinity();

/// Finite action set {0, ..., count-1}.
class ActionSpace {
 public:
  explicit ActionSpace(int count);
  int count() const noexcept { return count_; }
  bool contains(int action) const noexcept { return action >= 0 && action < count_; }
  friend bool operator==(const ActionSpace&, const ActionSpace&) = default;

 private:
  int count_;
};

/// Benefits B(theta) of every action under a model parameter theta.
struct BenefitProfile {
  ActionSpace actions;
  std::function<std::vector<double>(std::span<const double> theta)> eval;
  /// Optional: a theta whose benefit gap B_1 - B_0 equals the argument.
  std::function<std::vector<double>(double gap)> inverse;
};

/// L_a: the (count-1) x count matrix mapping benefits to the gaps
/// B_a - B_a' for a' != a (rows in ascending a').
class ContrastMatrix {
 public:
  ContrastMatrix(int action, int count);

  int action() const noexcept { return action_; }
  int rows() const noexcept { return count_ - 1; }
  int cols() const noexcept { return count_; }
  /// Action labelling row r.
  int row_label(int r) const noexcept { return r < action_ ? r : r + 1; }
  int operator()(int r, int c) const;

  std::vector<double> apply(std::span<const double> benefits) const;
  void apply(std::span<const double> benefits, std::span<double> out) const;

 private:
  int action_;
  int count_;
};

ContrastMatrix contrast_matrix(int action, int count);

/// Random cost vector C over an action space. Entries may be +infinity
/// (action unaffordable).
class CostModel {
 public:
  struct DegenerateZero {};
  /// C_0 = 0, C_1 ~ law.
  struct Univariate {
    UnivariateDistribution law;
  };
  struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd factor;  // factor * factor^T == covariance
  };
  /// C_0 = 0, C_1 = sup{b in [0, b_max] : g(b) <= U}; atom at 0 of mass g(0),
  /// atom at +infinity of mass 1 - g(b_max).
  struct GeneralizedInverse {
    std::function<double(double)> g;
    double b_max;
    double g_at_zero;
    double g_at_max;
  };
  using Kind = std::variant<DegenerateZero, Univariate, Gaussian, GeneralizedInverse>;

  static CostModel degenerate_zero(int count);
  static CostModel univariate(UnivariateDistribution law);
  /// Throws ModelError unless the covariance is symmetric PSD.
  static CostModel gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  static CostModel generalized_inverse(std::function<double(double)> g, double b_max);

  int count() const noexcept { return count_; }
  const Kind& kind() const noexcept { return kind_; }

  void sample(Rng& rng, std::span<double> out) const;
  std::vector<double> sample(Rng& rng) const;

  /// P(C_1 <= b) for the two-action kinds with C_0 = 0.
  double cost_cdf(double b) const;

 private:
  CostModel(int count, Kind kind) : count_(count), kind_(std::move(kind)) {}
  int count_;
  Kind kind_;
};

/// Index of max(benefits - cost); ties go to the smallest index.
int choose_action(std::span<const double> benefits, std::span<const double> cost);

std::vector<int> sample_actions(const CostModel& cost, std::span<const double> benefits,
                                std::size_t n, Rng& rng);

/// D_a = F_a(L_a B) for every action. Closed form for two actions with
/// univariate, generalized-inverse or Gaussian costs and for zero costs;
/// otherwise a Monte Carlo frequency over `mc_samples` cost draws.
std::vector<double> exact_choice_probabilities(const CostModel& cost,
                                               std::span<const double> benefits,
                                               std::size_t mc_samples, Rng& rng);

/// Builds the two-action cost whose choice probability for action 1 at
/// benefit gap b is g(b) on [0, b_max]. Throws ShapeError when g decreases
/// or leaves [0, 1] on a `validation_points` grid.
CostModel cost_from_map_binary(std::function<double(double)> g, double b_max,
                               std::size_t validation_points = 1001);

}  // namespace revperf
