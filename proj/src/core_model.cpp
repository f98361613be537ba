#include "revperf/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "revperf/errors.hpp"
#include "revperf/numerics.hpp"

namespace revperf {

ActionSpace::ActionSpace(int count) : count_(count) {
  if (count < 2) throw ArgumentError("action space needs at least 2 actions, got " + std::to_string(count));
}

ContrastMatrix::ContrastMatrix(int action, int count) : action_(action), count_(count) {
  if (count < 2) throw ArgumentError("contrast matrix needs count >= 2");
  if (action < 0 || action >= count) {
    throw ArgumentError("contrast matrix action " + std::to_string(action) + " outside 0.." +
                        std::to_string(count - 1));
  }
}

int ContrastMatrix::operator()(int r, int c) const {
  if (r < 0 || r >= rows() || c < 0 || c >= cols()) throw ArgumentError("contrast matrix index out of range");
  if (c == action_) return 1;
  if (c == row_label(r)) return -1;
  return 0;
}

void ContrastMatrix::apply(std::span<const double> benefits, std::span<double> out) const {
  if (benefits.size() != static_cast<std::size_t>(count_) || out.size() != static_cast<std::size_t>(rows())) {
    throw ArgumentError("contrast matrix: dimension mismatch");
  }
  for (int r = 0; r < rows(); ++r) out[r] = benefits[action_] - benefits[row_label(r)];
}

std::vector<double> ContrastMatrix::apply(std::span<const double> benefits) const {
  std::vector<double> out(rows());
  apply(benefits, out);
  return out;
}

ContrastMatrix contrast_matrix(int action, int count) { return ContrastMatrix(action, count); }

CostModel CostModel::degenerate_zero(int count) {
  return CostModel(ActionSpace(count).count(), DegenerateZero{});
}

CostModel CostModel::univariate(UnivariateDistribution law) {
  if (!law.cdf || !law.quantile) throw ModelError("univariate cost needs both cdf and quantile");
  return CostModel(2, Univariate{std::move(law)});
}

CostModel CostModel::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  const auto n = mean.size();
  if (n < 2) throw ModelError("gaussian cost needs at least 2 actions");
  if (covariance.rows() != n || covariance.cols() != n) throw ModelError("gaussian cost: covariance shape mismatch");
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ModelError("gaussian cost: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  if (eig.info() != Eigen::Success) throw ModelError("gaussian cost: eigendecomposition failed");
  const Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < -1e-10 * scale) {
    throw ModelError("gaussian cost: covariance is not positive semidefinite (min eigenvalue " +
                     std::to_string(values.minCoeff()) + ")");
  }
  const Eigen::VectorXd root = values.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal();
  return CostModel(static_cast<int>(n), Gaussian{std::move(mean), std::move(covariance), std::move(factor)});
}

CostModel CostModel::generalized_inverse(std::function<double(double)> g, double b_max) {
  if (!(b_max > 0.0)) throw ArgumentError("generalized inverse cost: b_max must be positive");
  const double g0 = g(0.0);
  const double gmax = g(b_max);
  return CostModel(2, GeneralizedInverse{std::move(g), b_max, g0, gmax});
}

namespace {

double generalized_inverse_draw(const CostModel::GeneralizedInverse& gi, double u) {
  if (u < gi.g_at_zero) return 0.0;
  if (u >= gi.g_at_max) return kUnaffordable;
  // Invariant: g(lo) <= u < g(hi).
  double lo = 0.0;
  double hi = gi.b_max;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, gi.b_max); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gi.g(mid) <= u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

void CostModel::sample(Rng& rng, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(count_)) throw ArgumentError("cost sample: output size mismatch");
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, DegenerateZero>) {
          std::fill(out.begin(), out.end(), 0.0);
        } else if constexpr (std::is_same_v<K, Univariate>) {
          out[0] = 0.0;
          out[1] = k.law.quantile(rng.open_uniform());
        } else if constexpr (std::is_same_v<K, Gaussian>) {
          Eigen::VectorXd z(count_);
          for (int i = 0; i < count_; ++i) z[i] = rng.normal();
          const Eigen::VectorXd c = k.mean + k.factor * z;
          for (int i = 0; i < count_; ++i) out[i] = c[i];
        } else {
          out[0] = 0.0;
          out[1] = generalized_inverse_draw(k, rng.uniform());
        }
      },
      kind_);
}

std::vector<double> CostModel::sample(Rng& rng) const {
  std::vector<double> out(count_);
  sample(rng, out);
  return out;
}

double CostModel::cost_cdf(double b) const {
  if (const auto* u = std::get_if<Univariate>(&kind_)) return u->law.cdf(b);
  if (const auto* gi = std::get_if<GeneralizedInverse>(&kind_)) {
    if (b < 0.0) return 0.0;
    if (b >= gi->b_max) return gi->g_at_max;
    return gi->g(b);
  }
  throw ModelError("cost_cdf is defined only for two-action costs with C_0 = 0");
}

int choose_action(std::span<const double> benefits, std::span<const double> cost) {
  int best = 0;
  double best_utility = benefits[0] - cost[0];
  for (std::size_t a = 1; a < benefits.size(); ++a) {
    const double utility = benefits[a] - cost[a];
    if (utility > best_utility) {
      best = static_cast<int>(a);
      best_utility = utility;
    }
  }
  return best;
}

std::vector<int> sample_actions(const CostModel& cost, std::span<const double> benefits, std::size_t n,
                                Rng& rng) {
  if (benefits.size() != static_cast<std::size_t>(cost.count())) {
    throw ArgumentError("sample_actions: benefits length " + std::to_string(benefits.size()) +
                        " != action count " + std::to_string(cost.count()));
  }
  if (n == 0) throw ArgumentError("sample_actions: n must be >= 1");
  std::vector<int> actions(n);
  std::vector<double> c(cost.count());
  for (auto& a : actions) {
    cost.sample(rng, c);
    a = choose_action(benefits, c);
  }
  return actions;
}

std::vector<double> exact_choice_probabilities(const CostModel& cost, std::span<const double> benefits,
                                               std::size_t mc_samples, Rng& rng) {
  const int count = cost.count();
  if (benefits.size() != static_cast<std::size_t>(count)) throw ArgumentError("exact_choice_probabilities: benefits length mismatch");
  const double gap = count == 2 ? benefits[1] - benefits[0] : 0.0;
  const auto binary = [](double p1) { return std::vector<double>{1.0 - p1, p1}; };

  if (std::holds_alternative<CostModel::DegenerateZero>(cost.kind())) {
    std::vector<double> out(count, 0.0);
    const std::vector<double> zeros(count, 0.0);
    out[choose_action(benefits, zeros)] = 1.0;
    return out;
  }
  if (count == 2) {
    if (const auto* g = std::get_if<CostModel::Gaussian>(&cost.kind())) {
      const double shift = g->mean[1] - g->mean[0];
      const double var = g->covariance(0, 0) + g->covariance(1, 1) - 2.0 * g->covariance(0, 1);
      if (var <= 0.0) return binary(gap > shift ? 1.0 : 0.0);
      return binary(normal_cdf((gap - shift) / std::sqrt(var)));
    }
    return binary(cost.cost_cdf(gap));
  }
  if (mc_samples == 0) throw ArgumentError("exact_choice_probabilities: Monte Carlo path needs mc_samples >= 1");
  std::vector<double> freq(count, 0.0);
  std::vector<double> c(count);
  for (std::size_t i = 0; i < mc_samples; ++i) {
    cost.sample(rng, c);
    freq[choose_action(benefits, c)] += 1.0;
  }
  for (auto& f : freq) f /= static_cast<double>(mc_samples);
  return freq;
}

CostModel cost_from_map_binary(std::function<double(double)> g, double b_max, std::size_t validation_points) {
  if (!(b_max > 0.0)) throw ArgumentError("cost_from_map_binary: b_max must be positive");
  if (validation_points < 2) throw ArgumentError("cost_from_map_binary: need >= 2 validation points");
  double previous = -1.0;
  for (double b : linspace(0.0, b_max, validation_points)) {
    const double v = g(b);
    if (!(v >= 0.0 && v <= 1.0)) throw ShapeError("cost_from_map_binary: g leaves [0, 1] at b = " + std::to_string(b));
    if (v < previous - 1e-12) throw ShapeError("cost_from_map_binary: g decreases at b = " + std::to_string(b));
    previous = v;
  }
  return CostModel::generalized_inverse(std::move(g), b_max);
}

}  // namespace revperf
