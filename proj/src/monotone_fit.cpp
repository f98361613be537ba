#include "revperf/monotone_fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "revperf/errors.hpp"

namespace revperf {

std::vector<double> weighted_pava(std::span<const double> y, std::span<const double> w) {
  if (y.size() != w.size()) throw ArgumentError("weighted_pava: y and w differ in length");
  if (y.empty()) throw ArgumentError("weighted_pava: empty input");
  struct Block {
    double weighted_sum;
    double weight;
    std::size_t length;
    double mean() const { return weighted_sum / weight; }
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(w[i] > 0.0)) throw ArgumentError("weighted_pava: weight " + std::to_string(i) + " is not positive");
    blocks.push_back({w[i] * y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      auto& below = blocks.back();
      below.weighted_sum += top.weighted_sum;
      below.weight += top.weight;
      below.length += top.length;
    }
  }
  std::vector<double> fitted;
  fitted.reserve(y.size());
  for (const auto& b : blocks) fitted.insert(fitted.end(), b.length, b.mean());
  return fitted;
}

bool precedes(std::span<const double> a, std::span<const double> b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
  }
  return true;
}

MonotoneFit::MonotoneFit(std::vector<std::vector<double>> design_points, std::vector<double> fitted_values,
                         std::vector<double> weights)
    : points_(std::move(design_points)), values_(std::move(fitted_values)), weights_(std::move(weights)) {
  if (points_.empty()) throw ArgumentError("MonotoneFit: no design points");
  if (points_.size() != values_.size()) throw ArgumentError("MonotoneFit: one fitted value per design point required");
  if (!weights_.empty() && weights_.size() != values_.size()) throw ArgumentError("MonotoneFit: weight count mismatch");
  dimension_ = static_cast<int>(points_.front().size());
  if (dimension_ < 1) throw ArgumentError("MonotoneFit: dimension must be >= 1");
  for (const auto& p : points_) {
    if (static_cast<int>(p.size()) != dimension_) throw ArgumentError("MonotoneFit: inconsistent point dimensions");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("MonotoneFit: fitted values must lie in [0, 1]");
  }
  if (dimension_ == 1) {
    scalar_points_.reserve(points_.size());
    for (const auto& p : points_) scalar_points_.push_back(p[0]);
    sorted_scalar_ = std::is_sorted(scalar_points_.begin(), scalar_points_.end()) &&
                     std::is_sorted(values_.begin(), values_.end());
  }
}

double MonotoneFit::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension_) throw ArgumentError("MonotoneFit::evaluate: dimension mismatch");
  if (sorted_scalar_) {
    const auto it = std::upper_bound(scalar_points_.begin(), scalar_points_.end(), x[0]);
    if (it == scalar_points_.begin()) return 0.0;
    return values_[static_cast<std::size_t>(it - scalar_points_.begin()) - 1];
  }
  double best = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (values_[i] > best && precedes(points_[i], x)) best = values_[i];
  }
  return best;
}

double MonotoneFit::evaluate(double x) const { return evaluate(std::span<const double>(&x, 1)); }

nlohmann::json MonotoneFit::to_json() const {
  return {{"dimension", dimension_}, {"design_points", points_}, {"fitted_values", values_}};
}

MonotoneFit MonotoneFit::from_json(const nlohmann::json& j) {
  auto points = j.at("design_points").get<std::vector<std::vector<double>>>();
  auto values = j.at("fitted_values").get<std::vector<double>>();
  MonotoneFit fit(std::move(points), std::move(values));
  if (fit.dimension() != j.at("dimension").get<int>()) throw ArgumentError("MonotoneFit JSON: dimension mismatch");
  return fit;
}

MonotoneFit fit_cdf_univariate(std::span<const UnivariateObservation> observations) {
  if (observations.empty()) throw ArgumentError("fit_cdf_univariate: no observations");
  std::vector<UnivariateObservation> sorted(observations.begin(), observations.end());
  for (const auto& o : sorted) {
    if (!std::isfinite(o.b)) throw ArgumentError("fit_cdf_univariate: benefit gap must be finite");
    if (!(o.proportion >= 0.0 && o.proportion <= 1.0)) throw ArgumentError("fit_cdf_univariate: proportion outside [0, 1]");
    if (!(o.weight > 0.0)) throw ArgumentError("fit_cdf_univariate: weight must be positive");
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.b < b.b; });

  std::vector<double> xs, ys, ws;
  for (const auto& o : sorted) {
    if (!xs.empty() && xs.back() == o.b) {
      // Pool duplicates: accumulate w*y in ys until the loop ends.
      ys.back() += o.weight * o.proportion;
      ws.back() += o.weight;
    } else {
      xs.push_back(o.b);
      ys.push_back(o.weight * o.proportion);
      ws.push_back(o.weight);
    }
  }
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = std::clamp(ys[i] / ws[i], 0.0, 1.0);
  auto fitted = weighted_pava(ys, ws);
  std::vector<std::vector<double>> points;
  points.reserve(xs.size());
  for (double x : xs) points.push_back({x});
  return MonotoneFit(std::move(points), std::move(fitted), std::move(ws));
}

std::vector<std::pair<std::size_t, std::size_t>> dominance_reduction(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  // A strict predecessor has a strictly smaller coordinate sum, so sorting by
  // the sum gives a topological order.
  std::vector<double> sums(n);
  for (std::size_t i = 0; i < n; ++i) sums[i] = std::accumulate(points[i].begin(), points[i].end(), 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sums[a] < sums[b]; });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> maximal;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t j = order[pos];
    maximal.clear();
    // Candidates in descending topological order: a predecessor is redundant
    // exactly when it precedes an already kept (maximal) one.
    for (std::size_t q = pos; q-- > 0;) {
      const std::size_t i = order[q];
      if (!precedes(points[i], points[j])) continue;
      bool covered = false;
      for (std::size_t k : maximal) {
        if (precedes(points[i], points[k])) {
          covered = true;
          break;
        }
      }
      if (!covered) maximal.push_back(i);
    }
    for (std::size_t i : maximal) pairs.emplace_back(i, j);
  }
  return pairs;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

// The optimum is constant on the components joined by constraints with a
// positive multiplier, at the weighted mean of y there. Replace the iterate
// by those means when the result is feasible and within 1e-6 of it.
void polish_level_sets(const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                       const std::vector<double>& lambda, const std::vector<double>& y, const std::vector<double>& w,
                       std::vector<double>& f) {
  const std::size_t m = f.size();
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    if (lambda[e] > 0.0) parent[find_root(parent, pairs[e].first)] = find_root(parent, pairs[e].second);
  }
  std::vector<double> sum_wy(m, 0.0), sum_w(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t r = find_root(parent, k);
    sum_wy[r] += w[k] * y[k];
    sum_w[r] += w[k];
  }
  std::vector<double> polished(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t r = find_root(parent, k);
    polished[k] = std::clamp(sum_wy[r] / sum_w[r], 0.0, 1.0);
    if (std::abs(polished[k] - f[k]) > 1e-6) return;
  }
  for (const auto& [i, j] : pairs) {
    if (polished[i] > polished[j]) return;
  }
  f = std::move(polished);
}

}  // namespace

MonotoneFit fit_monotone_multivariate(std::vector<std::vector<double>> points, std::span<const double> y,
                                      std::span<const double> w, const MultivariateOptions& options,
                                      SolverDiagnostics* diagnostics) {
  const std::size_t n = points.size();
  if (n == 0) throw ArgumentError("fit_monotone_multivariate: no points");
  if (y.size() != n || w.size() != n) throw ArgumentError("fit_monotone_multivariate: y, w and points differ in length");
  const std::size_t d = points.front().size();
  if (d == 0) throw ArgumentError("fit_monotone_multivariate: dimension must be >= 1");
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != d) throw ArgumentError("fit_monotone_multivariate: inconsistent point dimensions");
    for (double v : points[i]) {
      if (!std::isfinite(v)) throw ArgumentError("fit_monotone_multivariate: non-finite coordinate");
    }
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) throw ArgumentError("fit_monotone_multivariate: y outside [0, 1]");
    if (!(w[i] > 0.0)) throw ArgumentError("fit_monotone_multivariate: weights must be positive");
  }

  // Pool identical points: they are mutually ordered and must share a value.
  std::map<std::vector<double>, std::size_t> index_of;
  std::vector<std::size_t> group(n);
  std::vector<std::vector<double>> unique;
  std::vector<double> uy, uw;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = index_of.try_emplace(points[i], unique.size());
    if (inserted) {
      unique.push_back(points[i]);
      uy.push_back(0.0);
      uw.push_back(0.0);
    }
    group[i] = it->second;
    uy[it->second] += w[i] * y[i];
    uw[it->second] += w[i];
  }
  const std::size_t m = unique.size();
  for (std::size_t k = 0; k < m; ++k) uy[k] = std::clamp(uy[k] / uw[k], 0.0, 1.0);

  std::vector<double> f;
  SolverDiagnostics diag;
  diag.unique_points = m;

  if (d == 1 && options.exact_for_scalar) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return unique[a][0] < unique[b][0]; });
    std::vector<double> sy(m), sw(m);
    for (std::size_t k = 0; k < m; ++k) {
      sy[k] = uy[order[k]];
      sw[k] = uw[order[k]];
    }
    const auto sf = weighted_pava(sy, sw);
    f.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) f[order[k]] = sf[k];
    diag.order_pairs = m > 0 ? m - 1 : 0;
  } else {
    const auto pairs = dominance_reduction(unique);
    diag.order_pairs = pairs.size();
    // Dual coordinate ascent: x = y - W^{-1} sum_e lambda_e (e_i - e_j) with
    // lambda_e >= 0, plus a Dykstra correction for the [0, 1] box.
    f = uy;
    std::vector<double> lambda(pairs.size(), 0.0);
    std::vector<double> box_correction(m, 0.0);
    std::vector<double> inv_w(m);
    for (std::size_t k = 0; k < m; ++k) inv_w[k] = 1.0 / uw[k];
    bool converged = false;
    while (diag.sweeps < options.max_sweeps) {
      ++diag.sweeps;
      double change = 0.0;
      for (std::size_t e = 0; e < pairs.size(); ++e) {
        const auto [i, j] = pairs[e];
        const double violation = f[i] - f[j];
        const double updated = std::max(0.0, lambda[e] + violation / (inv_w[i] + inv_w[j]));
        const double step = updated - lambda[e];
        if (step != 0.0) {
          lambda[e] = updated;
          const double di = step * inv_w[i];
          const double dj = step * inv_w[j];
          f[i] -= di;
          f[j] += dj;
          change = std::max(change, std::max(std::abs(di), std::abs(dj)));
        }
      }
      for (std::size_t k = 0; k < m; ++k) {
        const double z = f[k] + box_correction[k];
        const double clipped = std::clamp(z, 0.0, 1.0);
        box_correction[k] = z - clipped;
        change = std::max(change, std::abs(clipped - f[k]));
        f[k] = clipped;
      }
      diag.last_change = change;
      if (change < options.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw NumericalError("fit_monotone_multivariate: no convergence after " + std::to_string(diag.sweeps) +
                           " sweeps (last change " + std::to_string(diag.last_change) + ", " +
                           std::to_string(m) + " points, " + std::to_string(pairs.size()) + " order pairs)");
    }
    for (auto& v : f) v = std::clamp(v, 0.0, 1.0);
    polish_level_sets(pairs, lambda, uy, uw, f);
  }
  if (diagnostics != nullptr) *diagnostics = diag;

  std::vector<double> fitted(n);
  for (std::size_t i = 0; i < n; ++i) fitted[i] = f[group[i]];
  return MonotoneFit(std::move(points), std::move(fitted), std::vector<double>(w.begin(), w.end()));
}

std::vector<double> assemble_probabilities(std::span<const double> nonzero_actions) {
  std::vector<double> out(nonzero_actions.size() + 1);
  double s = 0.0;
  for (double v : nonzero_actions) s += v;
  if (s <= 1.0) {
    out[0] = 1.0 - s;
    std::copy(nonzero_actions.begin(), nonzero_actions.end(), out.begin() + 1);
  } else {
    out[0] = 0.0;
    for (std::size_t a = 0; a < nonzero_actions.size(); ++a) out[a + 1] = nonzero_actions[a] / s;
  }
  return out;
}

DistributionMapEstimate::DistributionMapEstimate(std::vector<MonotoneFit> fits, std::vector<ContrastMatrix> contrasts,
                                                 BenefitProfile benefits)
    : fits_(std::move(fits)), contrasts_(std::move(contrasts)), benefits_(std::move(benefits)) {
  check(fits_.size());
  for (std::size_t a = 0; a < fits_.size(); ++a) {
    if (fits_[a].dimension() != contrasts_[a].rows()) {
      throw ArgumentError("distribution map: fit for action " + std::to_string(a + 1) + " has dimension " +
                          std::to_string(fits_[a].dimension()) + ", expected " + std::to_string(contrasts_[a].rows()));
    }
  }
}

DistributionMapEstimate::DistributionMapEstimate(std::vector<ActionCdf> cdfs, std::vector<ContrastMatrix> contrasts,
                                                 BenefitProfile benefits)
    : cdfs_(std::move(cdfs)), contrasts_(std::move(contrasts)), benefits_(std::move(benefits)) {
  check(cdfs_.size());
  for (const auto& c : cdfs_) {
    if (!c) throw ArgumentError("distribution map: empty CDF estimate");
  }
}

void DistributionMapEstimate::check(std::size_t given) const {
  const auto expected = static_cast<std::size_t>(benefits_.actions.count() - 1);
  if (given != expected) {
    throw ArgumentError("distribution map: need one estimate per nonzero action (" + std::to_string(expected) +
                        "), got " + std::to_string(given));
  }
  if (contrasts_.size() != expected) throw ArgumentError("distribution map: contrast matrix count mismatch");
  for (std::size_t a = 0; a < contrasts_.size(); ++a) {
    if (contrasts_[a].action() != static_cast<int>(a + 1) || contrasts_[a].cols() != benefits_.actions.count()) {
      throw ArgumentError("distribution map: contrast matrices must be L_1..L_{K-1} for the action space");
    }
  }
}

std::vector<double> DistributionMapEstimate::evaluate_benefits(std::span<const double> benefits) const {
  std::vector<double> raw(contrasts_.size());
  std::vector<double> gap;
  for (std::size_t a = 0; a < contrasts_.size(); ++a) {
    gap.resize(contrasts_[a].rows());
    contrasts_[a].apply(benefits, gap);
    raw[a] = fits_.empty() ? cdfs_[a](gap) : fits_[a].evaluate(gap);
  }
  return assemble_probabilities(raw);
}

std::vector<double> DistributionMapEstimate::evaluate(std::span<const double> theta) const {
  const auto b = benefits_.eval(theta);
  return evaluate_benefits(b);
}

DistributionMapEstimate assemble_distribution_map(std::vector<MonotoneFit> fits, std::vector<ContrastMatrix> contrasts,
                                                  BenefitProfile benefits) {
  return DistributionMapEstimate(std::move(fits), std::move(contrasts), std::move(benefits));
}

}  // namespace revperf
