#ifndef NETKERNEL_NELDER_MEAD_HPP
#define NETKERNEL_NELDER_MEAD_HPP
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace netkernel {

struct NelderMeadOptions {
  double initial_step = 0.5;
  double f_tolerance = 1e-8;  // stop when max f - min f over the simplex falls below this
  int max_iterations = 2000;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Box-constrained Nelder-Mead minimization; trial points are projected onto [lower, upper].
/// Non-finite objective values are treated as +inf.
template <class Objective>
NelderMeadResult nelder_mead(Objective&& objective, const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const NelderMeadOptions& options = {}) {
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  const Eigen::Index n = start.size();
  auto clamp = [&](Eigen::VectorXd x) {
    for (Eigen::Index i = 0; i < n; ++i) x(i) = std::clamp(x(i), lower(i), upper(i));
    return x;
  };
  auto eval = [&](const Eigen::VectorXd& x) {
    const double f = objective(x);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  };

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.push_back(clamp(start));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = simplex.front();
    // Step away from the nearer bound so the vertex never collapses onto the start.
    const double step = options.initial_step;
    v(i) = (v(i) + step <= upper(i)) ? v(i) + step : v(i) - step;
    simplex.push_back(clamp(v));
  }
  for (const auto& v : simplex) values.push_back(eval(v));

  std::vector<std::size_t> order(simplex.size());
  NelderMeadResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    if (std::isfinite(values[worst]) && values[worst] - values[best] < options.f_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += simplex[order[k]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = clamp(centroid + kReflect * (centroid - simplex[worst]));
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = clamp(centroid + kExpand * (reflected - centroid));
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted = outside ? clamp(centroid + kContract * (reflected - centroid))
                                               : clamp(centroid + kContract * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (std::size_t k = 1; k < order.size(); ++k) {
      const std::size_t idx = order[k];
      simplex[idx] = clamp(simplex[best] + kShrink * (simplex[idx] - simplex[best]));
      values[idx] = eval(simplex[idx]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.f = *best_it;
  result.iterations = iter;
  return result;
}

}  // namespace netkernel

#endif  // NETKERNEL_NELDER_MEAD_HPP
