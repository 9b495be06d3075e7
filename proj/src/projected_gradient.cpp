#include "secinv/projected_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace secinv {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

constexpr int kMaxHalvings = 80;
constexpr double kMaxStepGrowth = 1024.0;

}  // namespace

double projected_gradient_norm(const ProjectedProblem& problem, std::span<const double> x) {
  std::vector<double> g(x.size());
  problem.gradient(x, g);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - g[i];
  problem.project(y);
  return distance(x, y);
}

ProjectedGradientResult minimize_projected_gradient(const ProjectedProblem& problem,
                                                    std::vector<double> x0,
                                                    const ProjectedGradientOptions& options,
                                                    const ProjectedGradientObserver& observer) {
  const std::size_t n = x0.size();
  ProjectedGradientResult result;
  result.x = std::move(x0);
  auto& x = result.x;

  std::vector<double> g(n), g_prev(n), trial(n), step(n), probe(n);
  bool have_step = false;
  double f = problem.objective(x);
  double t = options.step_size;
  const double t_max = options.step_size * kMaxStepGrowth;
  std::size_t stalled = 0;

  for (std::size_t k = 0;; ++k) {
    problem.gradient(x, g);
    for (std::size_t i = 0; i < n; ++i) probe[i] = x[i] - g[i];
    problem.project(probe);
    const double stationarity = distance(x, probe);
    result.stationarity = stationarity;
    result.objective = f;
    result.iterations = k;
    if (observer) observer(k, stationarity, f, x);

    if (stationarity <= options.stationarity_tolerance || stalled >= options.stall_window) {
      result.converged = true;
      return result;
    }
    if (k >= options.max_iterations) return result;

    // Barzilai-Borwein trial step from the last accepted move.
    if (have_step) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ss += step[i] * step[i];
        sy += step[i] * (g[i] - g_prev[i]);
      }
      t = sy > 0.0 ? std::clamp(ss / sy, 1e-12 * options.step_size, t_max) : t_max;
    }

    // Rounding slack lets the search accept steps whose true decrease is
    // below the resolution of f.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f));
    bool accepted = false;
    double f_trial = f;
    for (int h = 0; h < kMaxHalvings; ++h) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - t * g[i];
      problem.project(trial);
      for (std::size_t i = 0; i < n; ++i) step[i] = trial[i] - x[i];
      f_trial = problem.objective(trial);
      if (f_trial <= f + options.armijo * dot(g, step) + slack) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No representable decrease remains.
      result.converged = true;
      return result;
    }

    stalled = std::abs(f - f_trial) <= options.objective_tolerance ? stalled + 1 : 0;
    x.swap(trial);
    f = f_trial;
    g_prev = g;
    have_step = true;
  }
}

}  // namespace secinv
