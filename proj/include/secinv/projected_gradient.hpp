#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace secinv {

/// Smooth objective over a convex set given by its Euclidean projection.
struct ProjectedProblem {
  std::function<double(std::span<const double>)> objective;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  std::function<void(std::span<double>)> project;  // in place
};

struct ProjectedGradientOptions {
  double step_size = 1.0;            // first trial step; later steps stay within 1024x
  std::size_t max_iterations = 200000;
  double stationarity_tolerance = 1e-7;
  double objective_tolerance = 1e-10;  // per-iteration change counted as a stall
  std::size_t stall_window = 10;
  double armijo = 1e-4;
};

struct ProjectedGradientResult {
  std::vector<double> x;
  double objective = 0.0;
  double stationarity = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Per-iteration callback: (iteration, stationarity, objective, iterate).
using ProjectedGradientObserver =
    std::function<void(std::size_t, double, double, std::span<const double>)>;

/// || x - P(x - grad f(x)) ||_2, the unit-step projected gradient norm.
double projected_gradient_norm(const ProjectedProblem& problem, std::span<const double> x);

/// Projected gradient descent with halving Armijo backtracking. `x0` must be
/// feasible. Stops when the stationarity measure drops to the tolerance, when
/// the objective moves by at most `objective_tolerance` for `stall_window`
/// consecutive iterations, or when no step decreases the objective beyond
/// rounding noise. After the first move, each trial step is the
/// Barzilai-Borwein estimate from the previous step and gradient change.
ProjectedGradientResult minimize_projected_gradient(const ProjectedProblem& problem,
                                                    std::vector<double> x0,
                                                    const ProjectedGradientOptions& options,
                                                    const ProjectedGradientObserver& observer = {});

}  // namespace secinv
