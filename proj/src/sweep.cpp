#include "secinv/sweep.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <future>
#include <optional>

#include <fmt/format.h>

namespace secinv {

namespace {

constexpr double kActiveThreshold = 1e-6;

SweepResult run_points(const std::string& axis, const TransportNetwork& network,
                       const std::vector<double>& grid, std::size_t jobs,
                       const std::function<SolveReport(double)>& solve_at) {
  const std::size_t n = grid.size();
  std::vector<std::optional<SweepSample>> rows(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t width = std::max<std::size_t>(1, jobs);

  for (std::size_t begin = 0; begin < n; begin += width) {
    const std::size_t end = std::min(n, begin + width);
    std::vector<std::future<void>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      auto task = [&, i] {
        try {
          rows[i] = make_sample(grid[i], network, solve_at(grid[i]));
        } catch (...) {
          errors[i] = std::current_exception();
        }
      };
      if (width == 1) {
        task();
      } else {
        batch.push_back(std::async(std::launch::async, task));
      }
    }
    for (auto& f : batch) f.get();
  }

  SweepResult result;
  result.axis = axis;
  result.target_count = network.target_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) throw SweepError(std::move(result), grid[i], errors[i]);
    result.samples.push_back(std::move(*rows[i]));
  }
  return result;
}

void check_grid(const std::vector<double>& grid, double lo, bool lo_open, double hi,
                const char* axis) {
  if (grid.empty()) throw InvalidInputError(fmt::format("{} grid is empty", axis));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = grid[i];
    const bool below = lo_open ? !(v > lo) : !(v >= lo);
    if (below || !(v <= hi)) {
      throw InvalidInputError(fmt::format("{} grid value {} is outside {}{}, {}]", axis, v,
                                          lo_open ? "(" : "[", lo, hi));
    }
    if (i > 0 && !(v > grid[i - 1])) {
      throw InvalidInputError(fmt::format("{} grid must be strictly increasing", axis));
    }
  }
}

}  // namespace

namespace {

std::string describe(const std::exception_ptr& cause) {
  try {
    std::rethrow_exception(cause);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown failure";
  }
}

}  // namespace

SweepError::SweepError(SweepResult partial, double param, std::exception_ptr cause)
    : Error(fmt::format("sweep point {}={} failed: {}", partial.axis, param, describe(cause))),
      partial_(std::move(partial)),
      param_(param),
      cause_(std::move(cause)) {}

std::vector<double> linear_grid(double start, double stop, std::size_t steps) {
  if (steps < 2) throw InvalidInputError(fmt::format("grid needs at least 2 points, got {}", steps));
  if (!(start < stop)) {
    throw InvalidInputError(fmt::format("grid start {} must be below stop {}", start, stop));
  }
  std::vector<double> grid(steps);
  const double span = stop - start;
  const double last = static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    grid[i] = start + span * (static_cast<double>(i) / last);
  }
  grid.back() = stop;
  return grid;
}

SweepSample make_sample(double param, const TransportNetwork& network,
                        const SolveReport& report) {
  SweepSample s;
  s.param = param;
  s.aggregates = target_aggregates(network, report.plan.amounts());
  s.true_loss = report.true_loss;
  s.perceived_loss = report.perceived_loss;
  s.active_targets = static_cast<std::size_t>(
      std::count_if(s.aggregates.begin(), s.aggregates.end(),
                    [](double a) { return a > kActiveThreshold; }));
  return s;
}

SweepResult sweep_gamma(const TransportNetwork& network, const std::vector<double>& grid,
                        const SweepOptions& options) {
  check_grid(grid, 0.0, true, 1.0, "gamma");
  options.solver.validate();
  return run_points("gamma", network, grid, options.jobs, [&](double gamma) {
    return solve_op_a(network, BehavioralModel(gamma), options.solver);
  });
}

SweepResult sweep_tau(const TransportNetwork& network, const BehavioralModel& behavior,
                      const std::vector<double>& grid, const SweepOptions& options) {
  check_grid(grid, 0.0, false, 1.0, "tau");
  options.solver.validate();
  return run_points("tau", network, grid, options.jobs, [&](double tau) {
    return solve_op_b(network.with_uniform_tau(tau), behavior, options.solver);
  });
}

}  // namespace secinv
