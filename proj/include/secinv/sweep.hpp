#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include "secinv/centralized.hpp"
#include "secinv/scenario_io.hpp"

namespace secinv {

/// `steps` evenly spaced points from start to stop; the last point is stop
/// exactly. Throws InvalidInputError unless steps >= 2 and start < stop.
std::vector<double> linear_grid(double start, double stop, std::size_t steps);

/// A sweep point failed. Samples solved before it are kept for partial output.
class SweepError : public Error {
 public:
  SweepError(SweepResult partial, double param, std::exception_ptr cause);

  const SweepResult& partial() const noexcept { return partial_; }
  double param() const noexcept { return param_; }
  /// The exception the failed solve raised.
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  SweepResult partial_;
  double param_;
  std::exception_ptr cause_;
};

struct SweepOptions {
  SolverConfig solver;
  std::size_t jobs = 1;  // concurrent solves; rows stay in grid order
};

/// Solves OP-A at every gamma on the grid, which must lie in (0, 1].
SweepResult sweep_gamma(const TransportNetwork& network, const std::vector<double>& grid,
                        const SweepOptions& options = {});

/// Solves OP-B at every tau on the grid (applied to every source), at a fixed
/// gamma. The grid must lie in [0, 1].
SweepResult sweep_tau(const TransportNetwork& network, const BehavioralModel& behavior,
                      const std::vector<double>& grid, const SweepOptions& options = {});

/// Row of a sweep for one solved plan. Targets with aggregate above 1e-6
/// count as active.
SweepSample make_sample(double param, const TransportNetwork& network,
                        const SolveReport& report);

}  // namespace secinv
