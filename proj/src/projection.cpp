#include "secinv/projection.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace secinv {

namespace {

// Shift theta with sum(max(v - theta, 0)) == total, for total > 0.
double simplex_shift(std::span<const double> values, double total) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double prefix = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double candidate = (prefix - total) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  return theta;
}

}  // namespace

void project_bounded_simplex(std::span<double> values, double lower, double upper) {
  double clipped_sum = 0.0;
  for (double v : values) clipped_sum += std::max(v, 0.0);
  if (clipped_sum >= lower && clipped_sum <= upper) {
    for (double& v : values) v = std::max(v, 0.0);
    return;
  }
  const double total = clipped_sum > upper ? upper : lower;
  if (total <= 0.0) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  const double theta = simplex_shift(values, total);
  for (double& v : values) v = std::max(v - theta, 0.0);
}

}  // namespace secinv
