#pragma once

#include <span>

namespace secinv {

/// Euclidean projection, in place, onto { v >= 0, lower <= sum(v) <= upper }.
/// `upper` may be infinite. Sort-based and exact up to rounding.
void project_bounded_simplex(std::span<double> values, double lower, double upper);

}  // namespace secinv
