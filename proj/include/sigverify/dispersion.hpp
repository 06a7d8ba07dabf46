#pragma once

#include <span>

namespace sigverify {

/// Median-of-medians pairwise dispersion of a sample:
///
///   c * lomed_i { himed_{j != i} |x_i - x_j| }
///
/// Inner median is the high median over the n - 1 other points, outer is the
/// low median over the n per-point values. Runs in O(n log n).
///
/// Throws DispersionError when fewer than two values are given.
double mom_dispersion(std::span<const double> values, double c = 1.0);

}  // namespace sigverify
