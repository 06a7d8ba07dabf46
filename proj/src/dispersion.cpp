#include "sigverify/dispersion.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "sigverify/errors.hpp"

namespace sigverify {

namespace {

// k-th smallest (0-based) of the distances from sorted[i] to every other
// point. Left distances grow as we walk left, right distances as we walk
// right, so this is a selection over the union of two sorted sequences.
double kth_distance(const std::vector<double>& sorted, std::size_t i,
                    std::size_t k) {
  auto left = [&](std::size_t t) { return sorted[i] - sorted[i - 1 - t]; };
  auto right = [&](std::size_t t) { return sorted[i + 1 + t] - sorted[i]; };
  std::size_t left_len = i;
  std::size_t right_len = sorted.size() - 1 - i;

  std::size_t lo = k + 1 > right_len ? k + 1 - right_len : 0;
  std::size_t hi = std::min(k + 1, left_len);
  // Binary search on how many of the k+1 smallest come from the left side.
  while (lo < hi) {
    const std::size_t take_left = (lo + hi) / 2;
    const std::size_t take_right = k + 1 - take_left;
    // Too few from the left if the next left value is below the last right one.
    if (take_right >= 1 && take_left < left_len &&
        left(take_left) < right(take_right - 1)) {
      lo = take_left + 1;
    } else {
      hi = take_left;
    }
  }
  const std::size_t take_left = lo;
  const std::size_t take_right = k + 1 - take_left;
  double best = 0.0;
  bool any = false;
  if (take_left > 0) {
    best = left(take_left - 1);
    any = true;
  }
  if (take_right > 0) {
    const double r = right(take_right - 1);
    best = any ? std::max(best, r) : r;
  }
  return best;
}

}  // namespace

double mom_dispersion(std::span<const double> values, double c) {
  const std::size_t n = values.size();
  if (n < 2)
    throw DispersionError("median-of-medians needs at least 2 values, got " +
                          std::to_string(n));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  // High median of n - 1 values sits at index (n - 1) / 2.
  const std::size_t inner_rank = (n - 1) / 2;
  std::vector<double> inner(n);
  for (std::size_t i = 0; i < n; ++i)
    inner[i] = kth_distance(sorted, i, inner_rank);

  // Low median of n values.
  const std::size_t outer_rank = (n - 1) / 2;
  std::nth_element(inner.begin(), inner.begin() + outer_rank, inner.end());
  return c * inner[outer_rank];
}

}  // namespace sigverify
