#pragma once

#include <span>

namespace metalens {

/// Least-squares fits of y against x = 1..k: a single line, and the best
/// continuous two-segment (hinge) line y = a + b*x + c*max(0, x - s) over
/// every integer split s in 2..k-1.
struct SegmentedFit {
  double rss_one_segment = 0.0;
  double rss_two_segment = 0.0;
  int split_rank = 0;       // s of the best hinge; ranks <= s form the first segment
  double total_ss = 0.0;    // sum of squares about the mean of y
};

/// Requires y.size() >= 3.
SegmentedFit fit_two_segment(std::span<const double> y);

}  // namespace metalens
