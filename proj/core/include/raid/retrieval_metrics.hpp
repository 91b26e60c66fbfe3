#pragma once

#include <vector>

namespace raid::metrics {

struct PrecisionPoint {
  int n = 0;
  double precision = 0.0;
};

/// precision(n) = relevant among the first n / n, for n = 1..relevant.size().
std::vector<PrecisionPoint> precision_at_n(const std::vector<bool>& relevant);

}  // namespace raid::metrics
