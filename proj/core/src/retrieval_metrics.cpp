#include "raid/retrieval_metrics.hpp"

namespace raid::metrics {

std::vector<PrecisionPoint> precision_at_n(const std::vector<bool>& relevant) {
  std::vector<PrecisionPoint> out;
  out.reserve(relevant.size());
  int hits = 0;
  for (std::size_t i = 0; i < relevant.size(); ++i) {
    if (relevant[i]) ++hits;
    const int n = static_cast<int>(i + 1);
    out.push_back({n, static_cast<double>(hits) / n});
  }
  return out;
}

}  // namespace raid::metrics
