#pragma once

#include <vector>

namespace nevo {

// Per-time-point reconstruction errors aligned with the scored series.
// Positions before the first full window repeat the first computed score,
// so scores.size() always equals the series length.
struct ScoreSeries {
  std::vector<double> scores;
  int window = 1;
};

}  // namespace nevo
