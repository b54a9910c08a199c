#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/genome.hpp"
#include "core/score.hpp"

namespace nevo {

struct Verdict {
  std::vector<int> labels;
  double threshold = 0.0;
  enum class Source { fixed, sweep } source = Source::fixed;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double threshold = 0.0;
};

struct EnsembleMember {
  Subspace subspace;
  ScoreSeries scores;
  double train_mean_score = 1.0;  // normalizer fitted on training data
};

// Max over members of the member's scores divided by its training mean, so
// members over different subspaces are commensurable and localized spikes
// survive aggregation.
ScoreSeries ensemble_score(const std::vector<EnsembleMember>& members);

Verdict detect(const ScoreSeries& scores, double threshold);

EvalReport pointwise_f1(const Verdict& verdict, const std::vector<int>& truth);

// Maximizes point-wise F1 over thresholds at every distinct score value,
// plus +inf and a below-minimum candidate (the all-positive verdict). Ties
// break toward the larger threshold.
std::pair<double, EvalReport> best_f1_sweep(const ScoreSeries& scores,
                                            const std::vector<int>& truth);

// Deployment threshold: factor times the mean training-series score.
double fixed_threshold(const ScoreSeries& train_scores, double factor);

std::string report_to_text(const EvalReport& report, const std::string& mode);

}  // namespace nevo
