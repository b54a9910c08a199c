#pragma once

#include <cstdint>
#include <vector>

#include "core/model.hpp"
#include "core/score.hpp"
#include "util/rng.hpp"

namespace nevo {

struct FineTuneConfig {
  int population = 8;       // variants per iteration
  int iterations = 50;      // iteration budget
  double p_m = 0.05;        // per-weight mutation probability
  double tau = 0.05;        // mutation power
  double fp_factor = 2.0;   // false-positive threshold factor
  int stagnation_window = 5;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Multiplicative weight mutation: each weight is selected independently
// with probability p_m and becomes w * (1 +/- p_m * tau), sign equiprobable.
std::vector<double> perturb_weights(const std::vector<double>& weights, double p_m, double tau,
                                    RandomSource& rng);

// Count of scores strictly above fp_factor times the mean score.
std::int64_t fp_count(const ScoreSeries& scores, double fp_factor);
std::int64_t fp_count(const Model& model, const Tensor& normal_series, double fp_factor);

// Sum over layers of the Euclidean norm of the per-layer weight difference.
double weight_distance(const Model& a, const Model& b);

struct FineTuneLogEntry {
  int iteration = 0;
  std::int64_t fp = 0;
  bool restart = false;        // a model was moved into the result set here
  double restart_distance = 0.0;
};

struct FineTuneResult {
  std::vector<Model> models;  // the result set R, never empty
  std::vector<FineTuneLogEntry> log;
};

// Elitist variant search on the false-positive count. A plateau over
// stagnation_window iterations banks the current model and restarts from
// the most weight-distant population member; reaching zero false positives
// banks the model and terminates.
FineTuneResult finetune(const Model& champion, const Tensor& normal_series,
                        const FineTuneConfig& cfg);

std::string finetune_log_to_text(const std::vector<FineTuneLogEntry>& log);

}  // namespace nevo
