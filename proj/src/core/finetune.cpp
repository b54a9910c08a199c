#include "core/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "util/error.hpp"
#include "util/parallel.hpp"
#include "util/text.hpp"

namespace nevo {

std::vector<double> perturb_weights(const std::vector<double>& weights, double p_m, double tau,
                                    RandomSource& rng) {
  if (p_m < 0.0 || p_m > 1.0) raise(ErrorCode::invalid_argument, "p_m must be in [0, 1]");
  if (tau < 0.0) raise(ErrorCode::invalid_argument, "tau must be >= 0");
  std::vector<double> out = weights;
  for (double& w : out) {
    if (!rng.bernoulli(p_m)) continue;
    w *= 1.0 + rng.sign() * p_m * tau;
  }
  return out;
}

std::int64_t fp_count(const ScoreSeries& scores, double fp_factor) {
  if (!(fp_factor > 0.0)) raise(ErrorCode::invalid_argument, "fp_factor must be > 0");
  if (scores.scores.empty()) raise(ErrorCode::series_too_short, "empty score series");
  double mean = 0.0;
  for (double s : scores.scores) mean += s;
  mean /= static_cast<double>(scores.scores.size());
  const double threshold = fp_factor * mean;
  std::int64_t count = 0;
  for (double s : scores.scores)
    if (s > threshold) ++count;
  return count;
}

std::int64_t fp_count(const Model& model, const Tensor& normal_series, double fp_factor) {
  return fp_count(model.reconstruction_errors(normal_series), fp_factor);
}

double weight_distance(const Model& a, const Model& b) {
  const auto la = a.layers();
  const auto lb = b.layers();
  auto mismatch = [&] {
    raise(ErrorCode::architecture_mismatch, "weight distance requires identical architectures");
  };
  if (la.size() != lb.size() || a.weight_count() != b.weight_count()) mismatch();
  for (std::size_t i = 0; i < la.size(); ++i)
    if (la[i].kind != lb[i].kind || la[i].in_channels != lb[i].in_channels ||
        la[i].out_channels != lb[i].out_channels || la[i].weight_count != lb[i].weight_count)
      mismatch();

  const std::vector<double> wa = a.weights();
  const std::vector<double> wb = b.weights();
  double total = 0.0;
  for (const auto& layer : la) {
    double sq = 0.0;
    for (std::size_t i = layer.weight_offset; i < layer.weight_offset + layer.weight_count; ++i) {
      const double d = wa[i] - wb[i];
      sq += d * d;
    }
    total += std::sqrt(sq);
  }
  return total;
}

FineTuneResult finetune(const Model& champion, const Tensor& normal_series,
                        const FineTuneConfig& cfg) {
  if (cfg.population < 1) raise(ErrorCode::invalid_argument, "population must be >= 1");
  if (cfg.iterations < 1) raise(ErrorCode::invalid_argument, "iterations must be >= 1");
  if (cfg.stagnation_window < 1)
    raise(ErrorCode::invalid_argument, "stagnation_window must be >= 1");
  if (!(cfg.fp_factor > 0.0)) raise(ErrorCode::invalid_argument, "fp_factor must be > 0");

  Rng rng(cfg.seed);
  FineTuneResult result;

  Model current = champion;
  std::int64_t current_fp = fp_count(current, normal_series, cfg.fp_factor);
  std::vector<std::int64_t> segment;  // selected FP per iteration since last restart
  segment.push_back(current_fp);

  for (int g = 0; g < cfg.iterations; ++g) {
    // Perturbations draw from the master stream up front; evaluations are
    // pure and may run on any schedule.
    const std::vector<double> base = current.weights();
    std::vector<std::vector<double>> variant_weights;
    variant_weights.reserve(static_cast<std::size_t>(cfg.population));
    for (int i = 0; i < cfg.population; ++i)
      variant_weights.push_back(perturb_weights(base, cfg.p_m, cfg.tau, rng));

    std::vector<Model> variants(static_cast<std::size_t>(cfg.population), current);
    std::vector<std::int64_t> variant_fp(static_cast<std::size_t>(cfg.population), 0);
    parallel_for(static_cast<std::size_t>(cfg.population), cfg.workers, [&](std::size_t i) {
      variants[i].set_weights(variant_weights[i]);
      variant_fp[i] = fp_count(variants[i], normal_series, cfg.fp_factor);
    });

    // Elitist argmin over the variants plus the incumbent; the incumbent
    // wins ties so the trajectory is visibly monotone.
    int best = -1;
    std::int64_t best_fp = current_fp;
    for (int i = 0; i < cfg.population; ++i)
      if (variant_fp[static_cast<std::size_t>(i)] < best_fp) {
        best = i;
        best_fp = variant_fp[static_cast<std::size_t>(i)];
      }
    if (best >= 0) {
      current = variants[static_cast<std::size_t>(best)];
      current_fp = best_fp;
    }
    segment.push_back(current_fp);

    FineTuneLogEntry entry;
    entry.iteration = g;
    entry.fp = current_fp;

    const bool zero = current_fp == 0;
    const bool plateau =
        segment.size() >= static_cast<std::size_t>(cfg.stagnation_window) + 1 &&
        std::all_of(segment.end() - cfg.stagnation_window - 1, segment.end(),
                    [&](std::int64_t v) { return v == current_fp; });

    if (zero || plateau) {
      result.models.push_back(current);
      entry.restart = true;
      if (zero) {
        result.log.push_back(entry);
        break;  // nothing left to minimize
      }
      // Restart from the population member farthest from the banked model.
      int pick = 0;
      double best_dist = -1.0;
      for (int i = 0; i < cfg.population; ++i) {
        const double d = weight_distance(current, variants[static_cast<std::size_t>(i)]);
        if (d > best_dist) {
          best_dist = d;
          pick = i;
        }
      }
      entry.restart_distance = best_dist;
      current = variants[static_cast<std::size_t>(pick)];
      current_fp = variant_fp[static_cast<std::size_t>(pick)];
      segment.clear();
      segment.push_back(current_fp);
    }
    result.log.push_back(entry);
  }

  if (result.models.empty()) result.models.push_back(current);
  return result;
}

std::string finetune_log_to_text(const std::vector<FineTuneLogEntry>& log) {
  std::ostringstream out;
  out << "nevo-finetune-log v1\n";
  for (const auto& e : log) {
    out << "iter: " << e.iteration << " fp=" << e.fp << " restart=" << (e.restart ? 1 : 0);
    if (e.restart) out << " distance=" << format_double(e.restart_distance);
    out << "\n";
  }
  return out.str();
}

}  // namespace nevo
