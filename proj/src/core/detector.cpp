#include "core/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "util/error.hpp"
#include "util/text.hpp"

namespace nevo {

ScoreSeries ensemble_score(const std::vector<EnsembleMember>& members) {
  if (members.empty()) raise(ErrorCode::invalid_argument, "ensemble needs at least one member");
  const std::size_t len = members.front().scores.scores.size();
  for (const auto& m : members)
    if (m.scores.scores.size() != len)
      raise(ErrorCode::length_mismatch, "ensemble member score lengths differ");

  ScoreSeries out;
  out.window = members.front().scores.window;
  for (const auto& m : members) out.window = std::max(out.window, m.scores.window);
  out.scores.assign(len, 0.0);
  for (const auto& m : members) {
    const double norm = std::max(m.train_mean_score, 1e-12);
    for (std::size_t t = 0; t < len; ++t)
      out.scores[t] = std::max(out.scores[t], m.scores.scores[t] / norm);
  }
  return out;
}

Verdict detect(const ScoreSeries& scores, double threshold) {
  if (!(threshold > 0.0)) raise(ErrorCode::invalid_argument, "threshold must be > 0");
  Verdict v;
  v.threshold = threshold;
  v.labels.reserve(scores.scores.size());
  for (double s : scores.scores) v.labels.push_back(s > threshold ? 1 : 0);
  return v;
}

EvalReport pointwise_f1(const Verdict& verdict, const std::vector<int>& truth) {
  if (verdict.labels.size() != truth.size())
    raise(ErrorCode::length_mismatch, "verdict and truth lengths differ");
  EvalReport r;
  r.threshold = verdict.threshold;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pred = verdict.labels[i] != 0;
    const bool pos = truth[i] != 0;
    if (pred && pos) ++r.tp;
    else if (pred && !pos) ++r.fp;
    else if (!pred && pos) ++r.fn;
    else ++r.tn;
  }
  r.precision = (r.tp + r.fp > 0) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn > 0) ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall > 0.0)
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

std::pair<double, EvalReport> best_f1_sweep(const ScoreSeries& scores,
                                            const std::vector<int>& truth) {
  if (scores.scores.size() != truth.size())
    raise(ErrorCode::length_mismatch, "scores and truth lengths differ");
  if (std::find(truth.begin(), truth.end(), 1) == truth.end())
    raise(ErrorCode::invalid_argument, "sweep needs at least one positive truth label");

  std::vector<double> candidates = scores.scores;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  // Below-minimum candidate exposes the all-positive verdict; +inf the
  // all-negative one.
  if (candidates.front() > 0.0) candidates.insert(candidates.begin(), candidates.front() / 2.0);
  candidates.push_back(std::numeric_limits<double>::infinity());

  EvalReport best;
  double best_threshold = candidates.back();
  bool have = false;
  for (double t : candidates) {
    Verdict v;
    v.threshold = t;
    v.labels.reserve(scores.scores.size());
    for (double s : scores.scores) v.labels.push_back(s > t ? 1 : 0);
    const EvalReport r = pointwise_f1(v, truth);
    if (!have || r.f1 > best.f1 || (r.f1 == best.f1 && t > best_threshold)) {
      best = r;
      best_threshold = t;
      have = true;
    }
  }
  best.threshold = best_threshold;
  return {best_threshold, best};
}

double fixed_threshold(const ScoreSeries& train_scores, double factor) {
  if (!(factor > 0.0)) raise(ErrorCode::invalid_argument, "factor must be > 0");
  if (train_scores.scores.empty())
    raise(ErrorCode::series_too_short, "empty training scores");
  double mean = 0.0;
  for (double s : train_scores.scores) mean += s;
  mean /= static_cast<double>(train_scores.scores.size());
  return factor * mean;
}

std::string report_to_text(const EvalReport& r, const std::string& mode) {
  std::ostringstream out;
  out << "nevo-report v1\n";
  out << "mode: " << mode << "\n";
  out << "threshold: " << format_double(r.threshold) << "\n";
  out << "precision: " << format_double(r.precision) << "\n";
  out << "recall: " << format_double(r.recall) << "\n";
  out << "f1: " << format_double(r.f1) << "\n";
  out << "tp: " << r.tp << "\n";
  out << "fp: " << r.fp << "\n";
  out << "fn: " << r.fn << "\n";
  out << "tn: " << r.tn << "\n";
  return out.str();
}

}  // namespace nevo
