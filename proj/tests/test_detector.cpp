#include <cmath>
#include <limits>

#include "core/detector.hpp"
#include "doctest.h"
#include "util/error.hpp"
#include "util/rng.hpp"

using namespace nevo;

namespace {

ScoreSeries make_scores(std::vector<double> values, int window = 1) {
  ScoreSeries s;
  s.scores = std::move(values);
  s.window = window;
  return s;
}

EnsembleMember member(std::vector<double> values, double mean, int id = 0) {
  EnsembleMember m;
  m.subspace = Subspace::full(2, id);
  m.scores = make_scores(std::move(values));
  m.train_mean_score = mean;
  return m;
}

// Exhaustive oracle: every achievable verdict (one threshold strictly
// below each distinct value, plus above-max), best F1 wins.
double brute_force_best_f1(const ScoreSeries& scores, const std::vector<int>& truth) {
  std::vector<double> distinct = scores.scores;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> thresholds;
  for (std::size_t i = 0; i < distinct.size(); ++i)
    thresholds.push_back(i == 0 ? distinct[0] - 1.0 : (distinct[i - 1] + distinct[i]) / 2.0);
  thresholds.push_back(distinct.back() + 1.0);

  double best = 0.0;
  for (double t : thresholds) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool pred = scores.scores[i] > t;
      if (pred && truth[i]) ++tp;
      if (pred && !truth[i]) ++fp;
      if (!pred && truth[i]) ++fn;
    }
    const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
    const double r = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    best = std::max(best, f1);
  }
  return best;
}

}  // namespace

TEST_SUITE("detector") {
  TEST_CASE("single member ensembles to its normalized scores") {
    const ScoreSeries out = ensemble_score({member({1.0, 2.0, 4.0}, 2.0)});
    CHECK(out.scores == std::vector<double>{0.5, 1.0, 2.0});
  }

  TEST_CASE("all-zero member never wins the max") {
    const ScoreSeries out =
        ensemble_score({member({0.0, 0.0, 0.0}, 1.0, 0), member({1.0, 3.0, 2.0}, 1.0, 1)});
    CHECK(out.scores == std::vector<double>{1.0, 3.0, 2.0});
  }

  TEST_CASE("three members match the hand-computed max of normalized scores") {
    // member A: scores {1,2,3,4,5} mean 2 -> {0.5,1,1.5,2,2.5}
    // member B: scores {4,1,0,2,2} mean 4 -> {1,0.25,0,0.5,0.5}
    // member C: scores {0.6,0.6,3,0.3,9} mean 0.6 -> {1,1,5,0.5,15}
    const ScoreSeries out = ensemble_score({member({1, 2, 3, 4, 5}, 2.0, 0),
                                            member({4, 1, 0, 2, 2}, 4.0, 1),
                                            member({0.6, 0.6, 3, 0.3, 9}, 0.6, 2)});
    const std::vector<double> expect{1.0, 1.0, 5.0, 2.0, 15.0};
    REQUIRE(out.scores.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
      CHECK(out.scores[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  }

  TEST_CASE("ensemble rejects mismatched lengths") {
    CHECK_THROWS_AS(ensemble_score({member({1, 2}, 1.0, 0), member({1, 2, 3}, 1.0, 1)}), Error);
  }

  TEST_CASE("detect thresholds strictly") {
    const Verdict v = detect(make_scores({1, 3, 2}), 2.0);
    CHECK(v.labels == std::vector<int>{0, 1, 0});
    CHECK(detect(make_scores({1, 3, 2}), 5.0).labels == std::vector<int>{0, 0, 0});
    CHECK(detect(make_scores({1, 3, 2}), 1e-12).labels == std::vector<int>{1, 1, 1});
    CHECK_THROWS_AS(detect(make_scores({1.0}), 0.0), Error);
  }

  TEST_CASE("perfect verdict scores f1 = 1") {
    Verdict v;
    v.labels = {0, 1, 1, 0};
    const EvalReport r = pointwise_f1(v, {0, 1, 1, 0});
    CHECK(r.f1 == 1.0);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
  }

  TEST_CASE("all-negative verdict scores f1 = 0 against positives") {
    Verdict v;
    v.labels = {0, 0, 0};
    const EvalReport r = pointwise_f1(v, {0, 1, 1});
    CHECK(r.f1 == 0.0);
    CHECK(r.recall == 0.0);
  }

  TEST_CASE("hand case: pred 1100 truth 1010") {
    Verdict v;
    v.labels = {1, 1, 0, 0};
    const EvalReport r = pointwise_f1(v, {1, 0, 1, 0});
    CHECK(r.precision == doctest::Approx(0.5));
    CHECK(r.recall == doctest::Approx(0.5));
    CHECK(r.f1 == doctest::Approx(0.5));
    CHECK(r.tp + r.fp + r.fn + r.tn == 4);
  }

  TEST_CASE("counts always sum to the series length") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      Verdict v;
      std::vector<int> truth;
      for (int i = 0; i < 31; ++i) {
        v.labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
        truth.push_back(rng.bernoulli(0.2) ? 1 : 0);
      }
      const EvalReport r = pointwise_f1(v, truth);
      CHECK(r.tp + r.fp + r.fn + r.tn == 31);
    }
  }

  TEST_CASE("sweep finds the separating threshold") {
    const auto [t, r] =
        best_f1_sweep(make_scores({0.1, 0.2, 0.9, 1.0}), {0, 0, 1, 1});
    CHECK(r.f1 == 1.0);
    CHECK(t >= 0.2);
    CHECK(t < 0.9);
  }

  TEST_CASE("constant scores reduce to the all-positive verdict") {
    const auto [t, r] = best_f1_sweep(make_scores({2, 2, 2, 2}), {0, 1, 0, 1});
    // All-positive: precision 0.5, recall 1 -> f1 = 2/3.
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(t < 2.0);
  }

  TEST_CASE("sweep requires a positive label") {
    CHECK_THROWS_AS(best_f1_sweep(make_scores({1, 2}), {0, 0}), Error);
  }

  TEST_CASE("sweep ties break toward the larger threshold") {
    // Any threshold >= 3 yields the same all-negative f1=0 only when no
    // positive exists, so use a case where two thresholds tie at f1 > 0.
    const auto [t, r] = best_f1_sweep(make_scores({1, 2, 3, 4}), {0, 1, 1, 1});
    // threshold 1: pred {0,1,1,1} f1 = 1.0 -- unique best here.
    CHECK(r.f1 == 1.0);
    CHECK(t == 1.0);
  }

  TEST_CASE("sweep matches brute force on random instances") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> scores;
      std::vector<int> truth;
      bool any = false;
      for (int i = 0; i < 50; ++i) {
        scores.push_back(std::round(rng.uniform(0.0, 6.0) * 4.0) / 4.0);  // ties likely
        const bool pos = rng.bernoulli(0.25);
        truth.push_back(pos ? 1 : 0);
        any |= pos;
      }
      if (!any) truth[0] = 1;
      const auto [t, r] = best_f1_sweep(make_scores(scores), truth);
      CHECK(r.f1 == doctest::Approx(brute_force_best_f1(make_scores(scores), truth))
                        .epsilon(1e-12));
    }
  }

  TEST_CASE("raising the threshold never increases detections") {
    Rng rng(123);
    std::vector<double> scores;
    for (int i = 0; i < 64; ++i) scores.push_back(rng.uniform(0.0, 3.0));
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    std::int64_t prev = std::numeric_limits<std::int64_t>::max();
    for (double t : sorted) {
      const Verdict v = detect(make_scores(scores), std::max(t, 1e-9));
      std::int64_t count = 0;
      for (int l : v.labels) count += l;
      CHECK(count <= prev);
      prev = count;
    }
  }

  TEST_CASE("fixed threshold is factor times the train mean") {
    CHECK(fixed_threshold(make_scores({1, 2, 3}), 2.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(fixed_threshold(make_scores({}), 2.0), Error);
  }

  TEST_CASE("report text carries the f1 identity") {
    Verdict v;
    v.labels = {1, 0, 1, 0};
    const EvalReport r = pointwise_f1(v, {1, 1, 0, 0});
    const std::string text = report_to_text(r, "fixed");
    CHECK(text.find("precision:") != std::string::npos);
    CHECK(text.find("f1:") != std::string::npos);
    const double recomputed =
        (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    CHECK(r.f1 == doctest::Approx(recomputed));
  }
}
