#include <cmath>

#include "core/dataio.hpp"
#include "doctest.h"
#include "util/error.hpp"

using namespace nevo;

TEST_SUITE("dataio") {
  TEST_CASE("plain csv parses with names preserved") {
    const std::string csv = "a,b,c\n1,2,3\n4,5,6\n7,8,9\n10,11,12\n13,14,15\n";
    const TimeSeriesDataset ds = parse_csv(csv, false);
    CHECK(ds.rows() == 5);
    CHECK(ds.sensors() == 3);
    CHECK(ds.sensor_names == std::vector<std::string>{"a", "b", "c"});
    CHECK(ds.values.at(0, 0) == 1.0);
    CHECK(ds.values.at(4, 2) == 15.0);
    CHECK_FALSE(ds.has_labels());
  }

  TEST_CASE("label column populates labels") {
    const std::string csv = "a,b,label\n1,2,0\n3,4,1\n5,6,0\n";
    const TimeSeriesDataset ds = parse_csv(csv, true);
    CHECK(ds.sensors() == 2);
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
  }

  TEST_CASE("missing labels are fatal only when required") {
    const std::string csv = "a,b\n1,2\n";
    CHECK_NOTHROW(parse_csv(csv, false));
    CHECK_THROWS_AS(parse_csv(csv, true), Error);
  }

  TEST_CASE("NaN cell forward-fills and is counted with its line") {
    const std::string csv = "a,b\n1,10\nNaN,20\n3,30\n";
    const TimeSeriesDataset ds = parse_csv(csv, false);
    CHECK(ds.values.at(1, 0) == 1.0);  // forward-filled from row 0
    CHECK(ds.imputation.imputed_cells == 1);
    REQUIRE(ds.imputation.lines.size() == 1);
    CHECK(ds.imputation.lines[0] == 3);  // 1-based file line
  }

  TEST_CASE("leading gap takes the first observed value") {
    const std::string csv = "a\n\n,\n";  // blank line skipped; lone comma row
    const std::string csv2 = "a\nNaN\n5\n7\n";
    const TimeSeriesDataset ds = parse_csv(csv2, false);
    CHECK(ds.values.at(0, 0) == 5.0);
    CHECK(ds.imputation.imputed_cells == 1);
    (void)csv;
  }

  TEST_CASE("malformed header and ragged rows are fatal") {
    CHECK_THROWS_AS(parse_csv("", false), Error);
    CHECK_THROWS_AS(parse_csv("a,,b\n1,2,3\n", false), Error);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n", false), Error);
  }

  TEST_CASE("normalize maps the fit range to [0,1]") {
    const std::string csv = "a\n2\n3\n4\n";
    const TimeSeriesDataset ds = normalize(parse_csv(csv, false), 0, 3);
    CHECK(ds.values.at(0, 0) == 0.0);
    CHECK(ds.values.at(1, 0) == doctest::Approx(0.5));
    CHECK(ds.values.at(2, 0) == 1.0);
    REQUIRE(ds.normalization.size() == 1);
    CHECK(ds.normalization[0].first == 2.0);
    CHECK(ds.normalization[0].second == 4.0);
  }

  TEST_CASE("constant sensors map to zero") {
    const std::string csv = "a,b\n5,1\n5,2\n5,3\n";
    const TimeSeriesDataset ds = normalize(parse_csv(csv, false), 0, 3);
    for (int r = 0; r < 3; ++r) CHECK(ds.values.at(r, 0) == 0.0);
  }

  TEST_CASE("rows outside the fit range may leave [0,1]") {
    const std::string csv = "a\n2\n4\n8\n";
    const TimeSeriesDataset ds = normalize(parse_csv(csv, false), 0, 2);
    // Fit on {2,4}: row 2 maps to (8-2)/2 = 3.
    CHECK(ds.values.at(2, 0) == doctest::Approx(3.0));
  }

  TEST_CASE("normalize is idempotent on normalized data") {
    Rng rng(3);
    SynthConfig cfg;
    cfg.sensors = 4;
    cfg.length = 200;
    cfg.seed = 5;
    TimeSeriesDataset ds = synth_generate(cfg).data;
    const TimeSeriesDataset once = normalize(ds, 0, ds.rows());
    const TimeSeriesDataset twice = normalize(once, 0, once.rows());
    for (std::int64_t r = 0; r < ds.rows(); ++r)
      for (int c = 0; c < ds.sensors(); ++c)
        CHECK(std::abs(once.values.at(r, c) - twice.values.at(r, c)) < 1e-12);
  }

  TEST_CASE("windows boundary cases") {
    const std::string csv = "a,b\n1,2\n3,4\n5,6\n7,8\n9,10\n";
    const TimeSeriesDataset ds = parse_csv(csv, false);
    CHECK(windows(ds, 5, Subspace::full(2)).dim(0) == 1);
    CHECK(windows(ds, 1, Subspace::full(2)).dim(0) == 5);
    CHECK_THROWS_AS(windows(ds, 6, Subspace::full(2)), Error);
  }

  TEST_CASE("window contents reproduce the source rows") {
    const std::string csv = "a,b\n1,2\n3,4\n5,6\n7,8\n";
    const TimeSeriesDataset ds = parse_csv(csv, false);
    const Tensor t = windows(ds, 2, Subspace::full(2));
    REQUIRE(t.dim(0) == 3);
    for (std::int64_t i = 0; i < 3; ++i)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(t.at(i, r, c) == ds.values.at(i + r, c));
  }

  TEST_CASE("windows restrict to subspace columns") {
    const std::string csv = "a,b,c\n1,2,3\n4,5,6\n7,8,9\n";
    const TimeSeriesDataset ds = parse_csv(csv, false);
    Subspace s;
    s.feature_indices = {0, 2};
    const Tensor t = windows(ds, 2, s);
    CHECK(t.dim(2) == 2);
    CHECK(t.at(0, 0, 1) == 3.0);
    CHECK(t.at(1, 1, 0) == 7.0);
  }

  TEST_CASE("csv round-trips through the writer") {
    Rng rng(8);
    SynthConfig cfg;
    cfg.sensors = 3;
    cfg.length = 120;
    cfg.seed = 9;
    const TimeSeriesDataset ds = synth_generate(cfg).data;
    const TimeSeriesDataset back = parse_csv(to_csv(ds), true);
    REQUIRE(back.rows() == ds.rows());
    REQUIRE(back.sensors() == ds.sensors());
    CHECK(back.labels == ds.labels);
    for (std::int64_t r = 0; r < ds.rows(); ++r)
      for (int c = 0; c < ds.sensors(); ++c)
        CHECK(back.values.at(r, c) == ds.values.at(r, c));
  }

  TEST_CASE("synthetic benchmark respects the anomaly rate within 20 percent") {
    SynthConfig cfg;
    cfg.sensors = 8;
    cfg.length = 4000;
    cfg.anomaly_rate = 0.05;
    cfg.seed = 11;
    const SynthResult result = synth_generate(cfg);
    std::int64_t labeled = 0;
    for (int v : result.data.labels) labeled += v;
    const double fraction = static_cast<double>(labeled) / static_cast<double>(cfg.length);
    CHECK(fraction >= 0.8 * cfg.anomaly_rate);
    CHECK(fraction <= 1.2 * cfg.anomaly_rate);
  }

  TEST_CASE("training prefix is anomaly-free") {
    SynthConfig cfg;
    cfg.sensors = 5;
    cfg.length = 1000;
    cfg.seed = 12;
    const SynthResult result = synth_generate(cfg);
    CHECK(result.train_rows == 600);
    for (std::int64_t t = 0; t < result.train_rows; ++t)
      REQUIRE(result.data.labels[static_cast<std::size_t>(t)] == 0);
  }

  TEST_CASE("generation is deterministic per seed") {
    SynthConfig cfg;
    cfg.sensors = 4;
    cfg.length = 500;
    cfg.seed = 13;
    const SynthResult a = synth_generate(cfg);
    const SynthResult b = synth_generate(cfg);
    CHECK(a.data.values.data() == b.data.values.data());
    CHECK(a.data.labels == b.data.labels);
    CHECK(a.segments.size() == b.segments.size());
  }

  TEST_CASE("metadata names every segment") {
    SynthConfig cfg;
    cfg.sensors = 4;
    cfg.length = 400;
    cfg.seed = 14;
    const SynthResult r = synth_generate(cfg);
    const std::string meta = synth_metadata(cfg, r);
    CHECK(meta.find("nevo-synth-meta v1") == 0);
    std::size_t count = 0, pos = 0;
    while ((pos = meta.find("segment:", pos)) != std::string::npos) {
      ++count;
      pos += 8;
    }
    CHECK(count == r.segments.size());
  }

  TEST_CASE("apply_normalization reuses fitted ranges") {
    const std::string csv = "a\n2\n4\n";
    const TimeSeriesDataset fit = normalize(parse_csv(csv, false), 0, 2);
    const TimeSeriesDataset other = parse_csv("a\n3\n5\n", false);
    const TimeSeriesDataset mapped = apply_normalization(other, fit.normalization);
    CHECK(mapped.values.at(0, 0) == doctest::Approx(0.5));
    CHECK(mapped.values.at(1, 0) == doctest::Approx(1.5));
  }
}
