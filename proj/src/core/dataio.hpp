#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/genome.hpp"
#include "core/tensor.hpp"

namespace nevo {

struct ImputationReport {
  std::int64_t imputed_cells = 0;
  std::vector<int> lines;  // 1-based file lines that needed imputation
};

struct TimeSeriesDataset {
  std::vector<std::string> sensor_names;
  Tensor values;  // (T, N)
  std::vector<int> labels;  // empty when unlabeled, else length T of {0,1}
  std::vector<std::pair<double, double>> normalization;  // per-sensor fitted (min, max)
  ImputationReport imputation;

  std::int64_t rows() const { return values.rank() == 2 ? values.dim(0) : 0; }
  int sensors() const { return values.rank() == 2 ? static_cast<int>(values.dim(1)) : 0; }
  bool has_labels() const { return !labels.empty(); }
};

// CSV with a header row of sensor names and an optional trailing "label"
// column. Unparsable or missing cells are forward-filled and counted.
TimeSeriesDataset load_csv(const std::string& path, bool require_labels);
TimeSeriesDataset parse_csv(const std::string& text, bool require_labels,
                            const std::string& origin = "<memory>");
std::string to_csv(const TimeSeriesDataset& ds);
void save_csv(const TimeSeriesDataset& ds, const std::string& path);

// Per-sensor min-max fitted on rows [fit_begin, fit_end), applied to all
// rows. Constant sensors map to zero over the fit range.
TimeSeriesDataset normalize(const TimeSeriesDataset& ds, std::int64_t fit_begin,
                            std::int64_t fit_end);

// Applies previously fitted per-sensor (min, max) ranges.
TimeSeriesDataset apply_normalization(const TimeSeriesDataset& ds,
                                      const std::vector<std::pair<double, double>>& ranges);

// Stride-1 sliding windows restricted to subspace columns: (T-w+1, w, |s|).
Tensor windows(const TimeSeriesDataset& ds, int w, const Subspace& subspace);
// Full series restricted to subspace columns: (T, |s|).
Tensor series_in_subspace(const TimeSeriesDataset& ds, const Subspace& subspace);
// Row slice [begin, end) keeping labels and names.
TimeSeriesDataset slice_rows(const TimeSeriesDataset& ds, std::int64_t begin, std::int64_t end);

enum class AnomalyKind { spike, drift, stuck, correlation_break };

const char* to_string(AnomalyKind k);
AnomalyKind anomaly_kind_from_string(const std::string& s);

struct SynthConfig {
  int sensors = 8;
  std::int64_t length = 4000;
  double anomaly_rate = 0.05;
  std::vector<AnomalyKind> anomaly_kinds = {AnomalyKind::spike, AnomalyKind::drift,
                                            AnomalyKind::stuck, AnomalyKind::correlation_break};
  std::uint64_t seed = 1;
};

struct AnomalySegment {
  AnomalyKind kind;
  int sensor;
  std::int64_t begin;
  std::int64_t end;  // exclusive
};

struct SynthResult {
  TimeSeriesDataset data;
  std::vector<AnomalySegment> segments;
  std::int64_t train_rows = 0;  // anomaly-free prefix length
};

// Correlated sinusoid sensors in two dependency groups with labeled
// anomalies injected after the clean 60% training prefix.
SynthResult synth_generate(const SynthConfig& cfg);

std::string synth_metadata(const SynthConfig& cfg, const SynthResult& result);

}  // namespace nevo
