#include "core/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "util/error.hpp"
#include "util/text.hpp"

namespace nevo {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_cell(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  double v = 0.0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

}  // namespace

TimeSeriesDataset parse_csv(const std::string& text, bool require_labels,
                            const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  if (!std::getline(in, raw))
    raise(ErrorCode::parse_error, origin + ": empty file, expected a header row");
  ++lineno;
  if (!raw.empty() && raw.back() == '\r') raw.pop_back();
  auto names = split_csv_line(raw);
  if (names.empty()) raise(ErrorCode::parse_error, origin + ": malformed header");
  for (const auto& n : names)
    if (n.empty())
      raise(ErrorCode::parse_error, origin + ": header has an empty column name (line 1)");

  bool labeled = !names.empty() && names.back() == "label";
  if (labeled) names.pop_back();
  if (names.empty()) raise(ErrorCode::parse_error, origin + ": no sensor columns in header");
  if (require_labels && !labeled)
    raise(ErrorCode::data_error, origin + ": a 'label' column is required");

  const std::size_t cols = names.size() + (labeled ? 1 : 0);
  std::vector<double> cells;
  std::vector<bool> missing;
  std::vector<int> labels;
  std::vector<int> missing_lines;
  std::int64_t rows = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty()) continue;
    const auto parts = split_csv_line(raw);
    if (parts.size() != cols)
      raise(ErrorCode::parse_error, origin + ": line " + std::to_string(lineno) + " has " +
                                        std::to_string(parts.size()) + " cells, expected " +
                                        std::to_string(cols));
    bool line_missing = false;
    for (std::size_t c = 0; c < names.size(); ++c) {
      double v = 0.0;
      if (parse_cell(parts[c], v)) {
        cells.push_back(v);
        missing.push_back(false);
      } else {
        cells.push_back(0.0);
        missing.push_back(true);
        line_missing = true;
      }
    }
    if (labeled) {
      double lv = 0.0;
      if (!parse_cell(parts.back(), lv))
        raise(ErrorCode::parse_error,
              origin + ": unparsable label at line " + std::to_string(lineno));
      labels.push_back(lv != 0.0 ? 1 : 0);
    }
    if (line_missing) missing_lines.push_back(lineno);
    ++rows;
  }
  if (rows == 0) raise(ErrorCode::parse_error, origin + ": no data rows");

  TimeSeriesDataset ds;
  ds.sensor_names = names;
  ds.labels = std::move(labels);
  ds.values = Tensor::zeros({rows, static_cast<std::int64_t>(names.size())});

  // Forward fill per sensor; leading gaps take the first observed value.
  const std::int64_t n = static_cast<std::int64_t>(names.size());
  for (std::int64_t c = 0; c < n; ++c) {
    double last = 0.0;
    bool seen = false;
    for (std::int64_t r = 0; r < rows; ++r) {
      const std::size_t idx = static_cast<std::size_t>(r * n + c);
      if (!missing[idx]) {
        last = cells[idx];
        seen = true;
      } else {
        ++ds.imputation.imputed_cells;
      }
      ds.values.at(r, c) = missing[idx] ? last : cells[idx];
    }
    if (!seen) continue;  // all-missing column stays zero
    double first_value = 0.0;
    std::int64_t first_row = -1;
    for (std::int64_t r = 0; r < rows; ++r) {
      const std::size_t idx = static_cast<std::size_t>(r * n + c);
      if (!missing[idx]) {
        first_value = cells[idx];
        first_row = r;
        break;
      }
    }
    for (std::int64_t r = 0; r < first_row; ++r) ds.values.at(r, c) = first_value;
  }
  ds.imputation.lines = std::move(missing_lines);
  return ds;
}

TimeSeriesDataset load_csv(const std::string& path, bool require_labels) {
  return parse_csv(read_file(path), require_labels, path);
}

std::string to_csv(const TimeSeriesDataset& ds) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ds.sensor_names.size(); ++i) {
    if (i) out << ",";
    out << ds.sensor_names[i];
  }
  if (ds.has_labels()) out << ",label";
  out << "\n";
  for (std::int64_t r = 0; r < ds.rows(); ++r) {
    for (int c = 0; c < ds.sensors(); ++c) {
      if (c) out << ",";
      out << format_double(ds.values.at(r, c));
    }
    if (ds.has_labels()) out << "," << ds.labels[static_cast<std::size_t>(r)];
    out << "\n";
  }
  return out.str();
}

void save_csv(const TimeSeriesDataset& ds, const std::string& path) {
  write_file(path, to_csv(ds));
}

TimeSeriesDataset normalize(const TimeSeriesDataset& ds, std::int64_t fit_begin,
                            std::int64_t fit_end) {
  if (fit_begin < 0 || fit_end > ds.rows() || fit_begin >= fit_end)
    raise(ErrorCode::invalid_argument, "normalize fit range out of bounds");
  TimeSeriesDataset out = ds;
  out.normalization.clear();
  for (int c = 0; c < ds.sensors(); ++c) {
    double lo = ds.values.at(fit_begin, c), hi = lo;
    for (std::int64_t r = fit_begin; r < fit_end; ++r) {
      lo = std::min(lo, ds.values.at(r, c));
      hi = std::max(hi, ds.values.at(r, c));
    }
    const double scale = (hi > lo) ? (hi - lo) : 1.0;
    for (std::int64_t r = 0; r < ds.rows(); ++r)
      out.values.at(r, c) = (ds.values.at(r, c) - lo) / scale;
    out.normalization.emplace_back(lo, hi);
  }
  return out;
}

TimeSeriesDataset apply_normalization(const TimeSeriesDataset& ds,
                                      const std::vector<std::pair<double, double>>& ranges) {
  if (static_cast<int>(ranges.size()) != ds.sensors())
    raise(ErrorCode::length_mismatch, "normalization ranges do not match sensor count");
  TimeSeriesDataset out = ds;
  out.normalization = ranges;
  for (int c = 0; c < ds.sensors(); ++c) {
    const auto [lo, hi] = ranges[static_cast<std::size_t>(c)];
    const double scale = (hi > lo) ? (hi - lo) : 1.0;
    for (std::int64_t r = 0; r < ds.rows(); ++r)
      out.values.at(r, c) = (ds.values.at(r, c) - lo) / scale;
  }
  return out;
}

namespace {

void check_subspace(const TimeSeriesDataset& ds, const Subspace& subspace) {
  if (subspace.feature_indices.empty())
    raise(ErrorCode::subspace_mismatch, "subspace is empty");
  for (int f : subspace.feature_indices)
    if (f < 0 || f >= ds.sensors())
      raise(ErrorCode::subspace_mismatch,
            "subspace feature " + std::to_string(f) + " outside sensor range");
}

}  // namespace

Tensor windows(const TimeSeriesDataset& ds, int w, const Subspace& subspace) {
  if (w < 1) raise(ErrorCode::invalid_argument, "window must be >= 1");
  check_subspace(ds, subspace);
  const std::int64_t T = ds.rows();
  if (T < w)
    raise(ErrorCode::series_too_short,
          "series length " + std::to_string(T) + " < window " + std::to_string(w));
  const auto& feats = subspace.feature_indices;
  const std::int64_t width = static_cast<std::int64_t>(feats.size());
  Tensor out = Tensor::zeros({T - w + 1, w, width});
  for (std::int64_t i = 0; i + w <= T; ++i)
    for (int r = 0; r < w; ++r)
      for (std::int64_t c = 0; c < width; ++c)
        out.at(i, r, c) = ds.values.at(i + r, feats[static_cast<std::size_t>(c)]);
  return out;
}

Tensor series_in_subspace(const TimeSeriesDataset& ds, const Subspace& subspace) {
  check_subspace(ds, subspace);
  const auto& feats = subspace.feature_indices;
  Tensor out = Tensor::zeros({ds.rows(), static_cast<std::int64_t>(feats.size())});
  for (std::int64_t r = 0; r < ds.rows(); ++r)
    for (std::size_t c = 0; c < feats.size(); ++c)
      out.at(r, static_cast<std::int64_t>(c)) = ds.values.at(r, feats[c]);
  return out;
}

TimeSeriesDataset slice_rows(const TimeSeriesDataset& ds, std::int64_t begin, std::int64_t end) {
  if (begin < 0 || end > ds.rows() || begin >= end)
    raise(ErrorCode::invalid_argument, "row slice out of bounds");
  TimeSeriesDataset out;
  out.sensor_names = ds.sensor_names;
  out.normalization = ds.normalization;
  out.values = Tensor::zeros({end - begin, ds.values.dim(1)});
  for (std::int64_t r = begin; r < end; ++r)
    for (int c = 0; c < ds.sensors(); ++c) out.values.at(r - begin, c) = ds.values.at(r, c);
  if (ds.has_labels())
    out.labels.assign(ds.labels.begin() + begin, ds.labels.begin() + end);
  return out;
}

const char* to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::spike: return "spike";
    case AnomalyKind::drift: return "drift";
    case AnomalyKind::stuck: return "stuck";
    case AnomalyKind::correlation_break: return "correlation-break";
  }
  return "?";
}

AnomalyKind anomaly_kind_from_string(const std::string& s) {
  if (s == "spike") return AnomalyKind::spike;
  if (s == "drift") return AnomalyKind::drift;
  if (s == "stuck") return AnomalyKind::stuck;
  if (s == "correlation-break") return AnomalyKind::correlation_break;
  raise(ErrorCode::parse_error, "unknown anomaly kind '" + s + "'");
}

SynthResult synth_generate(const SynthConfig& cfg) {
  if (cfg.sensors < 1) raise(ErrorCode::invalid_argument, "sensors must be >= 1");
  if (!(cfg.anomaly_rate > 0.0 && cfg.anomaly_rate < 0.2))
    raise(ErrorCode::invalid_argument, "anomaly_rate must be in (0, 0.2)");
  if (cfg.length < 50) raise(ErrorCode::invalid_argument, "length must be >= 50");
  if (cfg.anomaly_kinds.empty()) raise(ErrorCode::invalid_argument, "anomaly_kinds is empty");

  Rng rng(cfg.seed);
  const std::int64_t T = cfg.length;
  const int N = cfg.sensors;
  const int group_a = (N + 1) / 2;

  // Two latent drivers; each sensor follows its group's driver with its own
  // gain, offset, phase delay and noise.
  std::vector<double> gain(static_cast<std::size_t>(N)), offset(static_cast<std::size_t>(N));
  std::vector<int> delay(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    gain[static_cast<std::size_t>(j)] = rng.uniform(0.6, 1.4);
    offset[static_cast<std::size_t>(j)] = rng.uniform(-0.2, 0.2);
    delay[static_cast<std::size_t>(j)] = static_cast<int>(rng.uniform_int(0, 3));
  }
  auto driver_a = [](double t) {
    return std::sin(t * (2.0 * M_PI / 97.0)) + 0.3 * std::sin(t * (2.0 * M_PI / 23.0));
  };
  auto driver_b = [](double t) {
    return std::sin(t * (2.0 * M_PI / 61.0) + 1.3) + 0.3 * std::sin(t * (2.0 * M_PI / 17.0));
  };

  TimeSeriesDataset ds;
  ds.values = Tensor::zeros({T, N});
  ds.labels.assign(static_cast<std::size_t>(T), 0);
  for (int j = 0; j < N; ++j) {
    std::ostringstream name;
    name << "s" << j;
    ds.sensor_names.push_back(name.str());
  }
  for (std::int64_t t = 0; t < T; ++t)
    for (int j = 0; j < N; ++j) {
      const bool in_a = j < group_a;
      const double td = static_cast<double>(t - delay[static_cast<std::size_t>(j)]);
      const double base = in_a ? driver_a(td) : driver_b(td);
      ds.values.at(t, j) =
          gain[static_cast<std::size_t>(j)] * base + offset[static_cast<std::size_t>(j)] +
          0.02 * rng.gaussian();
    }

  SynthResult result;
  result.train_rows = (T * 6) / 10;

  // Inject labeled segments after the clean training prefix until the
  // labeled fraction reaches the requested rate.
  const std::int64_t target = std::max<std::int64_t>(1, std::llround(cfg.anomaly_rate * T));
  std::vector<bool> taken(static_cast<std::size_t>(T), false);
  std::int64_t labeled = 0;
  int stale = 0;
  while (labeled < target && stale < 200) {
    const AnomalyKind kind = cfg.anomaly_kinds[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(cfg.anomaly_kinds.size()) - 1))];
    std::int64_t len = (kind == AnomalyKind::spike) ? rng.uniform_int(2, 4)
                                                    : rng.uniform_int(12, 24);
    len = std::min(len, target - labeled + 3);
    if (len < 1) len = 1;
    const std::int64_t lo = result.train_rows + 5;
    const std::int64_t hi = T - len - 2;
    if (hi <= lo) break;
    const std::int64_t begin = rng.uniform_int(lo, hi);
    bool overlap = false;
    for (std::int64_t t = begin - 3; t < begin + len + 3; ++t)
      if (t >= 0 && t < T && taken[static_cast<std::size_t>(t)]) overlap = true;
    if (overlap) {
      ++stale;
      continue;
    }
    stale = 0;
    const int sensor = static_cast<int>(rng.uniform_int(0, N - 1));
    const double direction = rng.sign();
    const double magnitude = rng.uniform(1.2, 2.0);
    const double held = ds.values.at(begin, sensor);
    for (std::int64_t t = begin; t < begin + len; ++t) {
      double& v = ds.values.at(t, sensor);
      switch (kind) {
        case AnomalyKind::spike:
          v += direction * magnitude * 1.5;
          break;
        case AnomalyKind::drift: {
          const double frac =
              std::min(1.0, 3.0 * static_cast<double>(t - begin + 1) / static_cast<double>(len));
          v += direction * magnitude * frac;
          break;
        }
        case AnomalyKind::stuck:
          v = held + direction * magnitude * 0.8;
          break;
        case AnomalyKind::correlation_break: {
          const bool in_a = sensor < group_a;
          const double other = in_a ? driver_b(static_cast<double>(t)) : driver_a(static_cast<double>(t));
          v = gain[static_cast<std::size_t>(sensor)] * other +
              offset[static_cast<std::size_t>(sensor)] + direction * magnitude * 0.6;
          break;
        }
      }
      taken[static_cast<std::size_t>(t)] = true;
      ds.labels[static_cast<std::size_t>(t)] = 1;
      ++labeled;
    }
    result.segments.push_back(AnomalySegment{kind, sensor, begin, begin + len});
  }

  std::sort(result.segments.begin(), result.segments.end(),
            [](const AnomalySegment& a, const AnomalySegment& b) { return a.begin < b.begin; });
  result.data = std::move(ds);
  return result;
}

std::string synth_metadata(const SynthConfig& cfg, const SynthResult& result) {
  std::ostringstream out;
  out << "nevo-synth-meta v1\n";
  out << "seed: " << cfg.seed << "\n";
  out << "sensors: " << cfg.sensors << "\n";
  out << "length: " << cfg.length << "\n";
  out << "anomaly_rate: " << format_double(cfg.anomaly_rate) << "\n";
  out << "anomaly_kinds:";
  for (const auto k : cfg.anomaly_kinds) out << " " << to_string(k);
  out << "\n";
  out << "train_rows: " << result.train_rows << "\n";
  out << "segments: " << result.segments.size() << "\n";
  for (const auto& seg : result.segments)
    out << "segment: " << to_string(seg.kind) << " sensor=" << seg.sensor
        << " begin=" << seg.begin << " end=" << seg.end << "\n";
  return out.str();
}

}  // namespace nevo
