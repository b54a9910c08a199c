#include "core/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "util/error.hpp"
#include "util/text.hpp"

namespace fs = std::filesystem;

namespace nevo {

namespace {

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) raise(ErrorCode::io_error, "cannot create directory: " + path);
}

std::string join(const std::string& a, const std::string& b) {
  return (fs::path(a) / b).string();
}

std::string normalization_to_text(const std::vector<std::pair<double, double>>& ranges) {
  std::ostringstream out;
  out << "nevo-normalization v1\n";
  out << "sensors: " << ranges.size() << "\n";
  for (std::size_t i = 0; i < ranges.size(); ++i)
    out << "range: " << i << " " << format_double(ranges[i].first) << " "
        << format_double(ranges[i].second) << "\n";
  return out.str();
}

std::vector<std::pair<double, double>> normalization_from_text(const std::string& text) {
  const auto lines = read_kv_lines(text);
  expect_header(lines, "nevo-normalization");
  std::vector<std::pair<double, double>> ranges;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].key == "sensors") continue;
    if (lines[i].key != "range")
      raise(ErrorCode::parse_error, "unknown normalization field '" + lines[i].key + "'");
    const auto parts = split_ws(lines[i].value);
    if (parts.size() != 3) raise(ErrorCode::parse_error, "bad range line");
    ranges.emplace_back(parse_double(parts[1], "min", lines[i].lineno),
                        parse_double(parts[2], "max", lines[i].lineno));
  }
  return ranges;
}

std::string subspaces_to_text(const std::vector<Subspace>& subspaces) {
  std::ostringstream out;
  out << "nevo-subspaces v1\n";
  for (const auto& s : subspaces) {
    out << "subspace: " << s.id;
    for (int f : s.feature_indices) out << " " << f;
    out << "\n";
  }
  return out.str();
}

std::vector<Subspace> subspaces_from_text(const std::string& text) {
  const auto lines = read_kv_lines(text);
  expect_header(lines, "nevo-subspaces");
  std::vector<Subspace> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].key != "subspace")
      raise(ErrorCode::parse_error, "unknown subspaces field '" + lines[i].key + "'");
    const auto parts = split_ws(lines[i].value);
    if (parts.empty()) raise(ErrorCode::parse_error, "bad subspace line");
    Subspace s;
    s.id = static_cast<int>(parse_int(parts[0], "id", lines[i].lineno));
    for (std::size_t p = 1; p < parts.size(); ++p)
      s.feature_indices.push_back(static_cast<int>(parse_int(parts[p], "feature", lines[i].lineno)));
    out.push_back(std::move(s));
  }
  return out;
}

std::string weights_to_text(std::uint64_t genome_id, const std::vector<double>& weights) {
  std::ostringstream out;
  out << "nevo-weights v1\n";
  char idbuf[32];
  std::snprintf(idbuf, sizeof(idbuf), "%016llx", static_cast<unsigned long long>(genome_id));
  out << "genome_id: " << idbuf << "\n";
  out << "count: " << weights.size() << "\n";
  for (std::size_t i = 0; i < weights.size(); i += 8) {
    out << "w:";
    for (std::size_t j = i; j < std::min(i + 8, weights.size()); ++j)
      out << " " << format_double(weights[j]);
    out << "\n";
  }
  return out.str();
}

std::vector<double> weights_from_text(const std::string& text) {
  const auto lines = read_kv_lines(text);
  expect_header(lines, "nevo-weights");
  std::vector<double> out;
  std::size_t declared = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].key == "genome_id") continue;
    if (lines[i].key == "count") {
      declared = static_cast<std::size_t>(parse_int(lines[i].value, "count", lines[i].lineno));
    } else if (lines[i].key == "w") {
      for (const auto& tok : split_ws(lines[i].value))
        out.push_back(parse_double(tok, "weight", lines[i].lineno));
    } else {
      raise(ErrorCode::parse_error, "unknown weights field '" + lines[i].key + "'");
    }
  }
  if (out.size() != declared)
    raise(ErrorCode::parse_error, "weights document count mismatch");
  return out;
}

std::string runlog_to_text(const EvolutionRun& run) {
  std::ostringstream out;
  out << "nevo-runlog v1\n";
  for (const auto& h : run.history)
    out << "generation=" << h.generation << " subspace=" << h.subspace_id
        << " best=" << format_double(h.best) << " mean=" << format_double(h.mean) << "\n";
  return out.str();
}

TimeSeriesDataset load_normalized_train(const RunConfig& cfg) {
  TimeSeriesDataset raw = load_csv(cfg.dataset_path, false);
  return normalize(raw, 0, raw.rows());
}

struct ChampionArtifacts {
  Subspace subspace;
  Genome genome;
  std::vector<std::vector<double>> weight_sets;  // champion or fine-tuned set
};

std::vector<ChampionArtifacts> load_champions(const std::string& run_dir,
                                              bool prefer_finetuned) {
  const auto subspaces = subspaces_from_text(read_file(join(run_dir, "subspaces.kv")));
  std::vector<ChampionArtifacts> out;
  for (const auto& s : subspaces) {
    const std::string stem = "subspace-" + std::to_string(s.id);
    const std::string genome_path = join(join(run_dir, "champions"), stem + ".genome");
    if (!fs::exists(genome_path))
      raise(ErrorCode::missing_artifact, "missing champion genome: " + genome_path);
    ChampionArtifacts art;
    art.subspace = s;
    art.genome = deserialize(read_file(genome_path));

    bool have_finetuned = false;
    if (prefer_finetuned) {
      for (int j = 0;; ++j) {
        const std::string p =
            join(join(run_dir, "finetune"), stem + "-model-" + std::to_string(j) + ".weights");
        if (!fs::exists(p)) break;
        art.weight_sets.push_back(weights_from_text(read_file(p)));
        have_finetuned = true;
      }
    }
    if (!have_finetuned) {
      const std::string p = join(join(run_dir, "champions"), stem + ".weights");
      if (!fs::exists(p))
        raise(ErrorCode::missing_artifact, "missing champion weights: " + p);
      art.weight_sets.push_back(weights_from_text(read_file(p)));
    }
    out.push_back(std::move(art));
  }
  return out;
}

}  // namespace

void run_synth(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const SynthResult result = synth_generate(cfg.synth);
  TimeSeriesDataset train = slice_rows(result.data, 0, result.train_rows);
  train.labels.clear();  // the clean prefix ships unlabeled
  const TimeSeriesDataset test =
      slice_rows(result.data, result.train_rows, result.data.rows());
  save_csv(train, join(out_dir, "train.csv"));
  save_csv(test, join(out_dir, "test.csv"));
  write_file(join(out_dir, "synth-meta.kv"), synth_metadata(cfg.synth, result));
}

void run_evolve(const RunConfig& cfg, const std::string& out_dir) {
  require_dataset(cfg);
  const TimeSeriesDataset data = load_normalized_train(cfg);

  ensure_dir(out_dir);
  ensure_dir(join(out_dir, "checkpoints"));
  ensure_dir(join(out_dir, "champions"));
  write_file(join(out_dir, "config.kv"), config_to_text(cfg));
  write_file(join(out_dir, "normalization.kv"), normalization_to_text(data.normalization));

  EvolutionConfig ecfg = cfg.evolution;
  ecfg.workers = cfg.workers;
  Engine engine(ecfg, data);

  // Graph-family runs keep the full sensor set; the subspace stage applies
  // to vanilla runs only.
  std::vector<Subspace> subspaces;
  if (cfg.family == Family::graph || data.sensors() == 1)
    subspaces = {Subspace::full(data.sensors(), 0)};
  else
    subspaces = engine.evolve_subspaces();
  write_file(join(out_dir, "subspaces.kv"), subspaces_to_text(subspaces));

  EvolutionRun run = engine.new_run(subspaces);
  engine.evolve(run, [&](const EvolutionRun& state) {
    char name[32];
    std::snprintf(name, sizeof(name), "gen-%04d.kv", state.generation);
    write_file(join(join(out_dir, "checkpoints"), name), serialize_run(state));
  });

  for (std::size_t si = 0; si < run.champions.size(); ++si) {
    const Champion& c = run.champions[si];
    if (!c.valid)
      raise(ErrorCode::data_error,
            "no viable champion for subspace " + std::to_string(run.subspaces[si].id));
    const std::string stem = "subspace-" + std::to_string(run.subspaces[si].id);
    write_file(join(join(out_dir, "champions"), stem + ".genome"), serialize(c.genome));
    write_file(join(join(out_dir, "champions"), stem + ".weights"),
               weights_to_text(c.genome.id(), c.weights));
  }
  write_file(join(out_dir, "run.log"), runlog_to_text(run));
}

void run_finetune(const std::string& run_dir) {
  const RunConfig cfg = load_config(join(run_dir, "config.kv"));
  const auto champions = load_champions(run_dir, false);
  const TimeSeriesDataset data = load_normalized_train(cfg);
  ensure_dir(join(run_dir, "finetune"));

  for (const auto& art : champions) {
    Model champion = Model::build(art.genome, art.subspace, 0);
    champion.set_weights(art.weight_sets.front());

    FineTuneConfig fcfg = cfg.finetune;
    fcfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(art.subspace.id) ^ 0xf17e);
    fcfg.workers = cfg.workers;

    const Tensor series = series_in_subspace(data, art.subspace);
    const FineTuneResult result = finetune(champion, series, fcfg);

    const std::string stem = "subspace-" + std::to_string(art.subspace.id);
    write_file(join(join(run_dir, "finetune"), stem + ".log"),
               finetune_log_to_text(result.log));
    for (std::size_t j = 0; j < result.models.size(); ++j)
      write_file(join(join(run_dir, "finetune"),
                      stem + "-model-" + std::to_string(j) + ".weights"),
                 weights_to_text(art.genome.id(), result.models[j].weights()));
  }
}

EvalSummary run_eval(const std::string& run_dir, const std::string& test_csv) {
  const RunConfig cfg = load_config(join(run_dir, "config.kv"));
  const auto ranges = normalization_from_text(read_file(join(run_dir, "normalization.kv")));
  const auto champions = load_champions(run_dir, true);

  const TimeSeriesDataset test_raw = load_csv(test_csv, true);
  const TimeSeriesDataset test = apply_normalization(test_raw, ranges);
  const TimeSeriesDataset train = load_normalized_train(cfg);

  std::vector<EnsembleMember> test_members, train_members;
  for (const auto& art : champions) {
    const Tensor train_series = series_in_subspace(train, art.subspace);
    const Tensor test_series = series_in_subspace(test, art.subspace);
    for (const auto& ws : art.weight_sets) {
      Model model = Model::build(art.genome, art.subspace, 0);
      model.set_weights(ws);
      const ScoreSeries train_scores = model.reconstruction_errors(train_series);
      double mean = 0.0;
      for (double v : train_scores.scores) mean += v;
      mean /= static_cast<double>(train_scores.scores.size());

      EnsembleMember tm{art.subspace, model.reconstruction_errors(test_series), mean};
      EnsembleMember rm{art.subspace, train_scores, mean};
      test_members.push_back(std::move(tm));
      train_members.push_back(std::move(rm));
    }
  }

  const ScoreSeries test_agg = ensemble_score(test_members);
  const ScoreSeries train_agg = ensemble_score(train_members);
  const double threshold = fixed_threshold(train_agg, cfg.fp_factor);

  EvalSummary summary;
  summary.fixed = pointwise_f1(detect(test_agg, threshold), test.labels);
  auto [sweep_threshold, sweep_report] = best_f1_sweep(test_agg, test.labels);
  summary.sweep = sweep_report;

  ensure_dir(join(run_dir, "eval"));
  write_file(join(join(run_dir, "eval"), "report-fixed.kv"),
             report_to_text(summary.fixed, "fixed"));
  write_file(join(join(run_dir, "eval"), "report-sweep.kv"),
             report_to_text(summary.sweep, "sweep"));

  std::ostringstream scores;
  scores << "t,score,label\n";
  for (std::size_t t = 0; t < test_agg.scores.size(); ++t)
    scores << t << "," << format_double(test_agg.scores[t]) << "," << test.labels[t] << "\n";
  write_file(join(join(run_dir, "eval"), "scores.csv"), scores.str());
  return summary;
}

std::vector<Violation> run_validate_genome(const std::string& genome_path,
                                           const GenomeLimits& limits) {
  const Genome g = deserialize(read_file(genome_path));
  return validate(g, limits);
}

}  // namespace nevo
