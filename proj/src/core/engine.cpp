#include "core/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/evo_ops.hpp"
#include "core/finetune.hpp"
#include "util/error.hpp"
#include "util/parallel.hpp"
#include "util/text.hpp"

namespace nevo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t pair_key(const Genome& g, const Subspace& s) {
  return mix_seed(g.id(), s.content_hash());
}

}  // namespace

Engine::Engine(EvolutionConfig cfg, TimeSeriesDataset train_data)
    : cfg_(std::move(cfg)), data_(std::move(train_data)) {
  if (cfg_.population_size < 2)
    raise(ErrorCode::config_error, "population_size must be >= 2");
  if (cfg_.mutation_rate < 0.0 || cfg_.mutation_rate > 1.0)
    raise(ErrorCode::config_error, "mutation_rate must be in [0, 1]");
  if (cfg_.elitism < 0 || cfg_.elitism >= cfg_.population_size)
    raise(ErrorCode::config_error, "elitism must be < population_size");
  if (cfg_.tournament_k < 1) raise(ErrorCode::config_error, "tournament_k must be >= 1");
  if (!(cfg_.val_fraction > 0.0 && cfg_.val_fraction < 1.0))
    raise(ErrorCode::config_error, "val_fraction must be in (0, 1)");
  if (data_.rows() < 10) raise(ErrorCode::data_error, "training dataset is too short");

  split_ = static_cast<std::int64_t>(
      std::llround(static_cast<double>(data_.rows()) * (1.0 - cfg_.val_fraction)));
  const std::int64_t min_rows = cfg_.limits.window_max + 1;
  split_ = std::clamp<std::int64_t>(split_, min_rows, data_.rows() - min_rows);
}

std::pair<double, std::vector<double>> Engine::evaluate(const Genome& genome,
                                                        const Subspace& subspace) const {
  try {
    const std::uint64_t key = pair_key(genome, subspace);
    const TimeSeriesDataset train = slice_rows(data_, 0, split_);
    const TimeSeriesDataset val = slice_rows(data_, split_, data_.rows());

    Model model = Model::build(genome, subspace, mix_seed(cfg_.seed, key));
    TrainConfig tc = cfg_.train;
    tc.seed = mix_seed(cfg_.seed, key ^ 0x7261696e);
    model.train(windows(train, genome.window, subspace), tc);

    const double loss = model.reconstruction_loss(windows(val, genome.window, subspace));
    const std::int64_t fp =
        fp_count(model, series_in_subspace(val, subspace), cfg_.fp_factor);
    const double fit = -loss - cfg_.fp_lambda * static_cast<double>(fp);
    if (!std::isfinite(fit)) return {kNegInf, {}};
    return {fit, model.weights()};
  } catch (const Error&) {
    // A failed evaluation demotes the individual, never the run.
    return {kNegInf, {}};
  }
}

double Engine::fitness(const Genome& genome, const Subspace& subspace) {
  ++requests_;
  const std::uint64_t key = pair_key(genome, subspace);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  ++misses_;
  const auto [fit, weights] = evaluate(genome, subspace);
  cache_.emplace(key, fit);
  return fit;
}

EvolutionRun Engine::new_run(const std::vector<Subspace>& subspaces) {
  if (subspaces.empty()) raise(ErrorCode::invalid_argument, "no subspaces given");
  Rng rng(cfg_.seed);
  EvolutionRun run;
  run.subspaces = subspaces;
  run.populations.resize(subspaces.size());
  run.champions.resize(subspaces.size());
  for (std::size_t si = 0; si < subspaces.size(); ++si) {
    const int width = subspaces[si].size();
    for (int i = 0; i < cfg_.population_size; ++i)
      run.populations[si].push_back(random_genome(cfg_.limits, cfg_.family, width, rng));
  }
  run.rng_state = rng.save_state();
  return run;
}

void Engine::evolve_population(EvolutionRun& run, std::size_t si, Rng& rng) {
  std::vector<Genome>& pop = run.populations[si];
  const Subspace& subspace = run.subspaces[si];
  const std::size_t n = pop.size();

  // Resolve the cache in index order, then evaluate the misses in
  // parallel. Evaluations are pure functions of the genome and data, so
  // scheduling cannot change results.
  std::vector<double> fits(n, 0.0);
  std::vector<std::size_t> miss_idx;
  for (std::size_t i = 0; i < n; ++i) {
    ++requests_;
    const std::uint64_t key = pair_key(pop[i], subspace);
    if (const auto it = cache_.find(key); it != cache_.end()) {
      fits[i] = it->second;
    } else {
      miss_idx.push_back(i);
    }
  }
  // Dedupe concurrent evaluations of identical genomes.
  std::vector<std::size_t> unique_miss;
  {
    std::map<std::uint64_t, std::size_t> seen;
    for (std::size_t i : miss_idx) {
      const std::uint64_t key = pair_key(pop[i], subspace);
      if (!seen.count(key)) {
        seen.emplace(key, i);
        unique_miss.push_back(i);
      }
    }
  }
  std::vector<std::pair<double, std::vector<double>>> results(unique_miss.size());
  parallel_for(unique_miss.size(), cfg_.workers, [&](std::size_t j) {
    results[j] = evaluate(pop[unique_miss[j]], subspace);
  });
  for (std::size_t j = 0; j < unique_miss.size(); ++j) {
    const std::size_t i = unique_miss[j];
    const std::uint64_t key = pair_key(pop[i], subspace);
    ++misses_;
    cache_.emplace(key, results[j].first);
    Champion& champ = run.champions[si];
    if (!champ.valid || results[j].first > champ.fitness) {
      champ.valid = true;
      champ.fitness = results[j].first;
      champ.genome = pop[i];
      champ.weights = results[j].second;
    }
  }
  for (std::size_t i : miss_idx)
    fits[i] = cache_.at(pair_key(pop[i], subspace));

  GenerationStats stats;
  stats.generation = run.generation;
  stats.subspace_id = subspace.id;
  stats.best = kNegInf;
  double sum = 0.0;
  std::size_t finite = 0;
  for (double f : fits) {
    stats.best = std::max(stats.best, f);
    if (std::isfinite(f)) {
      sum += f;
      ++finite;
    }
  }
  stats.mean = finite > 0 ? sum / static_cast<double>(finite) : kNegInf;
  run.history.push_back(stats);

  // Selection: keep the elites, then tournament parents, crossover, and
  // per-offspring mutation at the configured rate.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&fits](std::size_t a, std::size_t b) { return fits[a] > fits[b]; });

  auto tournament = [&]() -> std::size_t {
    std::size_t best = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    for (int k = 1; k < cfg_.tournament_k; ++k) {
      const std::size_t c =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      if (fits[c] > fits[best] || (fits[c] == fits[best] && c < best)) best = c;
    }
    return best;
  };

  std::vector<Genome> next;
  next.reserve(n);
  for (int e = 0; e < cfg_.elitism; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);
  while (next.size() < n) {
    const std::size_t a = tournament();
    const std::size_t b = tournament();
    auto [c1, c2] = crossover_models(pop[a], pop[b], rng);
    if (rng.bernoulli(cfg_.mutation_rate)) c1 = mutate_model(c1, cfg_.limits, rng);
    if (rng.bernoulli(cfg_.mutation_rate)) c2 = mutate_model(c2, cfg_.limits, rng);
    next.push_back(std::move(c1));
    if (next.size() < n) next.push_back(std::move(c2));
  }
  pop = std::move(next);
}

void Engine::evolve(EvolutionRun& run,
                    const std::function<void(const EvolutionRun&)>& sink) {
  Rng rng(cfg_.seed);
  if (!run.rng_state.empty()) rng.load_state(run.rng_state);
  while (run.generation < cfg_.iterations) {
    for (std::size_t si = 0; si < run.subspaces.size(); ++si)
      evolve_population(run, si, rng);
    ++run.generation;
    run.rng_state = rng.save_state();
    if (sink) sink(run);
  }
}

Genome Engine::probe_genome(int width) const {
  Genome g;
  g.family = Family::vanilla;
  g.window = std::clamp(5, cfg_.limits.window_min, cfg_.limits.window_max);
  LayerGene l0{LayerKind::dense, width, std::max(2, (width * 3) / 4), 1};
  LayerGene l1{LayerKind::dense, l0.out_channels, std::max(1, width / 2), 1};
  g.encoder_genes = {l0, l1};
  return g;
}

std::vector<Subspace> Engine::evolve_subspaces() {
  const int sensors = data_.sensors();
  if (sensors < 1) raise(ErrorCode::data_error, "dataset has no sensors");
  if (sensors == 1) return {Subspace::full(1, 0)};

  const int k = std::clamp(cfg_.subspace_count, 1, sensors);
  Rng rng(mix_seed(cfg_.seed, 0x5b5));

  TrainConfig probe_tc = cfg_.train;
  probe_tc.epochs = std::min(cfg_.train.epochs, cfg_.probe_epochs);
  EvolutionConfig probe_cfg = cfg_;
  probe_cfg.train = probe_tc;
  Engine probe_engine(probe_cfg, data_);

  auto mask_fitness = [&](const Subspace& s) {
    return probe_engine.fitness(probe_engine.probe_genome(s.size()), s);
  };

  // Round-robin partition seeds the population with k disjoint subspaces.
  std::vector<Subspace> pop;
  for (int part = 0; part < k; ++part) {
    Subspace s;
    s.id = part;
    for (int f = part; f < sensors; f += k) s.feature_indices.push_back(f);
    pop.push_back(std::move(s));
  }
  while (static_cast<int>(pop.size()) < std::max(cfg_.subspace_population, k)) {
    Subspace s;
    s.id = static_cast<int>(pop.size());
    for (int f = 0; f < sensors; ++f)
      if (rng.bernoulli(0.5)) s.feature_indices.push_back(f);
    if (s.feature_indices.empty())
      s.feature_indices.push_back(static_cast<int>(rng.uniform_int(0, sensors - 1)));
    pop.push_back(std::move(s));
  }

  std::vector<double> fits(pop.size());
  auto eval_all = [&] {
    for (std::size_t i = 0; i < pop.size(); ++i) fits[i] = mask_fitness(pop[i]);
  };
  eval_all();

  for (int gen = 0; gen < cfg_.subspace_iterations; ++gen) {
    auto tournament = [&]() -> std::size_t {
      std::size_t best =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pop.size()) - 1));
      for (int t = 1; t < cfg_.tournament_k; ++t) {
        const std::size_t c = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(pop.size()) - 1));
        if (fits[c] > fits[best] || (fits[c] == fits[best] && c < best)) best = c;
      }
      return best;
    };
    std::size_t elite = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
      if (fits[i] > fits[elite]) elite = i;

    std::vector<Subspace> next;
    next.push_back(pop[elite]);
    while (next.size() < pop.size()) {
      auto [c1, c2] = crossover_subspaces(pop[tournament()], pop[tournament()], rng);
      next.push_back(mutate_subspace(c1, sensors, cfg_.subspace_mutation_rate, rng));
      if (next.size() < pop.size())
        next.push_back(mutate_subspace(c2, sensors, cfg_.subspace_mutation_rate, rng));
    }
    pop = std::move(next);
    eval_all();
  }

  // Top-k distinct masks, then distribute any uncovered sensors so the
  // returned set always covers every sensor.
  std::vector<std::size_t> order(pop.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&fits](std::size_t a, std::size_t b) { return fits[a] > fits[b]; });
  std::vector<Subspace> picked;
  std::vector<std::uint64_t> seen;
  for (std::size_t idx : order) {
    const std::uint64_t h = pop[idx].content_hash();
    if (std::find(seen.begin(), seen.end(), h) != seen.end()) continue;
    seen.push_back(h);
    picked.push_back(pop[idx]);
    if (static_cast<int>(picked.size()) == k) break;
  }
  std::vector<bool> covered(static_cast<std::size_t>(sensors), false);
  for (const auto& s : picked)
    for (int f : s.feature_indices) covered[static_cast<std::size_t>(f)] = true;
  std::size_t cursor = 0;
  for (int f = 0; f < sensors; ++f)
    if (!covered[static_cast<std::size_t>(f)]) {
      picked[cursor % picked.size()].feature_indices.push_back(f);
      ++cursor;
    }
  for (std::size_t i = 0; i < picked.size(); ++i) {
    picked[i].normalize();
    picked[i].id = static_cast<int>(i);
  }
  return picked;
}

// ---- checkpoint serialization ----

std::string serialize_run(const EvolutionRun& run) {
  std::ostringstream out;
  out << "nevo-checkpoint v1\n";
  out << "generation: " << run.generation << "\n";
  out << "rng_state: " << run.rng_state << "\n";
  out << "subspaces: " << run.subspaces.size() << "\n";
  for (const auto& s : run.subspaces) {
    out << "subspace: " << s.id;
    for (int f : s.feature_indices) out << " " << f;
    out << "\n";
  }
  for (std::size_t si = 0; si < run.populations.size(); ++si) {
    out << "population: " << si << " " << run.populations[si].size() << "\n";
    for (std::size_t i = 0; i < run.populations[si].size(); ++i) {
      out << "genome-begin: " << si << " " << i << "\n";
      out << serialize(run.populations[si][i]);
      out << "genome-end: " << si << " " << i << "\n";
    }
  }
  for (std::size_t si = 0; si < run.champions.size(); ++si) {
    const Champion& c = run.champions[si];
    out << "champion: " << si << " " << (c.valid ? 1 : 0) << " "
        << format_double(c.fitness) << "\n";
    if (!c.valid) continue;
    out << "champion-genome-begin: " << si << "\n";
    out << serialize(c.genome);
    out << "champion-genome-end: " << si << "\n";
    out << "champion-weights: " << si << " " << c.weights.size() << "\n";
    for (std::size_t i = 0; i < c.weights.size(); i += 8) {
      out << "w:";
      for (std::size_t j = i; j < std::min(i + 8, c.weights.size()); ++j)
        out << " " << format_double(c.weights[j]);
      out << "\n";
    }
  }
  for (const auto& h : run.history)
    out << "history: " << h.generation << " " << h.subspace_id << " " << format_double(h.best)
        << " " << format_double(h.mean) << "\n";
  return out.str();
}

EvolutionRun deserialize_run(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line) || line.rfind("nevo-checkpoint", 0) != 0)
    raise(ErrorCode::parse_error, "not a checkpoint document");
  ++lineno;

  EvolutionRun run;
  std::vector<double>* weight_sink = nullptr;

  auto split_kv = [&](const std::string& l) -> std::pair<std::string, std::string> {
    const auto colon = l.find(':');
    if (colon == std::string::npos) return {l, ""};
    return {trim(l.substr(0, colon)), trim(l.substr(colon + 1))};
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto [key, value] = split_kv(line);
    if (key == "generation") {
      run.generation = static_cast<int>(parse_int(value, "generation", lineno));
    } else if (key == "rng_state") {
      run.rng_state = value;
    } else if (key == "subspaces") {
      // count implied by subsequent lines
    } else if (key == "subspace") {
      const auto parts = split_ws(value);
      if (parts.empty()) raise(ErrorCode::parse_error, "bad subspace line");
      Subspace s;
      s.id = static_cast<int>(parse_int(parts[0], "subspace id", lineno));
      for (std::size_t i = 1; i < parts.size(); ++i)
        s.feature_indices.push_back(static_cast<int>(parse_int(parts[i], "feature", lineno)));
      run.subspaces.push_back(std::move(s));
      run.populations.resize(run.subspaces.size());
      run.champions.resize(run.subspaces.size());
    } else if (key == "population") {
      // sizes implied
    } else if (key == "genome-begin" || key == "champion-genome-begin") {
      const bool champion = key[0] == 'c';
      const auto parts = split_ws(value);
      const std::size_t si = static_cast<std::size_t>(parse_int(parts[0], "subspace idx", lineno));
      const std::string end_key = champion ? "champion-genome-end" : "genome-end";
      std::string block;
      for (;;) {
        if (!std::getline(in, line))
          raise(ErrorCode::parse_error, "unterminated genome block (line " +
                                            std::to_string(lineno) + ")");
        ++lineno;
        if (line.rfind(end_key, 0) == 0) break;
        block += line;
        block += "\n";
      }
      if (si >= run.subspaces.size())
        raise(ErrorCode::parse_error, "genome block references unknown subspace");
      if (champion)
        run.champions[si].genome = deserialize(block);
      else
        run.populations[si].push_back(deserialize(block));
    } else if (key == "champion") {
      const auto parts = split_ws(value);
      if (parts.size() != 3) raise(ErrorCode::parse_error, "bad champion line");
      const std::size_t si = static_cast<std::size_t>(parse_int(parts[0], "subspace idx", lineno));
      if (si >= run.champions.size())
        raise(ErrorCode::parse_error, "champion references unknown subspace");
      run.champions[si].valid = parse_int(parts[1], "valid", lineno) != 0;
      run.champions[si].fitness = parse_double(parts[2], "fitness", lineno);
    } else if (key == "champion-weights") {
      const auto parts = split_ws(value);
      const std::size_t si = static_cast<std::size_t>(parse_int(parts[0], "subspace idx", lineno));
      if (si >= run.champions.size())
        raise(ErrorCode::parse_error, "weights reference unknown subspace");
      const std::size_t count = static_cast<std::size_t>(parse_int(parts[1], "count", lineno));
      run.champions[si].weights.clear();
      run.champions[si].weights.reserve(count);
      weight_sink = &run.champions[si].weights;
    } else if (key == "w") {
      if (!weight_sink) raise(ErrorCode::parse_error, "weight line outside a weights block");
      for (const auto& tok : split_ws(value))
        weight_sink->push_back(parse_double(tok, "weight", lineno));
    } else if (key == "history") {
      const auto parts = split_ws(value);
      if (parts.size() != 4) raise(ErrorCode::parse_error, "bad history line");
      GenerationStats h;
      h.generation = static_cast<int>(parse_int(parts[0], "generation", lineno));
      h.subspace_id = static_cast<int>(parse_int(parts[1], "subspace id", lineno));
      h.best = parse_double(parts[2], "best", lineno);
      h.mean = parse_double(parts[3], "mean", lineno);
      run.history.push_back(h);
    } else {
      raise(ErrorCode::parse_error,
            "unknown checkpoint field '" + key + "' (line " + std::to_string(lineno) + ")");
    }
  }
  return run;
}

}  // namespace nevo
