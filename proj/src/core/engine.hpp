#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/dataio.hpp"
#include "core/genome.hpp"
#include "core/model.hpp"

namespace nevo {

struct EvolutionConfig {
  Family family = Family::vanilla;
  int population_size = 20;
  int iterations = 20;
  double mutation_rate = 0.02;
  int tournament_k = 3;
  int elitism = 1;
  GenomeLimits limits;  // callers apply GenomeLimits::defaults(family)
  TrainConfig train;
  double fp_lambda = 0.01;  // false-positive weight in fitness
  double fp_factor = 2.0;
  double val_fraction = 0.2;
  std::uint64_t seed = 1;
  int workers = 4;

  // Subspace stage (vanilla family only).
  int subspace_count = 2;
  int subspace_population = 8;
  int subspace_iterations = 4;
  double subspace_mutation_rate = 0.1;
  int probe_epochs = 5;
};

struct GenerationStats {
  int generation = 0;
  int subspace_id = 0;
  double best = 0.0;
  double mean = 0.0;
};

struct Champion {
  Genome genome;
  std::vector<double> weights;
  double fitness = 0.0;
  bool valid = false;
};

struct EvolutionRun {
  int generation = 0;
  std::vector<Subspace> subspaces;
  std::vector<std::vector<Genome>> populations;   // per subspace
  std::vector<Champion> champions;                // per subspace
  std::vector<GenerationStats> history;           // row-major by generation
  std::string rng_state;
};

std::string serialize_run(const EvolutionRun& run);
EvolutionRun deserialize_run(const std::string& text);

// Stage 1-2 driver. Owns the normalized training dataset split into a
// train region and a validation tail; fitness is
//   -(validation reconstruction loss) - fp_lambda * (validation FP count)
// evaluated deterministically per (genome, subspace) and cached by content.
class Engine {
 public:
  Engine(EvolutionConfig cfg, TimeSeriesDataset train_data);

  const EvolutionConfig& config() const { return cfg_; }

  double fitness(const Genome& genome, const Subspace& subspace);
  // Same evaluation but exposing the trained weights (cache misses only).
  std::pair<double, std::vector<double>> evaluate(const Genome& genome,
                                                  const Subspace& subspace) const;

  EvolutionRun new_run(const std::vector<Subspace>& subspaces);
  // Advances run to cfg.iterations generations; sink (when set) is called
  // after every generation with the checkpoint-ready state.
  void evolve(EvolutionRun& run,
              const std::function<void(const EvolutionRun&)>& sink = nullptr);

  // Bitmask co-evolution with a fixed probe architecture; returns
  // subspace_count subspaces that collectively cover every sensor.
  std::vector<Subspace> evolve_subspaces();

  // Budget accounting for tests.
  std::size_t evaluation_requests() const { return requests_; }
  std::size_t evaluation_misses() const { return misses_; }

  // Probe genome used for subspace fitness, exposed for tests.
  Genome probe_genome(int width) const;

 private:
  double fitness_locked(const Genome& genome, const Subspace& subspace);
  void evolve_population(EvolutionRun& run, std::size_t si, Rng& rng);

  EvolutionConfig cfg_;
  TimeSeriesDataset data_;
  std::int64_t split_ = 0;  // rows [0, split) train, [split, rows) validation
  std::map<std::uint64_t, double> cache_;
  std::map<std::uint64_t, std::vector<double>> champion_weights_stash_;
  std::size_t requests_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace nevo
