#pragma once

#include <utility>

#include "core/genome.hpp"
#include "util/rng.hpp"

namespace nevo {

// Mutation types for apply_mutation. mutate_model draws uniformly from all
// six; on graph genomes the vanilla-only types degrade to re-sampling a
// graph layer dimension.
enum class MutationType {
  channels = 0,     // re-sample a layer's out_channels, repair the chain
  resize = 1,       // truncate or extend the encoder (vanilla only)
  window = 2,       // re-sample the window size
  add_skip = 3,     // add a skip connection (vanilla only)
  add_dense = 4,    // add a dense connection (vanilla only)
  add_attention = 5 // insert an attention layer (vanilla only)
};

Genome mutate_model(const Genome& genome, const GenomeLimits& limits, RandomSource& rng);
Genome apply_mutation(const Genome& genome, const GenomeLimits& limits, MutationType type,
                      RandomSource& rng);

std::pair<Genome, Genome> crossover_models(const Genome& g1, const Genome& g2,
                                           RandomSource& rng);

Subspace mutate_subspace(const Subspace& s, int sensor_count, double rate, RandomSource& rng);
std::pair<Subspace, Subspace> crossover_subspaces(const Subspace& s1, const Subspace& s2,
                                                  RandomSource& rng);

}  // namespace nevo
