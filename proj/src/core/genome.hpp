#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "util/rng.hpp"

namespace nevo {

enum class Family { vanilla, graph };
enum class LayerKind { dense, conv1d, lstm };
enum class ConnectionKind { skip, dense };

const char* to_string(Family f);
const char* to_string(LayerKind k);
const char* to_string(ConnectionKind k);
Family family_from_string(const std::string& s);

struct LayerGene {
  LayerKind kind = LayerKind::dense;
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 1;  // conv1d only, odd

  bool operator==(const LayerGene&) const = default;
};

struct ConnectionGene {
  int encoder_level = 0;
  ConnectionKind kind = ConnectionKind::skip;

  bool operator==(const ConnectionGene&) const = default;
};

struct GenomeLimits {
  int window_min = 1;
  int window_max = 7;
  int layers_max = 6;
  int channels_max = 64;
  int graph_dim_min = 64;
  int graph_dim_max = 512;

  static GenomeLimits defaults(Family family);
};

// Architecture description the genetic operators act on. Encoder layers
// only; the decoder is always derived by the mirror rule. Value type:
// operators copy, never mutate in place.
struct Genome {
  Family family = Family::vanilla;
  int window = 1;
  std::vector<LayerGene> encoder_genes;
  std::vector<ConnectionGene> connections;  // kept sorted by level, one per level
  std::vector<int> attention_sites;         // kept sorted, unique

  int length() const { return static_cast<int>(encoder_genes.size()); }
  int input_width() const { return encoder_genes.empty() ? 0 : encoder_genes.front().in_channels; }
  int latent_width() const { return encoder_genes.empty() ? 0 : encoder_genes.back().out_channels; }

  // Per-layer (in, out) dims; meaningful for the graph family where they
  // are the node-function dimensions.
  std::vector<std::pair<int, int>> graph_dims() const;

  const ConnectionGene* connection_at(int level) const;
  bool has_attention(int level) const;

  // Restores canonical ordering of connections and attention sites.
  void normalize();

  // Content hash; equal genomes share an id.
  std::uint64_t id() const;

  bool operator==(const Genome&) const = default;
};

struct Violation {
  std::string code;
  std::string message;
};

// Decoder layer derived from the mirror rule; in_channels already widened
// when the level carries a dense connection.
struct DecoderLayerSpec {
  LayerKind kind = LayerKind::dense;
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 1;
  std::optional<ConnectionKind> connection;
};

std::vector<Violation> validate(const Genome& genome, const GenomeLimits& limits);
bool is_valid(const Genome& genome, const GenomeLimits& limits);

Genome random_genome(const GenomeLimits& limits, Family family, int sensor_count,
                     RandomSource& rng);

std::string serialize(const Genome& genome);
Genome deserialize(const std::string& text);

std::vector<DecoderLayerSpec> mirror_decoder(const Genome& genome);

// Feature-index subset over the input sensors.
struct Subspace {
  std::vector<int> feature_indices;  // sorted, unique
  int id = 0;

  int size() const { return static_cast<int>(feature_indices.size()); }
  bool contains(int feature) const;
  void normalize();
  std::uint64_t content_hash() const;

  static Subspace full(int sensor_count, int id = 0);

  bool operator==(const Subspace&) const = default;
};

}  // namespace nevo
