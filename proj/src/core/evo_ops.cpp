#include "core/evo_ops.hpp"

#include <algorithm>

#include "util/error.hpp"

namespace nevo {

namespace {

constexpr int kRetries = 8;

int clamp_channels(int c, const GenomeLimits& limits, Family family) {
  if (family == Family::graph)
    return std::clamp(c, limits.graph_dim_min, limits.graph_dim_max);
  return std::clamp(c, 1, limits.channels_max);
}

// Re-sample the out_channels of layer l between its own in/out bounds and
// re-chain the successor (Alg-1 style channel mutation).
Genome mutate_channels(const Genome& g, const GenomeLimits& limits, RandomSource& rng) {
  Genome out = g;
  const int L = out.length();
  const int l = static_cast<int>(rng.uniform_int(0, L - 1));
  LayerGene& gene = out.encoder_genes[static_cast<std::size_t>(l)];
  const int lo = std::min(gene.in_channels, gene.out_channels);
  const int hi = std::max(gene.in_channels, gene.out_channels);
  const int c = clamp_channels(static_cast<int>(rng.uniform_int(lo, hi)), limits, g.family);
  gene.out_channels = c;
  if (l + 1 < L) out.encoder_genes[static_cast<std::size_t>(l + 1)].in_channels = c;
  return out;
}

// Graph genomes keep their layer count and carry no optional layers; the
// mutation types reserved for those features re-sample a layer dimension
// instead so every draw does work.
Genome resample_graph_dims(const Genome& g, const GenomeLimits& limits, RandomSource& rng) {
  Genome out = g;
  const int L = out.length();
  const int l = static_cast<int>(rng.uniform_int(0, L - 1));
  const int d = static_cast<int>(rng.uniform_int(limits.graph_dim_min, limits.graph_dim_max));
  out.encoder_genes[static_cast<std::size_t>(l)].out_channels = d;
  if (l + 1 < L) out.encoder_genes[static_cast<std::size_t>(l + 1)].in_channels = d;
  return out;
}

void drop_features_beyond(Genome& g, int length) {
  g.connections.erase(std::remove_if(g.connections.begin(), g.connections.end(),
                                     [length](const ConnectionGene& c) {
                                       return c.encoder_level >= length;
                                     }),
                      g.connections.end());
  g.attention_sites.erase(std::remove_if(g.attention_sites.begin(), g.attention_sites.end(),
                                         [length](int s) { return s >= length; }),
                          g.attention_sites.end());
}

Genome mutate_resize(const Genome& g, const GenomeLimits& limits, RandomSource& rng) {
  Genome out = g;
  const int L = out.length();
  const int target = static_cast<int>(rng.uniform_int(0, limits.layers_max - 1)) + 1;
  if (target < L) {
    out.encoder_genes.resize(static_cast<std::size_t>(target));
    drop_features_beyond(out, target);
  } else {
    while (out.length() < target) {
      const LayerGene& prev = out.encoder_genes.back();
      LayerGene gene;
      gene.kind = prev.kind;
      gene.kernel = prev.kernel;
      gene.in_channels = prev.out_channels;
      gene.out_channels = clamp_channels(
          static_cast<int>(rng.uniform_int(prev.out_channels,
                                           prev.out_channels + limits.channels_max)),
          limits, g.family);
      out.encoder_genes.push_back(gene);
    }
  }
  return out;
}

Genome mutate_window(const Genome& g, const GenomeLimits& limits, RandomSource& rng) {
  Genome out = g;
  out.window = static_cast<int>(rng.uniform_int(limits.window_min, limits.window_max));
  // Graph node functions consume the per-sensor window directly, so the
  // first-layer input tracks the window.
  if (out.family == Family::graph && !out.encoder_genes.empty())
    out.encoder_genes.front().in_channels = out.window;
  return out;
}

Genome mutate_add_connection(const Genome& g, ConnectionKind kind, RandomSource& rng) {
  Genome out = g;
  const int L = out.length();
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const int l = static_cast<int>(rng.uniform_int(0, L - 1));
    if (out.connection_at(l) != nullptr) continue;
    // Skip widths always match under the mirror rule; if a future layout
    // broke that, the connection degrades to dense instead of rejecting.
    const int enc_out = out.encoder_genes[static_cast<std::size_t>(l)].out_channels;
    const int mirror_in = enc_out;
    ConnectionKind applied = kind;
    if (kind == ConnectionKind::skip && enc_out != mirror_in) applied = ConnectionKind::dense;
    out.connections.push_back(ConnectionGene{l, applied});
    out.normalize();
    return out;
  }
  return out;  // every sampled level occupied
}

Genome mutate_add_attention(const Genome& g, RandomSource& rng) {
  Genome out = g;
  const int L = out.length();
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const int l = static_cast<int>(rng.uniform_int(0, L - 1));
    if (out.has_attention(l)) continue;
    out.attention_sites.push_back(l);
    out.normalize();
    return out;
  }
  return out;
}

}  // namespace

Genome apply_mutation(const Genome& genome, const GenomeLimits& limits, MutationType type,
                      RandomSource& rng) {
  const bool graph = genome.family == Family::graph;
  switch (type) {
    case MutationType::channels:
      return mutate_channels(genome, limits, rng);
    case MutationType::resize:
      return graph ? resample_graph_dims(genome, limits, rng)
                   : mutate_resize(genome, limits, rng);
    case MutationType::window:
      return mutate_window(genome, limits, rng);
    case MutationType::add_skip:
      return graph ? resample_graph_dims(genome, limits, rng)
                   : mutate_add_connection(genome, ConnectionKind::skip, rng);
    case MutationType::add_dense:
      return graph ? resample_graph_dims(genome, limits, rng)
                   : mutate_add_connection(genome, ConnectionKind::dense, rng);
    case MutationType::add_attention:
      return graph ? resample_graph_dims(genome, limits, rng) : mutate_add_attention(genome, rng);
  }
  raise(ErrorCode::invalid_argument, "unknown mutation type");
}

Genome mutate_model(const Genome& genome, const GenomeLimits& limits, RandomSource& rng) {
  const auto type = static_cast<MutationType>(rng.uniform_int(0, 5));
  return apply_mutation(genome, limits, type, rng);
}

namespace {

void rechain_around(Genome& g, int l) {
  const int L = g.length();
  if (l > 0)
    g.encoder_genes[static_cast<std::size_t>(l - 1)].out_channels =
        g.encoder_genes[static_cast<std::size_t>(l)].in_channels;
  if (l + 1 < L)
    g.encoder_genes[static_cast<std::size_t>(l + 1)].in_channels =
        g.encoder_genes[static_cast<std::size_t>(l)].out_channels;
}

// Tail transplant: the longer parent's front becomes the short child; the
// shorter parent plus the longer parent's tail becomes the long child.
// Junction widths follow the host's latent, matching the explicit
// out-channel assignment of the length-exchange crossover.
std::pair<Genome, Genome> exchange_lengths(const Genome& longer, const Genome& shorter) {
  const int Ls = shorter.length();
  const int Ll = longer.length();

  Genome child_short = longer;
  child_short.encoder_genes.resize(static_cast<std::size_t>(Ls));
  child_short.encoder_genes.back().out_channels = shorter.encoder_genes.back().out_channels;
  drop_features_beyond(child_short, Ls);

  Genome child_long = shorter;
  for (int k = Ls; k < Ll; ++k)
    child_long.encoder_genes.push_back(longer.encoder_genes[static_cast<std::size_t>(k)]);
  child_long.encoder_genes[static_cast<std::size_t>(Ls)].in_channels =
      shorter.encoder_genes.back().out_channels;
  return {child_short, child_long};
}

}  // namespace

std::pair<Genome, Genome> crossover_models(const Genome& g1, const Genome& g2,
                                           RandomSource& rng) {
  if (g1.family != g2.family)
    raise(ErrorCode::family_mismatch, "crossover requires genomes of the same family");

  // Length exchange never applies to graph genomes.
  const int m = (g1.family == Family::graph) ? 0 : static_cast<int>(rng.uniform_int(0, 1));

  if (m == 0) {
    const int lmin = std::min(g1.length(), g2.length());
    const int l = static_cast<int>(rng.uniform_int(0, lmin - 1));
    Genome c1 = g1, c2 = g2;
    c1.encoder_genes[static_cast<std::size_t>(l)] = g2.encoder_genes[static_cast<std::size_t>(l)];
    c2.encoder_genes[static_cast<std::size_t>(l)] = g1.encoder_genes[static_cast<std::size_t>(l)];
    rechain_around(c1, l);
    rechain_around(c2, l);
    // A swapped first graph layer carries the donor's window as its input
    // width; the host's window wins.
    if (g1.family == Family::graph) {
      c1.encoder_genes.front().in_channels = c1.window;
      c2.encoder_genes.front().in_channels = c2.window;
    }
    return {c1, c2};
  }

  if (g1.length() == g2.length()) return {g1, g2};
  if (g1.length() > g2.length()) {
    auto [cs, cl] = exchange_lengths(g1, g2);
    return {cs, cl};
  }
  auto [cs, cl] = exchange_lengths(g2, g1);
  return {cl, cs};
}

Subspace mutate_subspace(const Subspace& s, int sensor_count, double rate, RandomSource& rng) {
  std::vector<bool> member(static_cast<std::size_t>(sensor_count), false);
  for (int f : s.feature_indices)
    if (f >= 0 && f < sensor_count) member[static_cast<std::size_t>(f)] = true;

  Subspace out;
  out.id = s.id;
  for (int f = 0; f < sensor_count; ++f) {
    bool in = member[static_cast<std::size_t>(f)];
    if (rng.bernoulli(rate)) in = !in;
    if (in) out.feature_indices.push_back(f);
  }
  if (out.feature_indices.empty())
    out.feature_indices.push_back(static_cast<int>(rng.uniform_int(0, sensor_count - 1)));
  return out;
}

std::pair<Subspace, Subspace> crossover_subspaces(const Subspace& s1, const Subspace& s2,
                                                  RandomSource& rng) {
  std::vector<int> universe = s1.feature_indices;
  universe.insert(universe.end(), s2.feature_indices.begin(), s2.feature_indices.end());
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

  Subspace c1, c2;
  c1.id = s1.id;
  c2.id = s2.id;
  for (int f : universe) {
    bool in1 = s1.contains(f), in2 = s2.contains(f);
    if (rng.bernoulli(0.5)) std::swap(in1, in2);
    if (in1) c1.feature_indices.push_back(f);
    if (in2) c2.feature_indices.push_back(f);
  }
  for (Subspace* c : {&c1, &c2})
    if (c->feature_indices.empty())
      c->feature_indices.push_back(
          universe[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(universe.size()) - 1))]);
  return {c1, c2};
}

}  // namespace nevo
