#include "core/genome.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "util/error.hpp"
#include "util/text.hpp"

namespace nevo {

const char* to_string(Family f) { return f == Family::vanilla ? "vanilla" : "graph"; }

const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::lstm: return "lstm";
  }
  return "?";
}

const char* to_string(ConnectionKind k) {
  return k == ConnectionKind::skip ? "skip" : "dense";
}

Family family_from_string(const std::string& s) {
  if (s == "vanilla") return Family::vanilla;
  if (s == "graph") return Family::graph;
  raise(ErrorCode::parse_error, "unknown family '" + s + "'");
}

namespace {

LayerKind layer_kind_from_string(const std::string& s, int line) {
  if (s == "dense") return LayerKind::dense;
  if (s == "conv1d") return LayerKind::conv1d;
  if (s == "lstm") return LayerKind::lstm;
  raise(ErrorCode::parse_error,
        "unknown layer kind '" + s + "' (line " + std::to_string(line) + ")");
}

ConnectionKind connection_kind_from_string(const std::string& s, int line) {
  if (s == "skip") return ConnectionKind::skip;
  if (s == "dense") return ConnectionKind::dense;
  raise(ErrorCode::parse_error,
        "unknown connection kind '" + s + "' (line " + std::to_string(line) + ")");
}

}  // namespace

GenomeLimits GenomeLimits::defaults(Family family) {
  GenomeLimits lim;
  if (family == Family::graph) lim.window_min = 3;
  return lim;
}

std::vector<std::pair<int, int>> Genome::graph_dims() const {
  std::vector<std::pair<int, int>> dims;
  dims.reserve(encoder_genes.size());
  for (const auto& g : encoder_genes) dims.emplace_back(g.in_channels, g.out_channels);
  return dims;
}

const ConnectionGene* Genome::connection_at(int level) const {
  for (const auto& c : connections)
    if (c.encoder_level == level) return &c;
  return nullptr;
}

bool Genome::has_attention(int level) const {
  return std::binary_search(attention_sites.begin(), attention_sites.end(), level);
}

void Genome::normalize() {
  std::sort(connections.begin(), connections.end(),
            [](const ConnectionGene& a, const ConnectionGene& b) {
              return a.encoder_level < b.encoder_level;
            });
  std::sort(attention_sites.begin(), attention_sites.end());
  attention_sites.erase(std::unique(attention_sites.begin(), attention_sites.end()),
                        attention_sites.end());
}

namespace {

std::string serialize_body(const Genome& g) {
  std::ostringstream out;
  out << "family: " << to_string(g.family) << "\n";
  out << "window: " << g.window << "\n";
  out << "layers: " << g.length() << "\n";
  for (int i = 0; i < g.length(); ++i) {
    const LayerGene& gene = g.encoder_genes[static_cast<std::size_t>(i)];
    out << "layer: " << i << " " << to_string(gene.kind) << " " << gene.in_channels << " "
        << gene.out_channels;
    if (gene.kind == LayerKind::conv1d) out << " kernel=" << gene.kernel;
    out << "\n";
  }
  if (g.family == Family::graph) {
    out << "graph_dims:";
    for (const auto& [in, oc] : g.graph_dims()) out << " " << in << "x" << oc;
    out << "\n";
  }
  for (int site : g.attention_sites) out << "attention: " << site << "\n";
  for (const auto& c : g.connections)
    out << "connection: " << c.encoder_level << " " << to_string(c.kind) << "\n";
  return out.str();
}

}  // namespace

std::uint64_t Genome::id() const {
  Genome copy = *this;
  copy.normalize();
  return fnv1a(serialize_body(copy));
}

std::string serialize(const Genome& genome) {
  Genome copy = genome;
  copy.normalize();
  std::ostringstream out;
  out << "nevo-genome v1\n";
  char idbuf[32];
  std::snprintf(idbuf, sizeof(idbuf), "%016llx",
                static_cast<unsigned long long>(copy.id()));
  out << "id: " << idbuf << "\n";
  out << serialize_body(copy);
  return out.str();
}

Genome deserialize(const std::string& text) {
  const auto lines = read_kv_lines(text);
  expect_header(lines, "nevo-genome");

  Genome g;
  bool have_family = false, have_window = false;
  int declared_layers = -1;
  std::map<int, LayerGene> layer_map;
  std::map<int, int> layer_lines;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const KvLine& kv = lines[i];
    if (kv.key == "id" || kv.key == "graph_dims") continue;  // derived, recomputed
    if (kv.key == "family") {
      g.family = family_from_string(kv.value);
      have_family = true;
    } else if (kv.key == "window") {
      g.window = static_cast<int>(parse_int(kv.value, "window", kv.lineno));
      have_window = true;
    } else if (kv.key == "layers") {
      declared_layers = static_cast<int>(parse_int(kv.value, "layers", kv.lineno));
    } else if (kv.key == "layer") {
      const auto parts = split_ws(kv.value);
      if (parts.size() < 4)
        raise(ErrorCode::parse_error,
              "layer line needs '<idx> <kind> <in> <out>' (line " +
                  std::to_string(kv.lineno) + ")");
      const int idx = static_cast<int>(parse_int(parts[0], "layer index", kv.lineno));
      LayerGene gene;
      gene.kind = layer_kind_from_string(parts[1], kv.lineno);
      gene.in_channels = static_cast<int>(parse_int(parts[2], "in_channels", kv.lineno));
      gene.out_channels = static_cast<int>(parse_int(parts[3], "out_channels", kv.lineno));
      for (std::size_t p = 4; p < parts.size(); ++p) {
        if (parts[p].rfind("kernel=", 0) == 0)
          gene.kernel = static_cast<int>(parse_int(parts[p].substr(7), "kernel", kv.lineno));
        else
          raise(ErrorCode::parse_error,
                "unknown layer attribute '" + parts[p] + "' (line " +
                    std::to_string(kv.lineno) + ")");
      }
      layer_map[idx] = gene;
      layer_lines[idx] = kv.lineno;
    } else if (kv.key == "attention") {
      g.attention_sites.push_back(
          static_cast<int>(parse_int(kv.value, "attention site", kv.lineno)));
    } else if (kv.key == "connection") {
      const auto parts = split_ws(kv.value);
      if (parts.size() != 2)
        raise(ErrorCode::parse_error,
              "connection line needs '<level> <kind>' (line " + std::to_string(kv.lineno) + ")");
      ConnectionGene c;
      c.encoder_level = static_cast<int>(parse_int(parts[0], "connection level", kv.lineno));
      c.kind = connection_kind_from_string(parts[1], kv.lineno);
      g.connections.push_back(c);
    } else {
      raise(ErrorCode::parse_error,
            "unknown field '" + kv.key + "' (line " + std::to_string(kv.lineno) + ")");
    }
  }

  if (!have_family) raise(ErrorCode::parse_error, "missing field: family");
  if (!have_window) raise(ErrorCode::parse_error, "missing field: window");
  if (declared_layers < 0) raise(ErrorCode::parse_error, "missing field: layers");
  for (int i = 0; i < declared_layers; ++i)
    if (!layer_map.count(i))
      raise(ErrorCode::parse_error, "missing field: layer " + std::to_string(i));
  if (static_cast<int>(layer_map.size()) != declared_layers)
    raise(ErrorCode::parse_error, "layer count does not match 'layers' field");

  g.encoder_genes.reserve(layer_map.size());
  for (auto& [idx, gene] : layer_map) g.encoder_genes.push_back(gene);
  g.normalize();
  return g;
}

std::vector<Violation> validate(const Genome& g, const GenomeLimits& limits) {
  std::vector<Violation> out;
  auto add = [&out](const std::string& code, const std::string& msg) {
    out.push_back(Violation{code, msg});
  };

  const int L = g.length();
  if (L < 1 || L > limits.layers_max)
    add("LengthOutOfRange", "encoder length " + std::to_string(L) + " outside [1, " +
                                std::to_string(limits.layers_max) + "]");
  if (g.window < limits.window_min || g.window > limits.window_max)
    add("WindowOutOfRange", "window " + std::to_string(g.window) + " outside [" +
                                std::to_string(limits.window_min) + ", " +
                                std::to_string(limits.window_max) + "]");

  for (int i = 0; i < L; ++i) {
    const LayerGene& gene = g.encoder_genes[static_cast<std::size_t>(i)];
    if (gene.in_channels < 1 || gene.out_channels < 1)
      add("ChannelOutOfRange", "layer " + std::to_string(i) + " has non-positive channels");
    if (gene.kind == LayerKind::conv1d && (gene.kernel < 1 || gene.kernel % 2 == 0))
      add("KernelInvalid",
          "layer " + std::to_string(i) + " kernel must be odd and >= 1");
    if (i + 1 < L &&
        gene.out_channels != g.encoder_genes[static_cast<std::size_t>(i + 1)].in_channels)
      add("ChannelChainBreak",
          "layer " + std::to_string(i) + " out_channels " + std::to_string(gene.out_channels) +
              " != layer " + std::to_string(i + 1) + " in_channels " +
              std::to_string(g.encoder_genes[static_cast<std::size_t>(i + 1)].in_channels));
  }

  if (g.family == Family::vanilla) {
    for (int i = 0; i < L; ++i) {
      const LayerGene& gene = g.encoder_genes[static_cast<std::size_t>(i)];
      const bool input_layer = (i == 0);
      if (gene.out_channels > limits.channels_max ||
          (!input_layer && gene.in_channels > limits.channels_max))
        add("ChannelOutOfRange",
            "layer " + std::to_string(i) + " channels exceed c_max " +
                std::to_string(limits.channels_max));
    }
  } else {
    if (L > 0 && g.encoder_genes.front().in_channels != g.window)
      add("GraphWindowMismatch",
          "graph first-layer in_channels " +
              std::to_string(g.encoder_genes.front().in_channels) + " must equal window " +
              std::to_string(g.window));
    for (int i = 0; i < L; ++i) {
      const LayerGene& gene = g.encoder_genes[static_cast<std::size_t>(i)];
      if (gene.kind != LayerKind::dense)
        add("GraphLayerKind", "graph layer " + std::to_string(i) + " must be dense");
      const bool in_is_window = (i == 0);
      if (gene.out_channels < limits.graph_dim_min || gene.out_channels > limits.graph_dim_max ||
          (!in_is_window && (gene.in_channels < limits.graph_dim_min ||
                             gene.in_channels > limits.graph_dim_max)))
        add("GraphDimOutOfRange",
            "graph layer " + std::to_string(i) + " dims outside [" +
                std::to_string(limits.graph_dim_min) + ", " +
                std::to_string(limits.graph_dim_max) + "]");
    }
    if (!g.connections.empty() || !g.attention_sites.empty())
      add("GraphUnsupportedFeature", "graph genomes carry no connections or attention");
  }

  std::vector<int> seen_levels;
  for (const auto& c : g.connections) {
    if (c.encoder_level < 0 || c.encoder_level >= L) {
      add("ConnectionLevelOutOfRange",
          "connection level " + std::to_string(c.encoder_level) + " outside encoder");
      continue;
    }
    if (std::find(seen_levels.begin(), seen_levels.end(), c.encoder_level) != seen_levels.end())
      add("DuplicateConnection",
          "more than one connection at level " + std::to_string(c.encoder_level));
    seen_levels.push_back(c.encoder_level);
    if (c.kind == ConnectionKind::skip) {
      // Mirror pairing: encoder output at `level` feeds decoder layer
      // L-1-level, whose input width is that same encoder out. Equal by
      // construction, checked anyway to keep the invariant explicit.
      const int enc_out = g.encoder_genes[static_cast<std::size_t>(c.encoder_level)].out_channels;
      const int dec_in = enc_out;
      if (enc_out != dec_in)
        add("SkipWidthMismatch", "skip at level " + std::to_string(c.encoder_level));
    }
  }

  for (int site : g.attention_sites)
    if (site < 0 || site >= L)
      add("AttentionSiteOutOfRange", "attention site " + std::to_string(site) + " outside encoder");

  return out;
}

bool is_valid(const Genome& g, const GenomeLimits& limits) { return validate(g, limits).empty(); }

Genome random_genome(const GenomeLimits& limits, Family family, int sensor_count,
                     RandomSource& rng) {
  if (sensor_count < 1) raise(ErrorCode::invalid_argument, "sensor_count must be >= 1");
  Genome g;
  g.family = family;
  g.window = static_cast<int>(rng.uniform_int(limits.window_min, limits.window_max));
  const int length = static_cast<int>(rng.uniform_int(1, limits.layers_max));
  g.encoder_genes.reserve(static_cast<std::size_t>(length));

  int in_ch = (family == Family::graph) ? g.window : sensor_count;
  for (int i = 0; i < length; ++i) {
    LayerGene gene;
    gene.in_channels = in_ch;
    if (family == Family::graph) {
      gene.kind = LayerKind::dense;
      gene.out_channels =
          static_cast<int>(rng.uniform_int(limits.graph_dim_min, limits.graph_dim_max));
    } else {
      gene.kind = static_cast<LayerKind>(rng.uniform_int(0, 2));
      gene.out_channels = static_cast<int>(rng.uniform_int(1, limits.channels_max));
      if (gene.kind == LayerKind::conv1d)
        gene.kernel = 1 + 2 * static_cast<int>(rng.uniform_int(0, 2));
    }
    in_ch = gene.out_channels;
    g.encoder_genes.push_back(gene);
  }
  return g;
}

std::vector<DecoderLayerSpec> mirror_decoder(const Genome& g) {
  const int L = g.length();
  std::vector<DecoderLayerSpec> out;
  out.reserve(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) {
    const int level = L - 1 - i;
    const LayerGene& gene = g.encoder_genes[static_cast<std::size_t>(level)];
    DecoderLayerSpec spec;
    spec.kind = gene.kind;
    spec.kernel = gene.kernel;
    spec.out_channels = gene.in_channels;
    spec.in_channels = gene.out_channels;
    if (const ConnectionGene* c = g.connection_at(level)) {
      spec.connection = c->kind;
      if (c->kind == ConnectionKind::dense) spec.in_channels = 2 * gene.out_channels;
    }
    out.push_back(spec);
  }
  return out;
}

bool Subspace::contains(int feature) const {
  return std::binary_search(feature_indices.begin(), feature_indices.end(), feature);
}

void Subspace::normalize() {
  std::sort(feature_indices.begin(), feature_indices.end());
  feature_indices.erase(std::unique(feature_indices.begin(), feature_indices.end()),
                        feature_indices.end());
}

std::uint64_t Subspace::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int f : feature_indices) h = fnv1a(&f, sizeof(f), h);
  return h;
}

Subspace Subspace::full(int sensor_count, int id) {
  Subspace s;
  s.id = id;
  s.feature_indices.resize(static_cast<std::size_t>(sensor_count));
  for (int i = 0; i < sensor_count; ++i) s.feature_indices[static_cast<std::size_t>(i)] = i;
  return s;
}

}  // namespace nevo
