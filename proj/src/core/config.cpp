#include "core/config.hpp"

#include <sstream>

#include "util/error.hpp"
#include "util/text.hpp"

namespace nevo {

RunConfig::RunConfig() {
  evolution.limits = GenomeLimits::defaults(family);
  evolution.family = family;
}

RunConfig default_config() { return RunConfig(); }

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  raise(ErrorCode::config_error, "config field '" + key + "' has bad value '" + value + "'");
}

int to_int(const std::string& key, const std::string& value) {
  try {
    return static_cast<int>(parse_int(value, key));
  } catch (const Error&) {
    bad_value(key, value);
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return parse_double(value, key);
  } catch (const Error&) {
    bad_value(key, value);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    return static_cast<std::uint64_t>(parse_int(value, key));
  } catch (const Error&) {
    bad_value(key, value);
  }
}

}  // namespace

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dataset.path") {
    cfg.dataset_path = value;
  } else if (key == "family") {
    if (value == "vanilla") {
      cfg.family = Family::vanilla;
    } else if (value == "graph") {
      cfg.family = Family::graph;
    } else {
      bad_value(key, value);
    }
    // Family-dependent limits reset to their defaults; explicit limit keys
    // later in the document still override.
    cfg.evolution.family = cfg.family;
    cfg.evolution.limits = GenomeLimits::defaults(cfg.family);
  } else if (key == "seed") {
    cfg.seed = to_u64(key, value);
    cfg.evolution.seed = cfg.seed;
    cfg.synth.seed = cfg.seed;
  } else if (key == "workers") {
    cfg.workers = to_int(key, value);
  } else if (key == "fp_factor") {
    cfg.fp_factor = to_double(key, value);
    cfg.evolution.fp_factor = cfg.fp_factor;
    cfg.finetune.fp_factor = cfg.fp_factor;
  } else if (key == "evolution.population_size") {
    cfg.evolution.population_size = to_int(key, value);
  } else if (key == "evolution.iterations") {
    cfg.evolution.iterations = to_int(key, value);
  } else if (key == "evolution.mutation_rate") {
    cfg.evolution.mutation_rate = to_double(key, value);
  } else if (key == "evolution.tournament_k") {
    cfg.evolution.tournament_k = to_int(key, value);
  } else if (key == "evolution.elitism") {
    cfg.evolution.elitism = to_int(key, value);
  } else if (key == "evolution.fp_lambda") {
    cfg.evolution.fp_lambda = to_double(key, value);
  } else if (key == "evolution.val_fraction") {
    cfg.evolution.val_fraction = to_double(key, value);
  } else if (key == "limits.window_min") {
    cfg.evolution.limits.window_min = to_int(key, value);
  } else if (key == "limits.window_max") {
    cfg.evolution.limits.window_max = to_int(key, value);
  } else if (key == "limits.layers_max") {
    cfg.evolution.limits.layers_max = to_int(key, value);
  } else if (key == "limits.channels_max") {
    cfg.evolution.limits.channels_max = to_int(key, value);
  } else if (key == "limits.graph_dim_min") {
    cfg.evolution.limits.graph_dim_min = to_int(key, value);
  } else if (key == "limits.graph_dim_max") {
    cfg.evolution.limits.graph_dim_max = to_int(key, value);
  } else if (key == "train.epochs") {
    cfg.evolution.train.epochs = to_int(key, value);
  } else if (key == "train.batch_size") {
    cfg.evolution.train.batch_size = to_int(key, value);
  } else if (key == "train.learning_rate") {
    cfg.evolution.train.learning_rate = to_double(key, value);
  } else if (key == "train.optimizer") {
    if (value == "adam") cfg.evolution.train.optimizer = Optimizer::adam;
    else if (value == "sgd") cfg.evolution.train.optimizer = Optimizer::sgd;
    else bad_value(key, value);
  } else if (key == "subspaces.count") {
    cfg.evolution.subspace_count = to_int(key, value);
  } else if (key == "subspaces.population") {
    cfg.evolution.subspace_population = to_int(key, value);
  } else if (key == "subspaces.iterations") {
    cfg.evolution.subspace_iterations = to_int(key, value);
  } else if (key == "subspaces.mutation_rate") {
    cfg.evolution.subspace_mutation_rate = to_double(key, value);
  } else if (key == "subspaces.probe_epochs") {
    cfg.evolution.probe_epochs = to_int(key, value);
  } else if (key == "finetune.population") {
    cfg.finetune.population = to_int(key, value);
  } else if (key == "finetune.iterations") {
    cfg.finetune.iterations = to_int(key, value);
  } else if (key == "finetune.p_m") {
    cfg.finetune.p_m = to_double(key, value);
  } else if (key == "finetune.tau") {
    cfg.finetune.tau = to_double(key, value);
  } else if (key == "finetune.stagnation_window") {
    cfg.finetune.stagnation_window = to_int(key, value);
  } else if (key == "synth.sensors") {
    cfg.synth.sensors = to_int(key, value);
  } else if (key == "synth.length") {
    cfg.synth.length = parse_int(value, key);
  } else if (key == "synth.anomaly_rate") {
    cfg.synth.anomaly_rate = to_double(key, value);
  } else if (key == "synth.seed") {
    cfg.synth.seed = to_u64(key, value);
  } else if (key == "synth.kinds") {
    std::vector<AnomalyKind> kinds;
    for (const auto& tok : split_ws(value)) kinds.push_back(anomaly_kind_from_string(tok));
    if (kinds.empty()) bad_value(key, value);
    cfg.synth.anomaly_kinds = std::move(kinds);
  } else {
    raise(ErrorCode::config_error, "unknown config field '" + key + "'");
  }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  const auto lines = read_kv_lines(text);
  try {
    expect_header(lines, "nevo-config");
  } catch (const Error& e) {
    raise(ErrorCode::config_error, origin + ": " + e.what());
  }
  RunConfig cfg;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    try {
      set_config_key(cfg, lines[i].key, lines[i].value);
    } catch (const Error& e) {
      raise(ErrorCode::config_error,
            origin + ": line " + std::to_string(lines[i].lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    raise(ErrorCode::config_error, e.what());
  }
  return parse_config(text, path);
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "nevo-config v1\n";
  out << "family: " << to_string(cfg.family) << "\n";
  out << "seed: " << cfg.seed << "\n";
  out << "workers: " << cfg.workers << "\n";
  out << "fp_factor: " << format_double(cfg.fp_factor) << "\n";
  out << "dataset.path: " << cfg.dataset_path << "\n";
  out << "evolution.population_size: " << cfg.evolution.population_size << "\n";
  out << "evolution.iterations: " << cfg.evolution.iterations << "\n";
  out << "evolution.mutation_rate: " << format_double(cfg.evolution.mutation_rate) << "\n";
  out << "evolution.tournament_k: " << cfg.evolution.tournament_k << "\n";
  out << "evolution.elitism: " << cfg.evolution.elitism << "\n";
  out << "evolution.fp_lambda: " << format_double(cfg.evolution.fp_lambda) << "\n";
  out << "evolution.val_fraction: " << format_double(cfg.evolution.val_fraction) << "\n";
  out << "limits.window_min: " << cfg.evolution.limits.window_min << "\n";
  out << "limits.window_max: " << cfg.evolution.limits.window_max << "\n";
  out << "limits.layers_max: " << cfg.evolution.limits.layers_max << "\n";
  out << "limits.channels_max: " << cfg.evolution.limits.channels_max << "\n";
  out << "limits.graph_dim_min: " << cfg.evolution.limits.graph_dim_min << "\n";
  out << "limits.graph_dim_max: " << cfg.evolution.limits.graph_dim_max << "\n";
  out << "train.epochs: " << cfg.evolution.train.epochs << "\n";
  out << "train.batch_size: " << cfg.evolution.train.batch_size << "\n";
  out << "train.learning_rate: " << format_double(cfg.evolution.train.learning_rate) << "\n";
  out << "train.optimizer: "
      << (cfg.evolution.train.optimizer == Optimizer::adam ? "adam" : "sgd") << "\n";
  out << "subspaces.count: " << cfg.evolution.subspace_count << "\n";
  out << "subspaces.population: " << cfg.evolution.subspace_population << "\n";
  out << "subspaces.iterations: " << cfg.evolution.subspace_iterations << "\n";
  out << "subspaces.mutation_rate: " << format_double(cfg.evolution.subspace_mutation_rate)
      << "\n";
  out << "subspaces.probe_epochs: " << cfg.evolution.probe_epochs << "\n";
  out << "finetune.population: " << cfg.finetune.population << "\n";
  out << "finetune.iterations: " << cfg.finetune.iterations << "\n";
  out << "finetune.p_m: " << format_double(cfg.finetune.p_m) << "\n";
  out << "finetune.tau: " << format_double(cfg.finetune.tau) << "\n";
  out << "finetune.stagnation_window: " << cfg.finetune.stagnation_window << "\n";
  out << "synth.sensors: " << cfg.synth.sensors << "\n";
  out << "synth.length: " << cfg.synth.length << "\n";
  out << "synth.anomaly_rate: " << format_double(cfg.synth.anomaly_rate) << "\n";
  out << "synth.kinds:";
  for (const auto k : cfg.synth.anomaly_kinds) out << " " << to_string(k);
  out << "\n";
  out << "synth.seed: " << cfg.synth.seed << "\n";
  return out.str();
}

void require_dataset(const RunConfig& cfg) {
  if (cfg.dataset_path.empty())
    raise(ErrorCode::config_error, "config field 'dataset.path' is required");
}

}  // namespace nevo
