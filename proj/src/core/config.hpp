#pragma once

#include <string>

#include "core/dataio.hpp"
#include "core/engine.hpp"
#include "core/finetune.hpp"

namespace nevo {

// One declarative document drives every stage; flags and the C API mutate
// it through set_config_key so overrides share the parser.
struct RunConfig {
  std::string dataset_path;
  Family family = Family::vanilla;
  std::uint64_t seed = 1;
  int workers = 4;
  double fp_factor = 2.0;
  EvolutionConfig evolution;
  FineTuneConfig finetune;
  SynthConfig synth;

  RunConfig();
};

RunConfig default_config();

RunConfig parse_config(const std::string& text, const std::string& origin = "<memory>");
RunConfig load_config(const std::string& path);

// Applies one "key: value" assignment; throws ConfigError naming the key.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical full-document snapshot (every key, fixed order).
std::string config_to_text(const RunConfig& cfg);

// Checks the fields cmd_evolve needs; throws ConfigError naming the field.
void require_dataset(const RunConfig& cfg);

}  // namespace nevo
