#pragma once

#include <string>

#include "core/config.hpp"
#include "core/detector.hpp"

namespace nevo {

// Stage drivers behind both the C API and the CLI. Every function is
// deterministic given the config seed; run directories never embed
// timestamps so reruns are byte-comparable.

// Writes train.csv, test.csv and synth-meta.kv (exactly three files).
void run_synth(const RunConfig& cfg, const std::string& out_dir);

// Stage 1 (subspace evolution, vanilla family only) + stage 2 (model
// evolution). Fills out_dir with config.kv, normalization.kv,
// subspaces.kv, checkpoints/, champions/, run.log.
void run_evolve(const RunConfig& cfg, const std::string& out_dir);

// Stage 3 over every champion in run_dir; writes finetune/ logs and
// weight sets. Throws missing_artifact when champions are absent.
void run_finetune(const std::string& run_dir);

struct EvalSummary {
  EvalReport fixed;
  EvalReport sweep;
};

// Scores test_csv with the ensemble of fine-tuned models (champions when
// stage 3 has not run) and writes eval/ reports plus the score series.
EvalSummary run_eval(const std::string& run_dir, const std::string& test_csv);

// Loads, validates and reports on a genome document; returns the
// violation list (empty when valid).
std::vector<Violation> run_validate_genome(const std::string& genome_path,
                                           const GenomeLimits& limits);

}  // namespace nevo
