// Command-line driver for the nevo shared library. Everything goes through
// the public C API; exit codes are 0 success, 2 config error, 3 data error,
// 4 missing run artifact, 1 anything else.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nevo/nevo.h"

namespace {

int exit_code_for(nevo_status st) {
  switch (st) {
    case NEVO_OK: return 0;
    case NEVO_E_CONFIG: return 2;
    case NEVO_E_DATA: return 3;
    case NEVO_E_MISSING: return 4;
    default: return 1;
  }
}

int fail(nevo_status st) {
  std::fprintf(stderr, "error: %s\n", nevo_last_error());
  return exit_code_for(st);
}

struct ConfigHandle {
  nevo_config* cfg = nullptr;
  ~ConfigHandle() { nevo_config_free(cfg); }
};

// Loads the config document and applies overrides: --set pairs, then the
// worker-count environment variable, then explicit flags (highest wins).
int load_config_with_overrides(const std::string& path,
                               const std::vector<std::string>& sets,
                               const std::string& seed, const std::string& workers,
                               ConfigHandle& out) {
  nevo_status st = path.empty() ? nevo_config_create(&out.cfg)
                                : nevo_config_load(path.c_str(), &out.cfg);
  if (st != NEVO_OK) return fail(st);
  if (const char* env = std::getenv("NEVO_WORKERS"); env && *env)
    if ((st = nevo_config_set(out.cfg, "workers", env)) != NEVO_OK) return fail(st);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return 2;
    }
    st = nevo_config_set(out.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != NEVO_OK) return fail(st);
  }
  if (!seed.empty() && (st = nevo_config_set(out.cfg, "seed", seed.c_str())) != NEVO_OK)
    return fail(st);
  if (!workers.empty() && (st = nevo_config_set(out.cfg, "workers", workers.c_str())) != NEVO_OK)
    return fail(st);
  return -1;  // keep going
}

std::string timestamped(const char* prefix) {
  char buf[64];
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return std::string(prefix) + "-" + buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nevo - neuroevolved autoencoder ensembles for time-series anomaly detection"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir, test_csv, genome_path;
  std::string seed, workers;
  std::vector<std::string> sets;

  auto add_config_flags = [&](CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("-c,--config", config_path, "run configuration document");
    if (config_required) opt->required();
    cmd->add_option("--set", sets, "override a config key (key=value, repeatable)");
    cmd->add_option("--seed", seed, "override the run seed");
    cmd->add_option("--workers", workers, "worker threads for fitness evaluation");
  };

  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic benchmark");
  add_config_flags(synth, false);
  synth->add_option("-o,--out", out_dir, "output directory")->required();

  auto* evolve = app.add_subcommand("evolve", "run subspace and model evolution");
  add_config_flags(evolve, true);
  evolve->add_option("-o,--out", out_dir, "run directory (default: run-<timestamp>)");

  auto* finetune = app.add_subcommand("finetune", "fine-tune champions in a run directory");
  finetune->add_option("run_dir", run_dir, "run directory produced by evolve")->required();

  auto* eval = app.add_subcommand("eval", "score a labeled test CSV with the run's ensemble");
  eval->add_option("run_dir", run_dir, "run directory")->required();
  eval->add_option("test_csv", test_csv, "labeled test CSV")->required();

  auto* vg = app.add_subcommand("validate-genome", "validate a genome document");
  vg->add_option("genome", genome_path, "genome file")->required();
  add_config_flags(vg, false);

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed() || evolve->parsed() || vg->parsed()) {
    ConfigHandle cfg;
    const int rc = load_config_with_overrides(config_path, sets, seed, workers, cfg);
    if (rc >= 0) return rc;

    if (synth->parsed()) {
      const nevo_status st = nevo_synth(cfg.cfg, out_dir.c_str());
      if (st != NEVO_OK) return fail(st);
      std::printf("synthetic benchmark written to %s\n", out_dir.c_str());
      return 0;
    }
    if (evolve->parsed()) {
      if (out_dir.empty()) out_dir = timestamped("run");
      const nevo_status st = nevo_evolve(cfg.cfg, out_dir.c_str());
      if (st != NEVO_OK) return fail(st);
      std::printf("run directory: %s\n", out_dir.c_str());
      return 0;
    }
    // validate-genome
    FILE* f = std::fopen(genome_path.c_str(), "rb");
    if (!f) {
      std::fprintf(stderr, "error: cannot open %s\n", genome_path.c_str());
      return 3;
    }
    std::string text;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, n);
    std::fclose(f);

    nevo_genome* genome = nullptr;
    nevo_status st = nevo_genome_parse(text.c_str(), &genome);
    if (st != NEVO_OK) return fail(st);
    char* report = nullptr;
    st = nevo_genome_validate(genome, cfg.cfg, &report);
    nevo_genome_free(genome);
    if (st != NEVO_OK) return fail(st);
    if (report && report[0]) {
      std::printf("%s", report);
      nevo_string_free(report);
      return 1;
    }
    nevo_string_free(report);
    std::printf("genome is valid\n");
    return 0;
  }

  if (finetune->parsed()) {
    const nevo_status st = nevo_finetune(run_dir.c_str());
    if (st != NEVO_OK) return fail(st);
    std::printf("fine-tuned models written under %s/finetune\n", run_dir.c_str());
    return 0;
  }

  if (eval->parsed()) {
    char* report = nullptr;
    const nevo_status st = nevo_eval(run_dir.c_str(), test_csv.c_str(), &report);
    if (st != NEVO_OK) return fail(st);
    std::printf("%s", report);
    nevo_string_free(report);
    return 0;
  }

  return 1;
}
