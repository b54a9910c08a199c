#include "nevo/nevo.h"

#include <cstring>
#include <sstream>
#include <string>

#include "core/config.hpp"
#include "core/pipeline.hpp"
#include "util/error.hpp"

namespace {

thread_local std::string g_last_error;

nevo_status status_from(const nevo::Error& e) {
  using nevo::ErrorCode;
  switch (e.code()) {
    case ErrorCode::config_error: return NEVO_E_CONFIG;
    case ErrorCode::data_error:
    case ErrorCode::parse_error:
    case ErrorCode::series_too_short: return NEVO_E_DATA;
    case ErrorCode::missing_artifact: return NEVO_E_MISSING;
    case ErrorCode::io_error: return NEVO_E_IO;
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_genome:
    case ErrorCode::subspace_mismatch:
    case ErrorCode::shape_mismatch:
    case ErrorCode::length_mismatch:
    case ErrorCode::family_mismatch:
    case ErrorCode::architecture_mismatch: return NEVO_E_ARG;
    default: return NEVO_E_FAIL;
  }
}

template <typename Fn>
nevo_status guarded(Fn&& fn) {
  try {
    fn();
    return NEVO_OK;
  } catch (const nevo::Error& e) {
    g_last_error = e.what();
    return status_from(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NEVO_E_FAIL;
  } catch (...) {
    g_last_error = "unknown failure";
    return NEVO_E_FAIL;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

nevo_status require(bool ok, const char* message) {
  if (ok) return NEVO_OK;
  g_last_error = message;
  return NEVO_E_ARG;
}

}  // namespace

struct nevo_config {
  nevo::RunConfig cfg;
};

struct nevo_dataset {
  nevo::TimeSeriesDataset ds;
};

struct nevo_genome {
  nevo::Genome genome;
};

extern "C" {

const char* nevo_version(void) { return "1.0.0"; }

const char* nevo_last_error(void) { return g_last_error.c_str(); }

void nevo_string_free(char* s) { delete[] s; }

nevo_status nevo_config_create(nevo_config** out) {
  if (auto st = require(out != nullptr, "null output pointer")) return st;
  return guarded([&] { *out = new nevo_config{nevo::default_config()}; });
}

nevo_status nevo_config_load(const char* path, nevo_config** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] { *out = new nevo_config{nevo::load_config(path)}; });
}

nevo_status nevo_config_set(nevo_config* cfg, const char* key, const char* value) {
  if (auto st = require(cfg && key && value, "null argument")) return st;
  return guarded([&] { nevo::set_config_key(cfg->cfg, key, value); });
}

nevo_status nevo_config_text(const nevo_config* cfg, char** out) {
  if (auto st = require(cfg && out, "null argument")) return st;
  return guarded([&] { *out = dup_string(nevo::config_to_text(cfg->cfg)); });
}

void nevo_config_free(nevo_config* cfg) { delete cfg; }

nevo_status nevo_dataset_load_csv(const char* path, int require_labels, nevo_dataset** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&] { *out = new nevo_dataset{nevo::load_csv(path, require_labels != 0)}; });
}

nevo_status nevo_dataset_dims(const nevo_dataset* ds, int64_t* rows, int64_t* sensors) {
  if (auto st = require(ds != nullptr, "null dataset")) return st;
  if (rows) *rows = ds->ds.rows();
  if (sensors) *sensors = ds->ds.sensors();
  return NEVO_OK;
}

nevo_status nevo_dataset_save_csv(const nevo_dataset* ds, const char* path) {
  if (auto st = require(ds && path, "null argument")) return st;
  return guarded([&] { nevo::save_csv(ds->ds, path); });
}

void nevo_dataset_free(nevo_dataset* ds) { delete ds; }

nevo_status nevo_genome_parse(const char* text, nevo_genome** out) {
  if (auto st = require(text && out, "null argument")) return st;
  return guarded([&] { *out = new nevo_genome{nevo::deserialize(text)}; });
}

nevo_status nevo_genome_random(const nevo_config* cfg, int sensor_count, uint64_t seed,
                               nevo_genome** out) {
  if (auto st = require(cfg && out, "null argument")) return st;
  return guarded([&] {
    nevo::Rng rng(seed);
    *out = new nevo_genome{nevo::random_genome(cfg->cfg.evolution.limits, cfg->cfg.family,
                                               sensor_count, rng)};
  });
}

nevo_status nevo_genome_serialize(const nevo_genome* g, char** out) {
  if (auto st = require(g && out, "null argument")) return st;
  return guarded([&] { *out = dup_string(nevo::serialize(g->genome)); });
}

nevo_status nevo_genome_validate(const nevo_genome* g, const nevo_config* cfg, char** report) {
  if (auto st = require(g && cfg && report, "null argument")) return st;
  return guarded([&] {
    std::ostringstream out;
    for (const auto& v : nevo::validate(g->genome, cfg->cfg.evolution.limits))
      out << v.code << ": " << v.message << "\n";
    *report = dup_string(out.str());
  });
}

void nevo_genome_free(nevo_genome* g) { delete g; }

nevo_status nevo_synth(const nevo_config* cfg, const char* out_dir) {
  if (auto st = require(cfg && out_dir, "null argument")) return st;
  return guarded([&] { nevo::run_synth(cfg->cfg, out_dir); });
}

nevo_status nevo_evolve(const nevo_config* cfg, const char* out_dir) {
  if (auto st = require(cfg && out_dir, "null argument")) return st;
  return guarded([&] { nevo::run_evolve(cfg->cfg, out_dir); });
}

nevo_status nevo_finetune(const char* run_dir) {
  if (auto st = require(run_dir != nullptr, "null run_dir")) return st;
  return guarded([&] { nevo::run_finetune(run_dir); });
}

nevo_status nevo_eval(const char* run_dir, const char* test_csv, char** report) {
  if (auto st = require(run_dir && test_csv, "null argument")) return st;
  return guarded([&] {
    const nevo::EvalSummary summary = nevo::run_eval(run_dir, test_csv);
    if (report) {
      std::string text = nevo::report_to_text(summary.fixed, "fixed");
      text += nevo::report_to_text(summary.sweep, "sweep");
      *report = dup_string(text);
    }
  });
}

}  // extern "C"
