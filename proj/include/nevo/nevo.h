/* nevo — neuroevolution of autoencoder ensembles for multivariate
 * time-series anomaly detection.
 *
 * C API of the shared library. All functions return a status code
 * (NEVO_OK on success); details of the most recent failure on the calling
 * thread are available from nevo_last_error(). Objects are opaque handles
 * released with their matching _free function. Strings returned through
 * char** are heap-allocated and released with nevo_string_free.
 */

#ifndef NEVO_NEVO_H
#define NEVO_NEVO_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nevo_status {
  NEVO_OK = 0,
  NEVO_E_FAIL = 1,    /* unclassified failure */
  NEVO_E_CONFIG = 2,  /* bad or missing configuration */
  NEVO_E_DATA = 3,    /* dataset problem (parse, labels, shape) */
  NEVO_E_MISSING = 4, /* required run artifact absent */
  NEVO_E_ARG = 5,     /* invalid argument or handle */
  NEVO_E_IO = 6       /* filesystem failure */
} nevo_status;

typedef struct nevo_config nevo_config;
typedef struct nevo_dataset nevo_dataset;
typedef struct nevo_genome nevo_genome;

const char* nevo_version(void);

/* Message for the most recent error on this thread; never NULL. */
const char* nevo_last_error(void);

void nevo_string_free(char* s);

/* ---- configuration ------------------------------------------------- */

/* Fresh config with shipped defaults. */
nevo_status nevo_config_create(nevo_config** out);
nevo_status nevo_config_load(const char* path, nevo_config** out);
/* Applies one "key: value" assignment, e.g. ("seed", "42"). */
nevo_status nevo_config_set(nevo_config* cfg, const char* key, const char* value);
/* Canonical full-document snapshot. */
nevo_status nevo_config_text(const nevo_config* cfg, char** out);
void nevo_config_free(nevo_config* cfg);

/* ---- datasets ------------------------------------------------------ */

nevo_status nevo_dataset_load_csv(const char* path, int require_labels, nevo_dataset** out);
nevo_status nevo_dataset_dims(const nevo_dataset* ds, int64_t* rows, int64_t* sensors);
nevo_status nevo_dataset_save_csv(const nevo_dataset* ds, const char* path);
void nevo_dataset_free(nevo_dataset* ds);

/* ---- genomes ------------------------------------------------------- */

nevo_status nevo_genome_parse(const char* text, nevo_genome** out);
nevo_status nevo_genome_random(const nevo_config* cfg, int sensor_count, uint64_t seed,
                               nevo_genome** out);
nevo_status nevo_genome_serialize(const nevo_genome* g, char** out);
/* Violation report, one "code: message" line each; empty string when the
 * genome is valid under the config's limits. */
nevo_status nevo_genome_validate(const nevo_genome* g, const nevo_config* cfg, char** report);
void nevo_genome_free(nevo_genome* g);

/* ---- pipeline stages ---------------------------------------------- */

/* Writes train.csv, test.csv and synth-meta.kv under out_dir. */
nevo_status nevo_synth(const nevo_config* cfg, const char* out_dir);

/* Subspace evolution (vanilla family) plus model evolution; fills a run
 * directory with champions, checkpoints and logs. */
nevo_status nevo_evolve(const nevo_config* cfg, const char* out_dir);

/* Non-gradient fine-tuning of every champion in run_dir. */
nevo_status nevo_finetune(const char* run_dir);

/* Ensemble scoring of a labeled test CSV; writes eval reports under
 * run_dir and returns the report text (fixed + sweep). */
nevo_status nevo_eval(const char* run_dir, const char* test_csv, char** report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NEVO_NEVO_H */
