/* unfactor - weakly-supervised multi-factor disentanglement library.
 *
 * C interface. All functions return uf_status; on failure a human-readable
 * message is available from uf_last_error() until the next call on the same
 * thread. Handles are opaque and must be released with their matching
 * free/close function.
 */
#ifndef UNFACTOR_H
#define UNFACTOR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uf_status {
  UF_OK = 0,
  UF_ERR_IO = 1,         /* file missing/unreadable/unwritable */
  UF_ERR_CONFIG = 2,     /* config parse or validation failure */
  UF_ERR_FORMAT = 3,     /* malformed dataset file (bad magic, truncation, ...) */
  UF_ERR_CHECKPOINT = 4, /* incompatible or corrupt checkpoint */
  UF_ERR_ARGUMENT = 5,   /* invalid argument at the API boundary */
  UF_ERR_NUMERIC = 6,    /* non-finite loss encountered during training */
  UF_ERR_UNSUPPORTED = 7,/* operation undefined for this dataset/metric */
  UF_ERR_INTERNAL = 8
} uf_status;

typedef struct uf_config uf_config;
typedef struct uf_session uf_session;

const char* uf_version(void);

/* Thread-local message for the most recent failing call. Never NULL. */
const char* uf_last_error(void);

uf_status uf_config_load(const char* path, uf_config** out);
void uf_config_free(uf_config* cfg);

/* 64-bit FNV-1a hash of the canonicalized config, as 16 lowercase hex
 * characters plus NUL. Buffer must hold at least 17 bytes. */
uf_status uf_config_hash(const uf_config* cfg, char* out17);

/* Override the config seed (CLI --seed). */
uf_status uf_config_set_seed(uf_config* cfg, uint64_t seed);

/* A session binds a config to a data directory. data_dir may be NULL, in
 * which case the UNFACTOR_DATA_DIR environment variable is consulted. */
uf_status uf_session_open(const uf_config* cfg, const char* data_dir,
                          uf_session** out);
void uf_session_close(uf_session* s);

/* Generate (shapes) or ingest (IDX) the configured dataset into the data
 * directory. Idempotent: rerunning with the same config produces
 * byte-identical containers. */
uf_status uf_gen_data(uf_session* s);

/* Run training for one stage. stage is 1 or 2. stage1_checkpoint is
 * required for stage 2 and ignored for stage 1. resume_checkpoint may be
 * NULL. Checkpoints and a CSV log are written under out_dir. */
uf_status uf_train(uf_session* s, int stage, const char* stage1_checkpoint,
                   const char* resume_checkpoint, const char* out_dir);

/* metric is one of "mig", "consistency", "mse", "stability".
 * checkpoint_path is a checkpoint file, or a directory of snapshots for
 * "stability". Writes <out_prefix>.csv and <out_prefix>.txt. */
uf_status uf_eval(uf_session* s, const char* metric,
                  const char* checkpoint_path, const char* out_prefix);

/* (k+1)x(k+1) sample grid from a stage-2 checkpoint: top row holds the
 * labeled-condition sources, left column the unknown-condition sources,
 * interior cells the generated combinations. */
uf_status uf_sample_grid(uf_session* s, const char* checkpoint, int k,
                         uint64_t seed, const char* out_png);

/* Scatter plot of test-split codes for one encoder, projected onto its two
 * largest-variance dimensions and colored by a factor's labels. Also writes
 * <out_png>.csv with the projected points and a nearest-centroid accuracy. */
uf_status uf_plot_codes(uf_session* s, const char* checkpoint,
                        const char* encoding_factor,
                        const char* coloring_factor, const char* out_png);

#ifdef __cplusplus
}
#endif

#endif /* UNFACTOR_H */
