#ifndef EWCLAB_H
#define EWCLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every phase call; the CLI exits with the same
 * numeric values. */
typedef enum ewclab_status {
    EWCLAB_OK = 0,
    EWCLAB_INTERNAL = 1,
    EWCLAB_BAD_CONFIG = 2,
    EWCLAB_IO = 3,
    EWCLAB_HASH_MISMATCH = 4,
    EWCLAB_NON_FINITE = 5
} ewclab_status;

/* Opaque experiment session: a configuration plus an output directory. A
 * session is not thread-safe; use one per thread. */
typedef struct ewclab_session ewclab_session;

/* Creates a session holding the built-in configuration defaults. Returns
 * NULL only on allocation failure. */
ewclab_session* ewclab_session_new(void);
void ewclab_session_free(ewclab_session* s);

/* Replaces config values from a file of "key = value" lines ('#' comments).
 * Unknown keys are rejected. */
ewclab_status ewclab_config_load(ewclab_session* s, const char* path);

/* Sets one config key. */
ewclab_status ewclab_config_set(ewclab_session* s, const char* key, const char* value);

/* Applies a "key=value" assignment string. */
ewclab_status ewclab_config_override(ewclab_session* s, const char* assignment);

/* Copies the current value of a key into buf (NUL-terminated, truncated to
 * buf_len - 1 characters). */
ewclab_status ewclab_config_get(ewclab_session* s, const char* key, char* buf, size_t buf_len);

/* Root directory the phases write under; required before any phase runs. */
ewclab_status ewclab_set_out_dir(ewclab_session* s, const char* path);

/* Nonzero silences progress lines; machine-readable key=value lines on
 * stdout remain. */
void ewclab_set_quiet(ewclab_session* s, int quiet);

/* Experiment phases. Each writes its artifacts under the out directory and
 * returns EWCLAB_OK or the failure status. */
ewclab_status ewclab_gen_data(ewclab_session* s);
ewclab_status ewclab_pretrain(ewclab_session* s);
ewclab_status ewclab_fisher(ewclab_session* s);
ewclab_status ewclab_inject(ewclab_session* s);
ewclab_status ewclab_sweep(ewclab_session* s);

/* checkpoint_path NULL or "" evaluates the inject checkpoint. */
ewclab_status ewclab_eval(ewclab_session* s, const char* checkpoint_path);

/* top_n <= 0 uses the default of 800 parameters per layer group. */
ewclab_status ewclab_overlap(ewclab_session* s, long long top_n);

/* gen-data, pretrain, fisher, inject, eval, sweep, overlap in order. */
ewclab_status ewclab_reproduce(ewclab_session* s);

/* Message for the most recent failing call on s; "" after a success.
 * The pointer stays valid until the next call on the same session. */
const char* ewclab_last_error(const ewclab_session* s);

/* Library version string. */
const char* ewclab_version(void);

#ifdef __cplusplus
}
#endif

#endif /* EWCLAB_H */
