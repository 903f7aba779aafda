/* C interface of the namedis toolkit.
 *
 * Maintained by hand alongside crates/ffi/src/lib.rs; keep the two in
 * sync when the surface changes.
 *
 * Ownership rules:
 *   - Handles (nd_store, nd_table) are created by nd_*_load / nd_*_train
 *     and released with the matching nd_*_free. Free functions accept
 *     NULL.
 *   - Strings returned through char** outputs are allocated by the
 *     library and must be released with nd_string_free.
 *   - nd_last_error_message returns a pointer owned by the library,
 *     valid until the next failing call on the same thread.
 */

#ifndef NAMEDIS_H
#define NAMEDIS_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nd_status {
  ND_OK = 0,
  ND_ERR_USAGE = 1,
  ND_ERR_DATA = 2,
  ND_ERR_INTERNAL = 3,
  ND_ERR_NULL_ARGUMENT = 4,
  ND_ERR_INVALID_UTF8 = 5,
  ND_ERR_PANIC = 6,
} nd_status;

typedef struct nd_store nd_store;
typedef struct nd_table nd_table;

/* Library version as a static string. */
const char *nd_version(void);

/* Message of the most recent error on this thread, or NULL. */
const char *nd_last_error_message(void);

/* Release a string returned through a char** output. */
void nd_string_free(char *s);

/* Load a paper-id -> record JSON file. */
nd_status nd_store_load(const char *path, nd_store **out);
size_t nd_store_len(const nd_store *store);
void nd_store_free(nd_store *store);

/* Load a text-format embedding table. */
nd_status nd_table_load(const char *path, nd_table **out);

/* Train skip-gram embeddings over every paper of the store. config_json
 * may be NULL for defaults, or a JSON object with any of: dim, window,
 * negative, min_count, epochs, learning_rate, seed. */
nd_status nd_table_train(const nd_store *store, const char *config_json,
                         nd_table **out);
void nd_table_free(nd_table *table);

/* Cluster name blocks from scratch. blocks_json maps each name to a flat
 * list of paper ids; config_json may be NULL or a pipeline-config JSON
 * object. out_json receives a JSON object mapping each normalized name to
 * its list of clusters. */
nd_status nd_snd_run(const nd_store *store, const nd_table *table,
                     const char *blocks_json, const char *config_json,
                     char **out_json);

/* Pairwise precision/recall/F1 of a predicted clustering against truth;
 * both arguments are JSON lists of clusters (lists of paper ids). */
nd_status nd_eval_pairwise(const char *pred_json, const char *truth_json,
                           double *precision, double *recall, double *f1);

#ifdef __cplusplus
}
#endif

#endif /* NAMEDIS_H */
