/* firetree: fire dynamics on random recursive trees.
 *
 * C API over the simulation core. All objects are opaque handles created and
 * destroyed through this interface; every fallible call returns an ft_status
 * and writes its result through out-parameters. A thread-local detail message
 * for the most recent failure is available via ft_last_error().
 */
#ifndef FIRETREE_H
#define FIRETREE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ft_status {
  FT_OK = 0,
  FT_ERROR_INVALID_ARGUMENT = 1,
  FT_ERROR_PARSE = 2,
  FT_ERROR_IO = 3,
  FT_ERROR_STAT_FAIL = 4, /* experiment ran; a statistical test failed */
  FT_ERROR_INTERNAL = 5
} ft_status;

const char* ft_status_message(ft_status status);
const char* ft_last_error(void);
const char* ft_version(void);

/* ------------------------------------------------------------------ trees */

typedef struct ft_tree ft_tree;

/* Uniform random recursive tree on {1..n}; deterministic given the seed. */
ft_status ft_tree_generate(uint64_t n, uint64_t seed, ft_tree** out);

/* parents[v-2] = parent of vertex v, for v = 2..n. Validates connectivity;
 * non-recursive labelled trees are accepted. */
ft_status ft_tree_from_parents(uint64_t n, const uint32_t* parents, ft_tree** out);

/* Text format: header "n=<n>", then one line "v parent(v)" per vertex v=2..n. */
ft_status ft_tree_parse(const char* text, ft_tree** out);
ft_status ft_tree_serialize(const ft_tree* tree, char** out_text);

uint64_t ft_tree_size(const ft_tree* tree);
uint32_t ft_tree_parent(const ft_tree* tree, uint32_t v); /* 0 for the root or out of range */
void ft_tree_free(ft_tree* tree);

void ft_string_free(char* text);

/* ---------------------------------------------------------------- dynamics */

typedef struct ft_outcome ft_outcome;

/* One full run of the dynamics with fresh edge randomness at probability p. */
ft_status ft_fire_run(const ft_tree* tree, double p, uint64_t seed, ft_outcome** out);

uint64_t ft_outcome_fireproof_count(const ft_outcome* o);   /* I_n */
uint64_t ft_outcome_fire_count(const ft_outcome* o);
uint64_t ft_outcome_root_block_size(const ft_outcome* o);   /* b0 */
uint32_t ft_outcome_root_fire_index(const ft_outcome* o);   /* 0 = root fireproof */
uint64_t ft_outcome_largest_fireproof(const ft_outcome* o);
uint32_t ft_outcome_vertex_fate(const ft_outcome* o, uint32_t v); /* 0 = fireproof */
uint64_t ft_outcome_theta(const ft_outcome* o, uint32_t fire);      /* 1-based */
uint64_t ft_outcome_block_size(const ft_outcome* o, uint32_t fire); /* 1-based */

/* Summary CSV: header plus one row
 * n,p,seed,I_n,b0,root_fire_index,num_fires,f1_down,theta_1..K,b_1..K */
ft_status ft_outcome_summary_csv(const ft_outcome* o, uint64_t n, double p,
                                 uint64_t seed, uint32_t K, char** out_text);
void ft_outcome_free(ft_outcome* o);

/* -------------------------------------------------------------- experiments */

typedef struct ft_experiment_config {
  uint64_t n;          /* 0 = experiment default */
  uint64_t trials;     /* 0 = experiment default */
  uint64_t seed;
  uint32_t workers;
  uint32_t K;          /* max fires recorded */
  int has_c, has_p, has_a;
  double c;            /* critical regime p = c ln n / n */
  double p;            /* explicit probability */
  double subcrit_a;    /* subcritical regime p = n^-a */
} ft_experiment_config;

void ft_experiment_config_init(ft_experiment_config* config);

/* Comma-separated names of the available experiments. */
const char* ft_experiment_list(void);

/* Runs a named experiment. When out_dir is non-NULL, writes
 * <out_dir>/<name>.csv and <out_dir>/<name>.json. When summary_json is
 * non-NULL it receives the summary document (free with ft_string_free).
 * Returns FT_OK when every statistical test passed, FT_ERROR_STAT_FAIL when
 * the run completed but a test failed. */
ft_status ft_experiment_run(const char* name, const ft_experiment_config* config,
                            const char* out_dir, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* FIRETREE_H */
