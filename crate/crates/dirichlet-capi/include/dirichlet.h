#ifndef DIRICHLET_H
#define DIRICHLET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum DirichletStatus {
  DIRICHLET_STATUS_OK = 0,
  DIRICHLET_STATUS_NULL_ARGUMENT = 1,
  DIRICHLET_STATUS_PARSE_ERROR = 2,
  DIRICHLET_STATUS_NOT_CONVERGED = 3,
  DIRICHLET_STATUS_GENERATOR_NOT_FACE = 4,
  DIRICHLET_STATUS_EXPLOSION_GUARD = 5,
  DIRICHLET_STATUS_INSUFFICIENT_RADIUS = 6,
  DIRICHLET_STATUS_ORACLE_FAILED = 7,
  DIRICHLET_STATUS_BAD_CONFIG = 8,
  DIRICHLET_STATUS_INTERNAL_ERROR = 9,
} DirichletStatus;

/**
 * An input group: parsed generators plus run configuration.
 */
typedef struct DirichletGroup DirichletGroup;

/**
 * A finished pipeline run.
 */
typedef struct DirichletRun DirichletRun;

/**
 * Scalar statistics of a built domain, mirrored into C.
 */
typedef struct DirichletStats {
  double injectivity_radius;
  /**
   * Negative when undefined.
   */
  double spine_radius;
  /**
   * Negative when unbounded or not computed.
   */
  double volume;
  double volume_error;
  /**
   * Negative when every vertex is ideal.
   */
  double max_vertex_distance;
  uint32_t word_length_reached;
  bool converged;
  bool cusped;
  uint32_t vertex_count;
  uint32_t edge_count;
  uint32_t face_count;
  uint64_t tile_count;
  double coverage_fraction;
  bool oracle_passed;
} DirichletStats;

/**
 * One spectrum line.
 */
typedef struct DirichletSpectrumEntry {
  double lambda;
  double theta;
  uint64_t multiplicity;
} DirichletSpectrumEntry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent error on this thread, or NULL.
 *
 * # Safety
 * The returned pointer is valid until the next failing call on the same
 * thread; do not free it.
 */
const char *dirichlet_last_error(void);

/**
 * Free a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a `dirichlet_*` function and not freed yet.
 */
void dirichlet_string_free(char *s);

/**
 * Parse a generator file into a group handle with default configuration.
 *
 * # Safety
 * `text` must be a valid NUL-terminated UTF-8 string; `out` must be a valid
 * pointer.
 */
enum DirichletStatus dirichlet_group_parse(const char *text, struct DirichletGroup **out);

/**
 * Create a group handle from raw matrices: `n` generators, each eight
 * doubles `a.re a.im b.re b.im c.re c.im d.re d.im`.
 *
 * # Safety
 * `entries` must point to `8 n` readable doubles; `out` must be valid.
 */
enum DirichletStatus dirichlet_group_new(const double *entries,
                                         uintptr_t n,
                                         struct DirichletGroup **out);

/**
 * Set the main pipeline knobs on a group handle.
 *
 * # Safety
 * `group` must be a live handle from this library.
 */
enum DirichletStatus dirichlet_group_configure(struct DirichletGroup *group,
                                               double lambda_cutoff,
                                               uint32_t max_word_length,
                                               bool optimize_basepoint,
                                               bool oriented,
                                               uint32_t oracle_max_length);

/**
 * Free a group handle.
 *
 * # Safety
 * `group` must be a live handle from this library (or NULL).
 */
void dirichlet_group_free(struct DirichletGroup *group);

/**
 * Run the full pipeline (build, tile, verify, reduce) on a group.
 *
 * # Safety
 * `group` must be a live handle; `out` must be valid.
 */
enum DirichletStatus dirichlet_run(const struct DirichletGroup *group, struct DirichletRun **out);

/**
 * Free a run handle.
 *
 * # Safety
 * `run` must be a live handle from this library (or NULL).
 */
void dirichlet_run_free(struct DirichletRun *run);

/**
 * Copy the run's scalar statistics into `out`.
 *
 * # Safety
 * `run` must be a live handle; `out` must be valid.
 */
enum DirichletStatus dirichlet_run_stats(const struct DirichletRun *run,
                                         struct DirichletStats *out);

/**
 * Number of spectrum entries in a run.
 *
 * # Safety
 * `run` must be a live handle.
 */
uintptr_t dirichlet_spectrum_len(const struct DirichletRun *run);

/**
 * Copy spectrum entry `i` into `out`.
 *
 * # Safety
 * `run` must be a live handle; `out` must be valid.
 */
enum DirichletStatus dirichlet_spectrum_entry(const struct DirichletRun *run,
                                              uintptr_t i,
                                              struct DirichletSpectrumEntry *out);

/**
 * Representative word of spectrum entry `i` as a newly allocated string
 * (free with `dirichlet_string_free`). Returns NULL on bad input.
 *
 * # Safety
 * `run` must be a live handle.
 */
char *dirichlet_spectrum_word(const struct DirichletRun *run, uintptr_t i);

/**
 * The full text of an export: 0 = domain, 1 = big list, 2 = spectrum,
 * 3 = verification report. Free with `dirichlet_string_free`.
 *
 * # Safety
 * `run` must be a live handle.
 */
char *dirichlet_run_export(const struct DirichletRun *run, uint32_t kind);

/**
 * Decide whether two words (signed generator indices, e.g. "1 2 -1")
 * represent the same group element; `verdict` receives 1 or 0.
 *
 * # Safety
 * `group` and `run` must be live handles; the word strings must be valid
 * NUL-terminated UTF-8; `verdict` must be valid.
 */
enum DirichletStatus dirichlet_check_words(const struct DirichletGroup *group,
                                           const struct DirichletRun *run,
                                           const char *word1,
                                           const char *word2,
                                           bool *verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIRICHLET_H */
