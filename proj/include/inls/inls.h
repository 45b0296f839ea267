/* C interface to the inls simulator. Every function returns an inls_status;
 * on failure inls_last_error() describes the error of the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * inls_string_free. */
#ifndef INLS_INLS_H
#define INLS_INLS_H

#include <stddef.h>
#include <stdint.h>

#if defined(INLS_BUILDING)
#define INLS_API __attribute__((visibility("default")))
#else
#define INLS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum inls_status {
  INLS_OK = 0,
  INLS_ERR_VALIDATION = 2,
  INLS_ERR_BLOWUP = 3,
  INLS_ERR_IO = 4,
  INLS_ERR_INTERNAL = 5
} inls_status;

typedef struct inls_field inls_field;

INLS_API const char *inls_version(void);
INLS_API const char *inls_last_error(void);
INLS_API void inls_string_free(char *s);

/* Exponent report for (d, b, alpha, mu); alpha may be NULL for the partial
 * report. With with_certificate set, a scattering certificate is searched
 * (hints may be NULL). */
INLS_API inls_status inls_regimes(int d, const char *b, const char *alpha,
                                  int mu, int with_certificate,
                                  const char *epsilon_hint,
                                  const char *tau_hint, char **json_out,
                                  char **table_out);

/* Certificate only; fails with INLS_ERR_VALIDATION outside the regime or
 * when the search is exhausted. */
INLS_API inls_status inls_certificate(int d, const char *b, const char *alpha,
                                      const char *epsilon_hint,
                                      const char *tau_hint, char **json_out,
                                      char **table_out);

/* Parses and validates a config; canonical text through canonical_out. */
INLS_API inls_status inls_config_check(const char *config_text,
                                       char **canonical_out);

/* Runs a config into out_dir. seed may be NULL. */
INLS_API inls_status inls_run(const char *config_text, const char *out_dir,
                              const uint64_t *seed, char **summary_out);

/* Identity checks of a run directory; INLS_ERR_VALIDATION when an asserted
 * check fails (the table is still returned). */
INLS_API inls_status inls_verify(const char *run_dir, char **json_out,
                                 char **table_out);

INLS_API inls_status inls_scatter(const char *run_dir, char **json_out);
INLS_API inls_status inls_plot(const char *run_dir);

/* Runs configs into root/<stem> on a worker pool; summary is JSON. Fails
 * with the largest exit code among the runs. */
INLS_API inls_status inls_sweep(const char *const *config_paths, size_t count,
                                const char *root, int threads,
                                const uint64_t *seed, char **summary_out);

INLS_API inls_status inls_field_read(const char *path, inls_field **out);
INLS_API inls_status inls_field_write(const inls_field *f, const char *path);
INLS_API void inls_field_free(inls_field *f);
INLS_API inls_status inls_field_info(const inls_field *f, int *d, int *n,
                                     double *L, int *offset);
INLS_API inls_status inls_field_mass(const inls_field *f, double *out);
INLS_API inls_status inls_field_h1(const inls_field *f, double *out);
INLS_API inls_status inls_field_lq(const inls_field *f, double q, double *out);
INLS_API inls_status inls_field_free_propagate(const inls_field *f, double t,
                                               inls_field **out);

#ifdef __cplusplus
}
#endif

#endif
