#ifndef WAVEKAC_H
#define WAVEKAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes; the first four match the CLI exit codes.
 */
typedef enum WkStatus {
  WK_STATUS_OK = 0,
  WK_STATUS_VERIFY_FAILED = 1,
  WK_STATUS_INPUT_ERROR = 2,
  WK_STATUS_FLAGGED = 3,
  WK_STATUS_NUMERICAL_ERROR = 4,
  WK_STATUS_NULL_POINTER = 5,
  WK_STATUS_PANIC = 6,
} WkStatus;

/*
 Result of a reconstruction run.
 */
typedef struct WkReconstruction WkReconstruction;

/*
 Spectral data (λ, κ).
 */
typedef struct WkSpectralData WkSpectralData;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next call on the same thread.
 */
const char *wk_last_error_message(void);

/*
 # Safety
 `s` must come from this library or be NULL.
 */
void wk_string_free(char *s);

/*
 Solve the forward problem described by a JSON run configuration.

 # Safety
 `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum WkStatus wk_forward(const char *config_json, struct WkSpectralData **out);

/*
 Parse spectral data from JSON (the spectral_data.json format).

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum WkStatus wk_spectral_from_json(const char *json, struct WkSpectralData **out);

/*
 # Safety
 `sd` must be a live handle or NULL; the returned string is freed with
 `wk_string_free`.
 */
char *wk_spectral_to_json(const struct WkSpectralData *sd);

/*
 Truncation K, or 0 for NULL.

 # Safety
 `sd` must be a live handle or NULL.
 */
size_t wk_spectral_k(const struct WkSpectralData *sd);

/*
 Number of harmonic functions M, or 0 for NULL.

 # Safety
 `sd` must be a live handle or NULL.
 */
size_t wk_spectral_m(const struct WkSpectralData *sd);

/*
 Copy the eigenvalues into `buf` (capacity `len`, at least K).

 # Safety
 `sd` must be a live handle; `buf` must hold `len` doubles.
 */
enum WkStatus wk_spectral_lambda(const struct WkSpectralData *sd, double *buf, size_t len);

/*
 # Safety
 `sd` must come from this library or be NULL; it is invalid afterwards.
 */
void wk_spectral_free(struct WkSpectralData *sd);

/*
 Blind reconstruction. `config_json` may be NULL for defaults. Returns
 `Flagged` (with a valid handle) when the run produced diagnostics.

 # Safety
 `sd` must be a live handle; `config_json` NULL or NUL-terminated; `out`
 writable.
 */
enum WkStatus wk_reconstruct(const struct WkSpectralData *sd,
                             const char *config_json,
                             struct WkReconstruction **out);

/*
 Test mode: like `wk_reconstruct`, then compare against the ground truth
 kept by `wk_forward` (report.distortion).

 # Safety
 As `wk_reconstruct`; `sd` must come from `wk_forward`.
 */
enum WkStatus wk_reconstruct_with_truth(const struct WkSpectralData *sd,
                                        const char *config_json,
                                        struct WkReconstruction **out);

/*
 Number of atoms in the distance matrix (0 if none).

 # Safety
 `r` must be a live handle or NULL.
 */
size_t wk_reconstruction_atom_count(const struct WkReconstruction *r);

/*
 d*(i, j); +∞ when the trajectories never meet.

 # Safety
 `r` must be a live handle; `value` writable.
 */
enum WkStatus wk_reconstruction_distance(const struct WkReconstruction *r,
                                         size_t i,
                                         size_t j,
                                         double *value);

/*
 Diameter-normalized distortion from `wk_reconstruct_with_truth`.

 # Safety
 `r` must be a live handle; `value` writable.
 */
enum WkStatus wk_reconstruction_distortion(const struct WkReconstruction *r, double *value);

/*
 Whether the collapse (symmetry) diagnostic fired: 1, 0, or -1 for NULL.

 # Safety
 `r` must be a live handle or NULL.
 */
int32_t wk_reconstruction_collapsed(const struct WkReconstruction *r);

/*
 Full report as JSON (report.json format).

 # Safety
 `r` must be a live handle or NULL; free the result with `wk_string_free`.
 */
char *wk_reconstruction_report_json(const struct WkReconstruction *r);

/*
 Distance matrix as CSV, or NULL when there is none.

 # Safety
 `r` must be a live handle or NULL; free the result with `wk_string_free`.
 */
char *wk_reconstruction_distances_csv(const struct WkReconstruction *r);

/*
 # Safety
 `r` must come from this library or be NULL; it is invalid afterwards.
 */
void wk_reconstruction_free(struct WkReconstruction *r);

/*
 Run the acceptance suites (`only` NULL for all). Writes the
 verify_report.json text to `report_json`; returns `VerifyFailed` if any
 criterion failed.

 # Safety
 String arguments NULL or NUL-terminated; `report_json` writable.
 */
enum WkStatus wk_verify(const char *config_json, const char *only, char **report_json);

/*
 Two-spectra probe for the string in the configuration. Writes the
 report JSON to `report_json`.

 # Safety
 `config_json` NUL-terminated; `report_json` writable.
 */
enum WkStatus wk_probe_krein(const char *config_json, char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEKAC_H */
