#ifndef TENSORLAB_H
#define TENSORLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlDensityKind {
  TL_DENSITY_KIND_SCHNIRELMANN = 0,
  TL_DENSITY_KIND_ASYMPTOTIC = 1,
  TL_DENSITY_KIND_BANACH = 2,
  TL_DENSITY_KIND_BANACH_NESTED = 3,
} TlDensityKind;

typedef enum TlStatus {
  TL_STATUS_OK = 0,
  /*
   The search finished or ran out of budget without a result.
   */
  TL_STATUS_NOT_FOUND = 1,
  TL_STATUS_INVALID_ARGUMENT = 2,
  TL_STATUS_NULL_POINTER = 3,
  TL_STATUS_PANIC = 4,
} TlStatus;

/*
 A verified sumset certificate.
 */
typedef struct TlCertificate TlCertificate;

/*
 A finite set of integers inside `[0, bound)`.
 */
typedef struct TlIntSet TlIntSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *tl_last_error(void);

/*
 Library version as a static string.
 */
const char *tl_version(void);

/*
 Parses a set expression such as `"mod 4: 0,2 | 1..9"` with bound `bound`.

 # Safety
 `expr` must be a NUL-terminated string; `out` must be writable.
 */
enum TlStatus tl_intset_parse(const char *expr, size_t bound, struct TlIntSet **out);

/*
 Builds a set from `len` values, each below `bound`.

 # Safety
 `values` must point to `len` readable values (or be null with `len == 0`).
 */
enum TlStatus tl_intset_from_values(const size_t *values,
                                    size_t len,
                                    size_t bound,
                                    struct TlIntSet **out);

/*
 # Safety
 `set` must come from this library and not be used afterwards.
 */
void tl_intset_free(struct TlIntSet *set);

/*
 Number of members; 0 for a null handle.

 # Safety
 `set` must be null or a live handle.
 */
size_t tl_intset_len(const struct TlIntSet *set);

/*
 # Safety
 `set` must be null or a live handle.
 */
bool tl_intset_contains(const struct TlIntSet *set, size_t value);

/*
 Lower and upper density estimates of the set.

 # Safety
 `set` must be a live handle; `lower` and `upper` must be writable.
 */
enum TlStatus tl_density(const struct TlIntSet *set,
                         enum TlDensityKind kind,
                         double *lower,
                         double *upper);

/*
 Searches for `B_1, …, B_k` of length `len` with every sum of `n_s`
 distinct members of each `B_s` in `set`. `mults` holds `n_1..n_k`.
 A `node_budget` of 0 uses the default.

 # Safety
 `set` must be a live handle, `mults` must hold `k` values, `out` writable.
 */
enum TlStatus tl_find_sumset(const struct TlIntSet *set,
                             const size_t *mults,
                             size_t k,
                             size_t len,
                             uint64_t node_budget,
                             struct TlCertificate **out);

/*
 # Safety
 `cert` must come from this library and not be used afterwards.
 */
void tl_certificate_free(struct TlCertificate *cert);

/*
 Number of sets `k` in the certificate; 0 for a null handle.

 # Safety
 `cert` must be null or a live handle.
 */
size_t tl_certificate_sets(const struct TlCertificate *cert);

/*
 Copies the members of set `index` into `buf` (capacity `cap`) and stores
 the set's length in `written`. Fails if `cap` is too small.

 # Safety
 `cert` must be a live handle, `buf` must hold `cap` values, `written` writable.
 */
enum TlStatus tl_certificate_members(const struct TlCertificate *cert,
                                     size_t index,
                                     size_t *buf,
                                     size_t cap,
                                     size_t *written);

/*
 The certificate as JSON; release with [`tl_string_free`].

 # Safety
 `cert` must be a live handle; `out` writable.
 */
enum TlStatus tl_certificate_json(const struct TlCertificate *cert, char **out);

/*
 Re-checks `cert` against `set` and stores the verdict in `passed`.

 # Safety
 Both handles must be live; `passed` writable.
 */
enum TlStatus tl_certificate_verify(const struct TlIntSet *set,
                                    const struct TlCertificate *cert,
                                    bool *passed);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void tl_string_free(char *s);

/*
 Runs every ultrafilter clause on `I × J` (and `× K` when `k > 0`).

 # Safety
 `passed` must be writable.
 */
enum TlStatus tl_check_model(size_t i, size_t j, size_t k, bool *passed);

/*
 Estimates the integral of `f` over the real line from iterated Riemann sums.

 # Safety
 `f` must be safe to call with `user`; `out` must be writable.
 */
enum TlStatus tl_integrate(double (*f)(double x, void *user),
                           void *user,
                           double tol,
                           size_t n_cap,
                           size_t m_cap,
                           double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TENSORLAB_H */
