/* C interface to the gmpflow library. All objects are opaque handles; every call that can fail
   returns a gmpf_status and leaves a message in gmpf_last_error() (per thread). Strings returned
   through char** are owned by the caller and released with gmpf_string_free. */
#ifndef GMPFLOW_H
#define GMPFLOW_H

#include <stdint.h>

#if defined(_WIN32)
#if defined(GMPFLOW_BUILDING)
#define GMPF_API __declspec(dllexport)
#else
#define GMPF_API __declspec(dllimport)
#endif
#else
#define GMPF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int gmpf_status;
#define GMPF_OK 0
#define GMPF_ERR_VALIDATION 1 /* bad input: malformed JSON, schema breach, invalid parameters */
#define GMPF_ERR_NUMERICAL 2  /* computation failed: singular system, validity loss, no convergence */
#define GMPF_ERR_INTERNAL 3   /* unexpected failure */

typedef struct gmpf_delta gmpf_delta;   /* Delta(z) = lambda0 z + c0 + sum lambda_k / (c_k - z) */
typedef struct gmpf_window gmpf_window; /* finite window of GMP blocks */
typedef struct gmpf_jacobi gmpf_jacobi; /* finite two-sided Jacobi window */

typedef struct gmpf_options {
    int steps;      /* flow steps */
    int width;      /* a single block expands to blocks -width..width */
    int margin;     /* trusted-block margin for Delta(A) */
    int blocks;     /* output blocks -blocks+1..blocks-1 of jacobi_to_gmp */
    double eta;     /* weight of the eta-distance, 0 < eta < 1 */
    double tol;     /* solver tolerance */
    uint64_t seed;  /* recorded in CSV headers; base seed of the self-test */
    const int* order; /* 1-based pole ordering, NULL for the natural order */
    int order_len;
} gmpf_options;

GMPF_API void gmpf_options_default(gmpf_options* opt);
GMPF_API const char* gmpf_version(void);
GMPF_API const char* gmpf_last_error(void);
GMPF_API void gmpf_string_free(char* s);

/* Delta from a gap set {"b0","a0","gaps":[[a,b],...]} or from its own JSON {"lambda0","c0","poles"}. */
GMPF_API gmpf_status gmpf_delta_from_gapset(const char* json, gmpf_delta** out);
GMPF_API gmpf_status gmpf_delta_parse(const char* json, gmpf_delta** out);
GMPF_API gmpf_status gmpf_delta_to_json(const gmpf_delta* d, char** out);
GMPF_API gmpf_status gmpf_delta_genus(const gmpf_delta* d, int* g);
GMPF_API gmpf_status gmpf_delta_eval(const gmpf_delta* d, double z, double* value);
/* JSON summary: Delta, gap zeros and the hull of Delta^{-1}([-2,2]). */
GMPF_API gmpf_status gmpf_delta_summary(const gmpf_delta* d, char** out);
GMPF_API void gmpf_delta_free(gmpf_delta* d);

/* Accepts a window {"g","C","j_min","blocks"}, a single-block window, or a point {"block","C"};
   the last two are repeated periodically over -width..width. */
GMPF_API gmpf_status gmpf_window_parse(const char* json, int width, gmpf_window** out);
GMPF_API gmpf_status gmpf_window_to_json(const gmpf_window* w, char** out);
GMPF_API gmpf_status gmpf_window_range(const gmpf_window* w, int* g, int* j_min, int* j_max);
/* valid = 1 when every Lambda# on the window clears the floor; message may be NULL */
GMPF_API gmpf_status gmpf_window_validate(const gmpf_window* w, int* valid, char** message);
GMPF_API void gmpf_window_free(gmpf_window* w);

GMPF_API gmpf_status gmpf_jacobi_parse(const char* json, gmpf_jacobi** out);
GMPF_API gmpf_status gmpf_jacobi_to_json(const gmpf_jacobi* j, char** out);
GMPF_API gmpf_status gmpf_jacobi_coeff(const gmpf_jacobi* j, int n, double* a, double* b);
GMPF_API void gmpf_jacobi_free(gmpf_jacobi* j);

/* Flow trajectory as CSV: n, a, b, b_ods, Lambda_1..g, validity_min, valid, dist_eta. */
GMPF_API gmpf_status gmpf_flow_csv(const gmpf_window* w, const gmpf_options* opt, char** csv);
/* Functional and diagnostics along the trajectory as CSV. */
GMPF_API gmpf_status gmpf_ks_csv(const gmpf_window* w, const gmpf_delta* d, const gmpf_options* opt, char** csv);
/* Point on the isospectral set near a seed block {"p","q"}; result JSON has block, C, residual. */
GMPF_API gmpf_status gmpf_iso_solve(const gmpf_delta* d, const char* seed_block_json, const gmpf_options* opt, char** point_json);
GMPF_API gmpf_status gmpf_jacobi_to_gmp(const gmpf_jacobi* j, const gmpf_delta* d, const gmpf_options* opt, gmpf_window** out);
GMPF_API gmpf_status gmpf_gmp_to_jacobi(const gmpf_window* w, gmpf_jacobi** out);

typedef struct gmpf_criterion {
    int id;
    const char* name;
    int pass;
    double value;
    double tolerance;
    double seconds;
    double budget;
    const char* detail;
    const char* line; /* formatted one-line report */
} gmpf_criterion;

typedef void (*gmpf_criterion_cb)(const gmpf_criterion* c, void* user);

#define GMPF_SELFTEST_INJECT_ROTATION_FAULT 1u
#define GMPF_SELFTEST_NO_BUDGET 2u

/* Runs the acceptance criteria; failures receives the number of failed criteria. */
GMPF_API gmpf_status gmpf_selftest(gmpf_criterion_cb cb, void* user, unsigned flags, uint64_t seed, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* GMPFLOW_H */
