#ifndef LPVEMBED_H
#define LPVEMBED_H

/* C interface to the NLFR -> affine LPV embedding library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns an lpv_status; on failure, lpv_last_error()
 * holds a message for the calling thread until its next failing call.
 * Strings returned through char** are released with lpv_string_free.
 * Sample buffers are row-major: one row per time instant. */

#include <stddef.h>
#include <stdint.h>

#if defined(LPVEMBED_BUILDING)
#define LPV_API __attribute__((visibility("default")))
#else
#define LPV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lpv_status {
    LPV_OK = 0,
    LPV_SYNTAX_ERROR,
    LPV_UNSUPPORTED_FUNCTION,
    LPV_NON_AFFINE_FUNCTION_ARGUMENT,
    LPV_NEGATIVE_EXPONENT,
    LPV_ARITY_MISMATCH,
    LPV_DIMENSION_MISMATCH,
    LPV_NONZERO_DZW,
    LPV_NON_FINITE_ENTRY,
    LPV_EXPRESSION_ARITY_MISMATCH,
    LPV_FORMAT_ERROR,
    LPV_IO_ERROR,
    LPV_NONZERO_AT_ORIGIN,
    LPV_INVALID_ORDERING,
    LPV_SINGULAR_A,
    LPV_EIGENVALUE_FAILURE,
    LPV_COLUMN_SPACE_VIOLATION,
    LPV_EMBEDDING_DEGENERATE,
    LPV_CHANNEL_COUNT_MISMATCH,
    LPV_DIVERGENCE,
    LPV_SHAPE_MISMATCH,
    LPV_NYQUIST_VIOLATION,
    LPV_INVALID_ARGUMENT,
    LPV_UNKNOWN_EXAMPLE,
    LPV_INTERNAL_ERROR = 100
} lpv_status;

typedef enum lpv_signal {
    LPV_SIGNAL_INPUT = 0,
    LPV_SIGNAL_STATE,
    LPV_SIGNAL_OUTPUT,
    LPV_SIGNAL_Z,
    LPV_SIGNAL_W_OR_P
} lpv_signal;

typedef struct lpv_nlfr lpv_nlfr;
typedef struct lpv_model lpv_model;
typedef struct lpv_traj lpv_traj;
typedef struct lpv_compare lpv_compare;

typedef struct lpv_dims {
    size_t n_x, n_u, n_y, n_w, n_z, n_p;
} lpv_dims;

LPV_API const char* lpv_version(void);
/* Stable name, e.g. "NonzeroDzw". */
LPV_API const char* lpv_status_name(lpv_status status);
LPV_API const char* lpv_last_error(void);
LPV_API void lpv_string_free(char* s);

/* NLFR models */
LPV_API lpv_status lpv_nlfr_load(const char* path, lpv_nlfr** out);
LPV_API lpv_status lpv_nlfr_example(const char* name, lpv_nlfr** out);
LPV_API lpv_status lpv_nlfr_save(const lpv_nlfr* model, const char* path);
LPV_API lpv_status lpv_nlfr_dims(const lpv_nlfr* model, lpv_dims* out);
/* Assumption checklist. Returns the code of the first blocking failure. */
LPV_API lpv_status lpv_nlfr_validate(const lpv_nlfr* model, char** report);
LPV_API void lpv_nlfr_free(lpv_nlfr* model);

/* Embedding. ordering is 1-based; NULL with n_ordering 0 selects 1..n_z. */
LPV_API lpv_status lpv_embed(const lpv_nlfr* model, const size_t* ordering, size_t n_ordering, lpv_model** out,
                             char** report);

/* LPV models */
LPV_API lpv_status lpv_model_load(const char* path, lpv_model** out);
LPV_API lpv_status lpv_model_save(const lpv_model* model, const char* path);
LPV_API lpv_status lpv_model_dims(const lpv_model* model, lpv_dims* out);
/* Recomputes the basis from the interconnection; *consistent = 0 on mismatch. */
LPV_API lpv_status lpv_model_verify_basis(const lpv_model* model, int* consistent, double* max_deviation);
LPV_API void lpv_model_free(lpv_model* model);

/* Excitation: writes (n_steps + 1) x n_u samples to out. */
LPV_API lpv_status lpv_multisine(size_t n_u, double f_min, double f_max, double amplitude, double dt,
                                 size_t n_steps, uint64_t seed, double* out);

/* Simulation. u holds (n_steps + 1) x n_u samples; x0 may be NULL (zero state).
 * On LPV_DIVERGENCE, *out receives the trajectory up to the failing step. */
LPV_API lpv_status lpv_simulate_nlfr(const lpv_nlfr* model, const double* u, const double* x0, double dt,
                                     size_t n_steps, lpv_traj** out);
LPV_API lpv_status lpv_simulate_lpv(const lpv_model* model, const double* u, const double* x0, double dt,
                                    size_t n_steps, lpv_traj** out);
/* p holds (n_steps + 1) x n_p samples. */
LPV_API lpv_status lpv_simulate_lpv_exogenous(const lpv_model* model, const double* u, const double* p,
                                              const double* x0, double dt, size_t n_steps, lpv_traj** out);
/* Scheduling signal from the z samples of traj: samples x n_p values to out. */
LPV_API lpv_status lpv_schedule_along(const lpv_model* model, const lpv_traj* traj, double* out);

/* Trajectories */
LPV_API size_t lpv_traj_samples(const lpv_traj* traj);
LPV_API double lpv_traj_dt(const lpv_traj* traj);
LPV_API size_t lpv_traj_width(const lpv_traj* traj, lpv_signal which);
/* Copies samples x width values of the selected signal to out. */
LPV_API lpv_status lpv_traj_copy(const lpv_traj* traj, lpv_signal which, double* out);
LPV_API lpv_status lpv_traj_write_csv(const lpv_traj* traj, const char* path);
LPV_API lpv_status lpv_traj_write_spectrum_csv(const lpv_traj* traj, lpv_signal which, const char* path);
LPV_API lpv_status lpv_traj_summary(const lpv_traj* traj, char** out);
LPV_API void lpv_traj_free(lpv_traj* traj);

/* Output comparison */
LPV_API lpv_status lpv_compare_run(const lpv_traj* a, const lpv_traj* b, double tolerance, lpv_compare** out);
LPV_API int lpv_compare_passed(const lpv_compare* report);
LPV_API double lpv_compare_max_abs(const lpv_compare* report);
/* Returns 1 and sets *index when some sample exceeds the tolerance. */
LPV_API int lpv_compare_first_exceed(const lpv_compare* report, size_t* index);
LPV_API lpv_status lpv_compare_text(const lpv_compare* report, char** out);
LPV_API lpv_status lpv_compare_write_csv(const lpv_compare* report, const char* path);
LPV_API void lpv_compare_free(lpv_compare* report);

#ifdef __cplusplus
}
#endif

#endif
