#ifndef SPARSREC_H
#define SPARSREC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by all functions.
typedef enum SparsrecStatus {
  SPARSREC_STATUS_OK = 0,
  SPARSREC_STATUS_NULL_POINTER = 1,
  SPARSREC_STATUS_INVALID_ARGUMENT = 2,
  SPARSREC_STATUS_ASSEMBLY = 3,
  SPARSREC_STATUS_NUMERIC = 4,
  SPARSREC_STATUS_WEIGHT_DEGENERACY = 5,
  SPARSREC_STATUS_ASSUMPTION_VIOLATION = 6,
  SPARSREC_STATUS_THEOREM_VIOLATION = 7,
  SPARSREC_STATUS_AMBIGUOUS_ARGMAX = 8,
  SPARSREC_STATUS_CONFIG = 9,
  SPARSREC_STATUS_IO = 10,
  SPARSREC_STATUS_PANIC = 11,
} SparsrecStatus;

// Solver for `min ½‖Bx − c‖² + α‖diag(w)x‖₁` with a fixed `B`.
typedef struct SparsrecSolver SparsrecSolver;

// Transfer matrix of a unit interval or square, with its SVD.
typedef struct SparsrecTransfer SparsrecTransfer;

// Projector `P_k` and weights `w_i = ‖P_k e_i‖₂`.
typedef struct SparsrecWeights SparsrecWeights;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library on the same thread.
const char *sparsrec_last_error_message(void);

// Assembles the transfer matrix for `dim` (1 or 2), `nodes_per_side` mesh
// nodes, `source_cells` coarse cells per side and reaction coefficient
// `epsilon`.
//
// # Safety
// `out` must be a valid pointer to a handle slot.
enum SparsrecStatus sparsrec_transfer_build(uint32_t dim,
                                            size_t nodes_per_side,
                                            size_t source_cells,
                                            double epsilon,
                                            struct SparsrecTransfer **out);

// # Safety
// `h` must be null or a handle from [`sparsrec_transfer_build`] not yet freed.
void sparsrec_transfer_free(struct SparsrecTransfer *h);

// Writes the row count `m`, column count `n` and numerical rank.
//
// # Safety
// `h` must be a live transfer handle; the output pointers must be valid.
enum SparsrecStatus sparsrec_transfer_shape(const struct SparsrecTransfer *h,
                                            size_t *m,
                                            size_t *n,
                                            size_t *rank);

// Copies `A` column-major into `buf` (at least `m·n` values).
//
// # Safety
// `h` must be a live transfer handle and `buf` valid for `len` writes.
enum SparsrecStatus sparsrec_transfer_matrix(const struct SparsrecTransfer *h,
                                             double *buf,
                                             size_t len);

// Builds `P_k` and its weights; `k = 0` selects the full numerical rank.
//
// # Safety
// `t` must be a live transfer handle and `out` a valid handle slot.
enum SparsrecStatus sparsrec_weights_new(const struct SparsrecTransfer *t,
                                         size_t k,
                                         struct SparsrecWeights **out);

// # Safety
// `h` must be null or a handle from [`sparsrec_weights_new`] not yet freed.
void sparsrec_weights_free(struct SparsrecWeights *h);

// Copies the `n` weights into `buf`.
//
// # Safety
// `h` must be a live weights handle and `buf` valid for `len` writes.
enum SparsrecStatus sparsrec_weights_get(const struct SparsrecWeights *h, double *buf, size_t len);

// Copies `P_k e_j` into `buf`.
//
// # Safety
// `h` must be a live weights handle and `buf` valid for `len` writes.
enum SparsrecStatus sparsrec_weights_projected_unit(const struct SparsrecWeights *h,
                                                    size_t j,
                                                    double *buf,
                                                    size_t len);

// Noise-free single-spike prediction: `γ = 1 − α/[W⁻¹Pe_j]_j`, the upper
// bound `[W⁻¹Pe_j]_j`, and whether `α` lies below it.
//
// # Safety
// `h` must be a live weights handle; the output pointers must be valid.
enum SparsrecStatus sparsrec_predict_noise_free(const struct SparsrecWeights *h,
                                                size_t j,
                                                double alpha,
                                                double *gamma,
                                                double *alpha_upper,
                                                bool *feasible);

// Sets `holds` when `argmax_i |[W⁻¹Pe_j]_i| = j` for every `j`; `failures`
// receives the number of violating or ambiguous columns.
//
// # Safety
// `h` must be a live weights handle; the output pointers must be valid.
enum SparsrecStatus sparsrec_max_property(const struct SparsrecWeights *h,
                                          bool *holds,
                                          size_t *failures);

// Solver with fidelity operator `B` (`rows × cols`, column-major).
//
// # Safety
// `b` must be valid for `rows·cols` reads and `out` a valid handle slot.
enum SparsrecStatus sparsrec_solver_new(const double *b,
                                        size_t rows,
                                        size_t cols,
                                        struct SparsrecSolver **out);

// Solver with `B = P_k` taken from a weights handle.
//
// # Safety
// `h` must be a live weights handle and `out` a valid handle slot.
enum SparsrecStatus sparsrec_solver_from_weights(const struct SparsrecWeights *h,
                                                 struct SparsrecSolver **out);

// # Safety
// `h` must be null or a solver handle not yet freed.
void sparsrec_solver_free(struct SparsrecSolver *h);

// Solves with default settings. `c` has one entry per row of `B`; `w` and
// `x` one per column. `iterations` and `converged` may be null.
//
// # Safety
// All array pointers must be valid for their stated lengths.
enum SparsrecStatus sparsrec_solver_solve(const struct SparsrecSolver *h,
                                          const double *c,
                                          size_t c_len,
                                          const double *w,
                                          size_t w_len,
                                          double alpha,
                                          double *x,
                                          size_t x_len,
                                          size_t *iterations,
                                          bool *converged);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSREC_H */
