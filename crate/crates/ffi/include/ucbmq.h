#ifndef UCBMQ_H
#define UCBMQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define UCBMQ_OK 0

#define UCBMQ_ERR_NULL_POINTER 1

#define UCBMQ_ERR_INVALID_ARGUMENT 2

#define UCBMQ_ERR_CONFIG 3

#define UCBMQ_ERR_IO 4

#define UCBMQ_ERR_TOO_LARGE 5

#define UCBMQ_ERR_SHAPE 6

#define UCBMQ_ERR_PANIC 7

/**
 * Opaque UCBMQ learner.
 */
typedef struct UcbmqAgent UcbmqAgent;

/**
 * Opaque result of a multi-run experiment.
 */
typedef struct UcbmqExperiment UcbmqExperiment;

/**
 * Opaque tabular MDP.
 */
typedef struct UcbmqMdp UcbmqMdp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ucbmq_last_error_message(void);

/**
 * Builds a grid world. Cells are 1-based `(row, col)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
int32_t ucbmq_gridworld_new(size_t rows,
                            size_t cols,
                            double noise,
                            size_t horizon,
                            size_t start_row,
                            size_t start_col,
                            size_t reward_row,
                            size_t reward_col,
                            struct UcbmqMdp **out);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
int32_t ucbmq_chain_new(size_t length, size_t horizon, struct UcbmqMdp **out);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
int32_t ucbmq_random_mdp_new(size_t states,
                             size_t actions,
                             size_t horizon,
                             uint64_t seed,
                             struct UcbmqMdp **out);

/**
 * # Safety
 * `mdp` must be null or a handle from one of the MDP constructors, not yet freed.
 */
void ucbmq_mdp_free(struct UcbmqMdp *mdp);

/**
 * # Safety
 * `mdp` must be a live handle; the output pointers must be valid.
 */
int32_t ucbmq_mdp_dims(const struct UcbmqMdp *mdp,
                       size_t *states,
                       size_t *actions,
                       size_t *horizon);

/**
 * Optimal value of the initial state.
 *
 * # Safety
 * `mdp` must be a live handle and `value` a valid pointer.
 */
int32_t ucbmq_mdp_optimal_value(const struct UcbmqMdp *mdp, double *value);

/**
 * Creates a UCBMQ learner. `theoretical_bonus` selects the Bernstein bonus
 * when nonzero, the simplified bonus otherwise.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
int32_t ucbmq_agent_new(size_t states,
                        size_t actions,
                        size_t horizon,
                        uint64_t episodes,
                        double delta,
                        int32_t theoretical_bonus,
                        struct UcbmqAgent **out);

/**
 * # Safety
 * `agent` must be null or a handle from [`ucbmq_agent_new`], not yet freed.
 */
void ucbmq_agent_free(struct UcbmqAgent *agent);

/**
 * Plays `episodes` episodes on `mdp`, writing the per-episode regret into
 * `regrets[0..episodes]` (may be null when `episodes` is 0).
 *
 * # Safety
 * Handles must be live; `regrets` must point to `episodes` writable doubles.
 */
int32_t ucbmq_agent_train(struct UcbmqAgent *agent,
                          const struct UcbmqMdp *mdp,
                          size_t episodes,
                          uint64_t seed,
                          double *regrets);

/**
 * Optimistic value `Vbar[h][s]` (0-based step and state).
 *
 * # Safety
 * `agent` must be a live handle and `value` a valid pointer.
 */
int32_t ucbmq_agent_vbar(const struct UcbmqAgent *agent, size_t step, size_t state, double *value);

/**
 * Parses a `key = value` configuration and runs it.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` a valid pointer.
 */
int32_t ucbmq_experiment_run(const char *config, struct UcbmqExperiment **out);

/**
 * # Safety
 * `experiment` must be a live handle and `len` a valid pointer.
 */
int32_t ucbmq_experiment_len(const struct UcbmqExperiment *experiment, size_t *len);

/**
 * Reads record `index`; records are ordered by run, then episode (1-based).
 *
 * # Safety
 * `experiment` must be a live handle and every output pointer valid.
 */
int32_t ucbmq_experiment_record(const struct UcbmqExperiment *experiment,
                                size_t index,
                                size_t *run,
                                size_t *episode,
                                double *regret,
                                double *cum_regret);

/**
 * # Safety
 * `experiment` must be a live handle and `path` a NUL-terminated string.
 */
int32_t ucbmq_experiment_write_csv(const struct UcbmqExperiment *experiment, const char *path);

/**
 * # Safety
 * `experiment` must be null or a handle from [`ucbmq_experiment_run`], not yet freed.
 */
void ucbmq_experiment_free(struct UcbmqExperiment *experiment);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UCBMQ_H */
