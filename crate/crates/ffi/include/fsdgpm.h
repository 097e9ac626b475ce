#ifndef FSDGPM_H
#define FSDGPM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsdgpmStatus {
  FSDGPM_STATUS_OK = 0,
  FSDGPM_STATUS_INVALID_INPUT = 1,
  FSDGPM_STATUS_NUMERIC = 2,
  FSDGPM_STATUS_FORMAT = 3,
  FSDGPM_STATUS_CAPACITY = 4,
  FSDGPM_STATUS_STATE = 5,
  FSDGPM_STATUS_UNDEFINED_METRIC = 6,
  FSDGPM_STATUS_USAGE = 7,
  FSDGPM_STATUS_IO = 8,
  FSDGPM_STATUS_NULL_POINTER = 9,
  FSDGPM_STATUS_PANIC = 10,
} FsdgpmStatus;

/**
 * Trained weights plus their projection memory.
 */
typedef struct FsdgpmModel FsdgpmModel;

/**
 * A seeded continual-learning run driven batch by batch.
 */
typedef struct FsdgpmTrainer FsdgpmTrainer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fsdgpm_version(void);

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *fsdgpm_last_error(void);

/**
 * Loads a checkpoint file into a new model handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum FsdgpmStatus fsdgpm_model_load(const char *path, size_t heads, struct FsdgpmModel **out);

/**
 * Writes `model` to `path` in the checkpoint format.
 *
 * # Safety
 * `model` must come from this library and `path` be NUL-terminated.
 */
enum FsdgpmStatus fsdgpm_model_save(const struct FsdgpmModel *model, const char *path);

/**
 * # Safety
 * `model` must come from this library or be null; it is invalid afterwards.
 */
void fsdgpm_model_free(struct FsdgpmModel *model);

/**
 * Input width of the network, 0 for a null handle.
 *
 * # Safety
 * `model` must come from this library or be null.
 */
size_t fsdgpm_model_input_dim(const struct FsdgpmModel *model);

/**
 * Classes per head, 0 for a null handle.
 *
 * # Safety
 * `model` must come from this library or be null.
 */
size_t fsdgpm_model_class_count(const struct FsdgpmModel *model);

/**
 * Number of weight layers, 0 for a null handle.
 *
 * # Safety
 * `model` must come from this library or be null.
 */
size_t fsdgpm_model_layer_count(const struct FsdgpmModel *model);

/**
 * Copies the stored basis rank of each layer into `out[0..len]`.
 *
 * # Safety
 * `out` must hold `len` writable elements, `len` at least the layer count.
 */
enum FsdgpmStatus fsdgpm_model_ranks(const struct FsdgpmModel *model, size_t *out, size_t len);

/**
 * Argmax class of each of `rows` inputs under the head of `task`.
 *
 * # Safety
 * `inputs` must hold `rows * cols` values and `out_labels` `rows` slots.
 */
enum FsdgpmStatus fsdgpm_model_predict(const struct FsdgpmModel *model,
                                       const double *inputs,
                                       size_t rows,
                                       size_t cols,
                                       size_t task,
                                       size_t *out_labels);

/**
 * Fraction of `rows` inputs classified as `labels` under the head of `task`.
 *
 * # Safety
 * `inputs` must hold `rows * cols` values, `labels` `rows` values.
 */
enum FsdgpmStatus fsdgpm_model_accuracy(const struct FsdgpmModel *model,
                                        const double *inputs,
                                        const size_t *labels,
                                        size_t rows,
                                        size_t cols,
                                        size_t task,
                                        double *out);

/**
 * Starts a run of `method` (for example `"fsdgpm"`) with its permuted-MNIST
 * settings on a network with layer widths `dims[0..n_dims]`.
 *
 * # Safety
 * `method` must be NUL-terminated, `dims` hold `n_dims` values, `out` be writable.
 */
enum FsdgpmStatus fsdgpm_trainer_new(const char *method,
                                     const size_t *dims,
                                     size_t n_dims,
                                     size_t heads,
                                     uint64_t seed,
                                     struct FsdgpmTrainer **out);

/**
 * # Safety
 * `trainer` must come from this library or be null; it is invalid afterwards.
 */
void fsdgpm_trainer_free(struct FsdgpmTrainer *trainer);

/**
 * Marks the start of task `task`; batches are labelled with it.
 *
 * # Safety
 * `trainer` must come from this library.
 */
enum FsdgpmStatus fsdgpm_trainer_begin_task(struct FsdgpmTrainer *trainer, size_t task);

/**
 * One training batch of the current task; writes its mean loss to `out_loss`
 * when that pointer is non-null.
 *
 * # Safety
 * `inputs` must hold `rows * cols` values and `labels` `rows` values.
 */
enum FsdgpmStatus fsdgpm_trainer_train_batch(struct FsdgpmTrainer *trainer,
                                             const double *inputs,
                                             const size_t *labels,
                                             size_t rows,
                                             size_t cols,
                                             double *out_loss);

/**
 * Closes the current task, updating the projection memory where the method keeps one.
 *
 * # Safety
 * `trainer` must come from this library.
 */
enum FsdgpmStatus fsdgpm_trainer_finish_task(struct FsdgpmTrainer *trainer);

/**
 * Copies the trainer's current weights and memory into a new model handle.
 *
 * # Safety
 * `trainer` must come from this library and `out` be writable.
 */
enum FsdgpmStatus fsdgpm_trainer_snapshot(const struct FsdgpmTrainer *trainer,
                                          struct FsdgpmModel **out);

/**
 * Final average accuracy of a row-major `tasks × tasks` matrix. `NaN`
 * marks entries that were never measured.
 *
 * # Safety
 * `r` must hold `tasks * tasks` values and `out` be writable.
 */
enum FsdgpmStatus fsdgpm_acc(const double *r, size_t tasks, double *out);

/**
 * Backward transfer of a row-major `tasks × tasks` matrix; needs `tasks >= 2`.
 *
 * # Safety
 * `r` must hold `tasks * tasks` values and `out` be writable.
 */
enum FsdgpmStatus fsdgpm_bwt(const double *r, size_t tasks, double *out);

/**
 * Smallest number of leading singular values holding `epsilon` of the energy.
 *
 * # Safety
 * `singular_values` must hold `n` values in descending order and `out` be writable.
 */
enum FsdgpmStatus fsdgpm_rank_select(const double *singular_values,
                                     size_t n,
                                     double epsilon,
                                     size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSDGPM_H */
