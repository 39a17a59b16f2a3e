/*
 * deepconsensus C API
 *
 * C bindings over the consensus-classification core: dataset handling,
 * model training and persistence, (n, k) consensus decisions, FGSM
 * perturbations, and the experiment command driver.
 *
 * Conventions:
 *   - Every fallible call returns a dc_status; DC_OK is 0. On failure the
 *     thread-local message from dc_last_error() describes the problem.
 *   - Objects are opaque handles created by dc_*_create/load/train calls
 *     and released with the matching dc_*_free (NULL is safe to free).
 *   - Buffers are caller-allocated; *_len parameters give their capacity
 *     in doubles and calls fail when the capacity is wrong.
 */
#ifndef DEEPCONSENSUS_H
#define DEEPCONSENSUS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DC_API __declspec(dllexport)
#else
#define DC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
    DC_OK = 0,
    DC_ERROR_INVALID_ARGUMENT = 1, /* bad input, config validation, missing files */
    DC_ERROR_RUNTIME = 2           /* numeric or I/O failure during execution */
} dc_status;

typedef struct dc_dataset dc_dataset;
typedef struct dc_norm_params dc_norm_params;
typedef struct dc_model dc_model;

/* Version string of the library ("0.1.0"). */
DC_API const char* dc_version(void);

/* Message for the most recent failure on this thread; never NULL. */
DC_API const char* dc_last_error(void);

/* ---- datasets ---------------------------------------------------------- */

/* CSV with a header row; the named label column holds class indices. */
DC_API dc_status dc_dataset_load_csv(const char* path, const char* label_column,
                                     dc_dataset** out);

/* Two-class (or more) Gaussian synthetic data in [0,1]^features. When
 * ground_truth_direction is non-NULL it receives the unit class-mean
 * direction (length `features`). */
DC_API dc_status dc_dataset_gen_synthetic(size_t samples, size_t features, size_t classes,
                                          double separation, double noise, uint64_t seed,
                                          dc_dataset** out, double* ground_truth_direction);

DC_API void dc_dataset_free(dc_dataset* dataset);

DC_API size_t dc_dataset_samples(const dc_dataset* dataset);
DC_API size_t dc_dataset_features(const dc_dataset* dataset);
DC_API size_t dc_dataset_classes(const dc_dataset* dataset);
/* NULL when index is out of range. */
DC_API const char* dc_dataset_feature_name(const dc_dataset* dataset, size_t index);
DC_API dc_status dc_dataset_row(const dc_dataset* dataset, size_t index, double* out,
                                size_t out_len);
DC_API dc_status dc_dataset_label(const dc_dataset* dataset, size_t index, size_t* out);

/* Seeded shuffle + partition. */
DC_API dc_status dc_dataset_split(const dc_dataset* dataset, double train_fraction,
                                  uint64_t seed, dc_dataset** train_out,
                                  dc_dataset** test_out);

/* Min-max normalization fitted on `train`; apply maps x to (x-min)/(max-min)
 * per feature (constant features to 0), without clipping. */
DC_API dc_status dc_norm_fit(const dc_dataset* train, dc_norm_params** out);
DC_API dc_status dc_norm_apply(const dc_norm_params* params, const dc_dataset* data,
                               dc_dataset** out);
DC_API void dc_norm_free(dc_norm_params* params);

/* count x features doubles, row-major, uniform on [0,1]. */
DC_API dc_status dc_gen_ood(size_t count, size_t features, uint64_t seed, double* out,
                            size_t out_len);

/* ---- models ------------------------------------------------------------ */

/* Trains a dense network on `train` (expected normalized). The JSON config
 * holds {name, hidden_width, activation, optimizer, weight_init, bias_init,
 * bias_constant, layer_count, seed, epochs, batch_size, learning_rate}; all
 * fields optional. `norm` (may be NULL) is embedded for persistence. */
DC_API dc_status dc_model_train(const dc_dataset* train, const char* config_json,
                                const dc_norm_params* norm, dc_model** out);

DC_API dc_status dc_model_save(const dc_model* model, const char* path);
DC_API dc_status dc_model_load(const char* path, dc_model** out);
DC_API void dc_model_free(dc_model* model);

DC_API size_t dc_model_input_dim(const dc_model* model);
DC_API size_t dc_model_class_count(const dc_model* model);

/* Softmax class probabilities; probs_len must equal the class count. */
DC_API dc_status dc_model_predict(const dc_model* model, const double* x, size_t x_len,
                                  double* probs_out, size_t probs_len);

/* Pre-softmax penultimate outputs. */
DC_API dc_status dc_model_penultimate(const dc_model* model, const double* x, size_t x_len,
                                      double* out, size_t out_len);

/* Jacobian of the penultimate outputs w.r.t. the input, row-major
 * class_count x input_dim. */
DC_API dc_status dc_model_jacobian(const dc_model* model, const double* x, size_t x_len,
                                   double* out, size_t out_len);

/* Gradient of the cross-entropy loss w.r.t. the input. */
DC_API dc_status dc_model_input_gradient(const dc_model* model, const double* x, size_t x_len,
                                         size_t label, double* out, size_t out_len);

/* Fast-gradient-sign perturbation clipped to [0,1]. */
DC_API dc_status dc_fgsm(const dc_model* model, const double* x, size_t x_len, size_t label,
                         double epsilon, double* out, size_t out_len);

/* ---- consensus --------------------------------------------------------- */

/* probs: n_models x classes row-major per-model class probabilities (rows
 * sum to 1). Writes whether the sample is accepted, the chosen class, the
 * confidence max(P_min), and optionally the per-class P_min vector. */
DC_API dc_status dc_consensus_classify(const double* probs, size_t n_models, size_t classes,
                                       size_t k, double p_t, int* accepted_out,
                                       size_t* class_out, double* confidence_out,
                                       double* p_min_out);

/* ---- experiment driver ------------------------------------------------- */

/* Runs one CLI verb: train, consensus, attack, interpret, walk, report.
 * config_path may be NULL for report. out_dir overrides the config's
 * output_dir when non-NULL. seed_override >= 0 reseeds every component
 * from that master seed. overrides_json (may be NULL) currently supports
 * {"models_dir": "<path>"}. run_dir_out (may be NULL) receives the run
 * directory; the buffer holds up to run_dir_len bytes including the
 * terminator. */
DC_API dc_status dc_run_command(const char* command, const char* config_path,
                                const char* out_dir, int64_t seed_override,
                                const char* overrides_json, char* run_dir_out,
                                size_t run_dir_len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DEEPCONSENSUS_H */
