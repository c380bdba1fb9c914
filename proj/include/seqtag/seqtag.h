/*
 * seqtag C API.
 *
 * Every object is an opaque handle owned by the caller and released with
 * the matching *_free function. Functions return a seqtag_status; on
 * failure seqtag_last_error() describes the problem for the calling thread.
 * Strings returned by accessors stay valid until the owning handle is
 * freed.
 */
#ifndef SEQTAG_SEQTAG_H_
#define SEQTAG_SEQTAG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SEQTAG_BUILDING)
#define SEQTAG_API __declspec(dllexport)
#else
#define SEQTAG_API __declspec(dllimport)
#endif
#else
#define SEQTAG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum seqtag_status {
  SEQTAG_OK = 0,
  SEQTAG_ERR_ARGUMENT = 1,
  SEQTAG_ERR_PARSE = 2,
  SEQTAG_ERR_VALIDATION = 3,
  SEQTAG_ERR_FORMAT = 4,
  SEQTAG_ERR_CONFIG = 5,
  SEQTAG_ERR_NUMERIC = 6,
  SEQTAG_ERR_IO = 7,
  SEQTAG_ERR_INTEGRITY = 8,
  SEQTAG_ERR_VERSION = 9,
  SEQTAG_ERR_CONTRACT = 10,
  SEQTAG_ERR_INTERNAL = 11
} seqtag_status;

typedef struct seqtag_dataset seqtag_dataset;
typedef struct seqtag_config seqtag_config;
typedef struct seqtag_model seqtag_model;
typedef struct seqtag_report seqtag_report;
typedef struct seqtag_table seqtag_table;

SEQTAG_API const char* seqtag_version(void);
SEQTAG_API const char* seqtag_last_error(void);
SEQTAG_API const char* seqtag_status_name(seqtag_status status);

/* ---- datasets (CoNLL: surface<TAB>gold[<TAB>pred], blank line between sentences) ---- */

/* classes: comma-separated entity classes, or NULL to infer them from the tags. */
SEQTAG_API seqtag_status seqtag_dataset_read(const char* path, const char* classes,
                                             seqtag_dataset** out);
SEQTAG_API seqtag_status seqtag_dataset_parse(const char* text, size_t length,
                                              const char* classes, seqtag_dataset** out);
/* Untagged raw text: one sentence per line, split on whitespace. */
SEQTAG_API seqtag_status seqtag_dataset_read_raw(const char* path, const char* classes,
                                                 seqtag_dataset** out);
SEQTAG_API seqtag_status seqtag_dataset_write(const seqtag_dataset* data, const char* path);
SEQTAG_API size_t seqtag_dataset_sentences(const seqtag_dataset* data);
SEQTAG_API size_t seqtag_dataset_tokens(const seqtag_dataset* data);
/* Comma-separated class list of the dataset's tag scheme. */
SEQTAG_API const char* seqtag_dataset_classes(const seqtag_dataset* data);
SEQTAG_API size_t seqtag_dataset_warning_count(const seqtag_dataset* data);
SEQTAG_API const char* seqtag_dataset_warning(const seqtag_dataset* data, size_t index);
SEQTAG_API void seqtag_dataset_free(seqtag_dataset* data);

/* ---- training configuration (flat key = value) ---- */

SEQTAG_API seqtag_status seqtag_config_new(seqtag_config** out);
SEQTAG_API seqtag_status seqtag_config_read(seqtag_config* config, const char* path);
SEQTAG_API seqtag_status seqtag_config_set(seqtag_config* config, const char* key,
                                           const char* value);
SEQTAG_API const char* seqtag_config_text(seqtag_config* config);
SEQTAG_API void seqtag_config_free(seqtag_config* config);

/* ---- models ---- */

typedef void (*seqtag_epoch_fn)(int epoch, double train_loss, double validation_f1,
                                void* user);

/* extra_vocab may be NULL; its words join the vocabulary (e.g. a test set).
 * If the config lists no classes, the training data's scheme is used. */
SEQTAG_API seqtag_status seqtag_train(const seqtag_config* config, const seqtag_dataset* train,
                                      const seqtag_dataset* extra_vocab, seqtag_epoch_fn on_epoch,
                                      void* user, seqtag_model** out);
SEQTAG_API seqtag_status seqtag_model_save(const seqtag_model* model, const char* path);
SEQTAG_API seqtag_status seqtag_model_load(const char* path, seqtag_model** out);
/* The input's classes must equal the model's; read inputs with
 * seqtag_model_classes(model) as the class list. */
SEQTAG_API seqtag_status seqtag_model_tag(const seqtag_model* model, const seqtag_dataset* input,
                                          seqtag_dataset** out);
SEQTAG_API const char* seqtag_model_classes(const seqtag_model* model);
SEQTAG_API const char* seqtag_model_variant(const seqtag_model* model);
SEQTAG_API int seqtag_model_best_epoch(const seqtag_model* model);
SEQTAG_API size_t seqtag_model_epochs(const seqtag_model* model);
SEQTAG_API double seqtag_model_validation_f1(const seqtag_model* model, size_t epoch);
SEQTAG_API void seqtag_model_free(seqtag_model* model);

/* ---- strict entity-level evaluation ---- */

/* pred may be NULL, in which case gold's third column holds predictions. */
SEQTAG_API seqtag_status seqtag_evaluate(const seqtag_dataset* gold, const seqtag_dataset* pred,
                                         seqtag_report** out);
SEQTAG_API const char* seqtag_report_text(const seqtag_report* report);
SEQTAG_API const char* seqtag_report_json(const seqtag_report* report);
SEQTAG_API double seqtag_report_micro_f1(const seqtag_report* report);
SEQTAG_API void seqtag_report_free(seqtag_report* report);

/* ---- embeddings ---- */

typedef struct seqtag_glove_params {
  int dim;
  int window;
  double x_max;
  double alpha;
  double learning_rate;
  int iterations;
  int min_count;
  uint64_t seed;
  int threads;
} seqtag_glove_params;

SEQTAG_API void seqtag_glove_defaults(seqtag_glove_params* params);
/* corpus_path: one pseudo-sentence per line. final_objective may be NULL. */
SEQTAG_API seqtag_status seqtag_glove_train(const char* corpus_path,
                                            const seqtag_glove_params* params,
                                            seqtag_table** out, double* final_objective);
/* Builds pseudo-sentences from a manifest of `table.csv<TAB>column` lines. */
SEQTAG_API seqtag_status seqtag_pseudo_corpus(const char* manifest_path, const char* out_path,
                                              size_t* sentences);

SEQTAG_API seqtag_status seqtag_table_load(const char* path, seqtag_table** out);
SEQTAG_API seqtag_status seqtag_table_save(const seqtag_table* table, const char* path);
SEQTAG_API int seqtag_table_dim(const seqtag_table* table);
SEQTAG_API size_t seqtag_table_size(const seqtag_table* table);
/* Vocabulary of the datasets, one concatenated segment per table. */
SEQTAG_API seqtag_status seqtag_table_assemble(const seqtag_dataset* const* datasets,
                                               size_t n_datasets,
                                               const seqtag_table* const* tables,
                                               size_t n_tables, uint64_t seed,
                                               seqtag_table** out);
SEQTAG_API seqtag_status seqtag_coverage(const seqtag_dataset* const* datasets, size_t n_datasets,
                                         const seqtag_table* const* tables, size_t n_tables,
                                         long* total_words, long* covered);
SEQTAG_API void seqtag_table_free(seqtag_table* table);

/* ---- synthetic corpora ---- */

/* spec_path may be NULL for the default spec. */
SEQTAG_API seqtag_status seqtag_synth(const char* spec_path, seqtag_dataset** train,
                                      seqtag_dataset** test);

#ifdef __cplusplus
}
#endif

#endif /* SEQTAG_SEQTAG_H_ */
