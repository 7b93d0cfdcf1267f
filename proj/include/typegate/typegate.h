/* C interface to the typegate toolkit. Every fallible call returns a
 * tg_status; on failure tg_last_error() holds a message for the calling
 * thread. Strings returned through char** are owned by the caller and must be
 * released with tg_string_free(). Structured results are JSON documents. */
#ifndef TYPEGATE_H
#define TYPEGATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TG_API __declspec(dllexport)
#else
#define TG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tg_status {
  TG_OK = 0,
  TG_ERR_INVALID_ARGUMENT,
  TG_ERR_IO,
  TG_ERR_LEX,
  TG_ERR_PARSE,
  TG_ERR_UNSUPPORTED_SYNTAX,
  TG_ERR_SCHEMA,
  TG_ERR_NO_SITE,
  TG_ERR_NO_REPLACEMENT_POOL,
  TG_ERR_UNLABELED_SAMPLE,
  TG_ERR_MISSING_OUTCOME,
  TG_ERR_PROTOCOL,
  TG_ERR_DETECTOR_CRASHED,
  TG_ERR_TIMEOUT,
  TG_ERR_NO_CROSSOVER,
  TG_ERR_INTERNAL
} tg_status;

typedef enum tg_label { TG_LABEL_CORRECT = 0, TG_LABEL_BUGGY = 1 } tg_label;
typedef enum tg_match_rule { TG_MATCH_LINE = 0, TG_MATCH_TOKEN = 1 } tg_match_rule;

typedef struct tg_stubs tg_stubs;
typedef struct tg_corpus tg_corpus;
typedef struct tg_detector tg_detector;

typedef struct tg_counts {
  size_t tp, fp, fn, tn;
} tg_counts;

typedef struct tg_detector_options {
  uint32_t timeout_ms;     /* external detectors; 0 = 30000 */
  size_t processes;        /* external detectors; 0 = 1 */
  int cascade;             /* nonzero: type checker first, then this detector */
  int cascade_annotations; /* the cascade's checker consumes annotations */
} tg_detector_options;

TG_API const char* tg_version(void);
TG_API const char* tg_status_name(tg_status status);
TG_API const char* tg_last_error(void);
TG_API void tg_string_free(char* s);

TG_API tg_status tg_read_file(const char* path, char** out);
TG_API tg_status tg_write_file_atomic(const char* path, const char* data, size_t size);

/* Type checking. The result is
 * {"analyzable":bool,"error":str|null,"diagnostics":[{"category","line","column","token_index","message"}]}.
 * Sources that fail to parse yield analyzable=false rather than an error. */
TG_API tg_status tg_stubs_parse(const char* text, tg_stubs** out);
TG_API void tg_stubs_free(tg_stubs* stubs);
TG_API tg_status tg_check(const char* source, int use_annotations, const tg_stubs* stubs, char** out_json);

/* Corpora. */
TG_API tg_status tg_corpus_read(const char* path, tg_corpus** out);
TG_API tg_status tg_corpus_parse(const char* jsonl, const char* name, tg_corpus** out);
TG_API tg_status tg_corpus_write(const tg_corpus* corpus, const char* path);
TG_API tg_status tg_corpus_serialize(const tg_corpus* corpus, char** out_jsonl);
TG_API void tg_corpus_free(tg_corpus* corpus);
TG_API size_t tg_corpus_size(const tg_corpus* corpus);
TG_API size_t tg_corpus_count(const tg_corpus* corpus, tg_label label);
TG_API const char* tg_corpus_name(const tg_corpus* corpus);
TG_API tg_status tg_corpus_sample_json(const tg_corpus* corpus, size_t index, char** out_json);

/* {"injected","skipped_rate","skipped_no_site","skipped_unparsable"} */
TG_API tg_status tg_inject(const tg_corpus* in, uint64_t seed, double rate, tg_corpus** out, char** summary_json);
/* Labels buggy samples in place. {"buggy","type_related","unanalyzable","histogram":{category:count}} */
TG_API tg_status tg_label_corpus(tg_corpus* corpus, int use_annotations, size_t jobs, char** summary_json);
/* {"kept","removed","removed_correct_fraction":num|null,"removed_buggy_fraction":num|null} */
TG_API tg_status tg_dedup(const tg_corpus* eval, const tg_corpus* train, tg_corpus** kept, tg_corpus** removed,
                          char** summary_json);
TG_API tg_status tg_split_by_type_related(const tg_corpus* in, tg_corpus** type_related, tg_corpus** other_bugs,
                                          tg_corpus** correct);
TG_API tg_status tg_filter_train(const tg_corpus* in, uint64_t seed, tg_corpus** out);

/* Detectors: "typecheck", "typecheck:annotations", "heuristic[:T]", "external:CMD".
 * options may be NULL. */
TG_API tg_status tg_detector_create(const char* spec, const tg_detector_options* options, tg_detector** out);
TG_API void tg_detector_free(tg_detector* detector);
TG_API const char* tg_detector_name(const tg_detector* detector);
/* Sample in corpus JSON form; result {"has_bug","line","token_index","score","audit"}. */
TG_API tg_status tg_detector_run(tg_detector* detector, const char* sample_json, char** out_json);
/* Runs the detector over the corpus and writes one report CSV row (no newline). */
TG_API tg_status tg_evaluate(tg_detector* detector, const tg_corpus* corpus, tg_match_rule match,
                             const double* extra_betas, size_t n_betas, size_t jobs, tg_counts* counts,
                             char** csv_row);
TG_API tg_status tg_report_csv_header(const double* extra_betas, size_t n_betas, char** out);

/* Metrics. *defined is set to 0 when the value is undefined (zero denominators). */
TG_API tg_status tg_precision_recall(tg_counts counts, double* precision, int* precision_defined, double* recall,
                                     int* recall_defined);
TG_API tg_status tg_f_beta(double precision, double recall, double beta, double* out, int* defined);
TG_API tg_status tg_ratio_change(double a, double b, double* out, int* defined);
TG_API tg_status tg_crossover_beta(double p1, double r1, double p2, double r2, double* out);
/* Curve CSV "label,beta,score" with scores as percentages. */
TG_API tg_status tg_fbeta_curve_csv(const char* const* labels, const double* precision, const double* recall,
                                    size_t n_pairs, const double* betas, size_t n_betas, char** out);

#ifdef __cplusplus
}
#endif

#endif
