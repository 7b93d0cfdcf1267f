/* Exercises the shared library through its C header only. */
#include "typegate/typegate.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;
static int checks = 0;

#define CHECK(cond)                                                      \
  do {                                                                   \
    ++checks;                                                            \
    if (!(cond)) {                                                       \
      ++failures;                                                        \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
    }                                                                    \
  } while (0)

#define CHECK_OK(call)                                                                  \
  do {                                                                                  \
    tg_status st_ = (call);                                                             \
    ++checks;                                                                           \
    if (st_ != TG_OK) {                                                                 \
      ++failures;                                                                       \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, tg_status_name(st_), \
              tg_last_error());                                                         \
    }                                                                                   \
  } while (0)

static const char* kBuggy =
    "def take_last_assignment(source):\n"
    "    first=True\n"
    "    last=None\n"
    "    for assn in source:\n"
    "        if first:\n"
    "            last=assn\n"
    "            first=False\n"
    "        if (assn[1]!=first[1]):\n"
    "            (yield last)\n"
    "        last=assn\n"
    "    if (last is not None):\n"
    "        (yield last)\n";

static int contains(const char* hay, const char* needle) { return hay && strstr(hay, needle) != NULL; }

static void test_check(void) {
  char* out = NULL;
  CHECK_OK(tg_check(kBuggy, 0, NULL, &out));
  CHECK(contains(out, "\"analyzable\":true"));
  CHECK(contains(out, "\"category\":\"unsupported-operand\""));
  CHECK(contains(out, "\"line\":8"));
  tg_string_free(out);

  out = NULL;
  CHECK_OK(tg_check("def f(:\n", 0, NULL, &out));
  CHECK(contains(out, "\"analyzable\":false"));
  tg_string_free(out);

  tg_stubs* stubs = NULL;
  CHECK_OK(tg_stubs_parse("def helper(x: int) -> str: ...\n", &stubs));
  out = NULL;
  CHECK_OK(tg_check("def g(a):\n    b = helper(1)\n    return b.nope\n", 0, stubs, &out));
  CHECK(contains(out, "attribute-error"));
  tg_string_free(out);
  tg_stubs_free(stubs);

  CHECK(tg_check(NULL, 0, NULL, &out) == TG_ERR_INVALID_ARGUMENT);
  CHECK(strlen(tg_last_error()) > 0);
  CHECK(tg_stubs_parse("def broken(:\n", &stubs) != TG_OK);
}

static void test_corpus(const char* data) {
  char path[4096];
  snprintf(path, sizeof path, "%s/mini_corpus.jsonl", data);
  tg_corpus* mini = NULL;
  CHECK_OK(tg_corpus_read(path, &mini));
  CHECK(tg_corpus_size(mini) == 20);
  CHECK(tg_corpus_count(mini, TG_LABEL_CORRECT) == 20);
  CHECK(strcmp(tg_corpus_name(mini), "mini_corpus") == 0);

  char* text = NULL;
  char* original = NULL;
  CHECK_OK(tg_corpus_serialize(mini, &text));
  CHECK_OK(tg_read_file(path, &original));
  CHECK(text && original && strcmp(text, original) == 0);
  tg_string_free(text);
  tg_string_free(original);

  tg_corpus* injected = NULL;
  char* summary = NULL;
  CHECK_OK(tg_inject(mini, 7, 1.0, &injected, &summary));
  CHECK(contains(summary, "\"injected\":20"));
  CHECK(tg_corpus_size(injected) == 40);
  CHECK(tg_corpus_count(injected, TG_LABEL_BUGGY) == 20);
  tg_string_free(summary);

  tg_corpus* unlabeled_out = NULL;
  CHECK(tg_filter_train(injected, 1, &unlabeled_out) == TG_ERR_UNLABELED_SAMPLE);

  summary = NULL;
  CHECK_OK(tg_label_corpus(injected, 0, 2, &summary));
  CHECK(contains(summary, "\"buggy\":20"));
  CHECK(contains(summary, "\"type_related\":4"));
  tg_string_free(summary);

  char* sample = NULL;
  CHECK_OK(tg_corpus_sample_json(injected, 1, &sample));
  CHECK(contains(sample, "\"label\":\"buggy\""));
  CHECK(contains(sample, "\"type_related\":"));

  tg_corpus *tr = NULL, *other = NULL, *correct = NULL;
  CHECK_OK(tg_split_by_type_related(injected, &tr, &other, &correct));
  CHECK(tg_corpus_size(tr) == 4);
  CHECK(tg_corpus_size(other) == 16);
  CHECK(tg_corpus_size(correct) == 20);

  tg_corpus* filtered = NULL;
  CHECK_OK(tg_filter_train(injected, 3, &filtered));
  CHECK(tg_corpus_size(filtered) == 40);
  tg_corpus *tr2 = NULL, *other2 = NULL, *correct2 = NULL;
  CHECK_OK(tg_split_by_type_related(filtered, &tr2, &other2, &correct2));
  CHECK(tg_corpus_size(tr2) == 0);
  CHECK(tg_corpus_size(other2) == 20);

  tg_corpus *kept = NULL, *removed = NULL;
  summary = NULL;
  CHECK_OK(tg_dedup(injected, mini, &kept, &removed, &summary));
  CHECK(tg_corpus_size(kept) == 0);
  CHECK(tg_corpus_size(removed) == 40);
  CHECK(contains(summary, "\"removed_buggy_fraction\":1.0"));
  tg_string_free(summary);

  /* Detectors and evaluation. */
  tg_detector* tc = NULL;
  CHECK_OK(tg_detector_create("typecheck", NULL, &tc));
  CHECK(strcmp(tg_detector_name(tc), "typecheck") == 0);
  char* outcome = NULL;
  CHECK_OK(tg_detector_run(tc, sample, &outcome));
  CHECK(contains(outcome, "\"has_bug\":"));
  tg_string_free(outcome);
  tg_string_free(sample);

  tg_counts counts;
  char* row = NULL;
  CHECK_OK(tg_evaluate(tc, injected, TG_MATCH_LINE, NULL, 0, 2, &counts, &row));
  CHECK(counts.tp == 4 && counts.fp == 0 && counts.fn == 16 && counts.tn == 20);
  CHECK(contains(row, "typecheck,mini_corpus,4,0,16,20,100.00,20.00"));
  tg_string_free(row);

  tg_detector_options opts;
  memset(&opts, 0, sizeof opts);
  opts.cascade = 1;
  tg_detector* pipe = NULL;
  CHECK_OK(tg_detector_create("heuristic:2", &opts, &pipe));
  CHECK(strcmp(tg_detector_name(pipe), "pipeline:heuristic:2") == 0);
  double betas[1] = {2.0};
  row = NULL;
  CHECK_OK(tg_evaluate(pipe, injected, TG_MATCH_TOKEN, betas, 1, 0, &counts, &row));
  CHECK(counts.tp + counts.fp + counts.fn + counts.tn == 40);
  CHECK(counts.tp == 4);
  tg_string_free(row);

  char* header = NULL;
  CHECK_OK(tg_report_csv_header(betas, 1, &header));
  CHECK(header && strcmp(header, "detector,corpus,tp,fp,fn,tn,precision,recall,f1.0,f1.5,f2.0") == 0);
  tg_string_free(header);

  tg_detector* bad = NULL;
  CHECK(tg_detector_create("nonsense", NULL, &bad) == TG_ERR_INVALID_ARGUMENT);
  CHECK(bad == NULL);

  tg_detector_free(tc);
  tg_detector_free(pipe);
  tg_corpus_free(kept);
  tg_corpus_free(removed);
  tg_corpus_free(tr);
  tg_corpus_free(other);
  tg_corpus_free(correct);
  tg_corpus_free(tr2);
  tg_corpus_free(other2);
  tg_corpus_free(correct2);
  tg_corpus_free(filtered);
  tg_corpus_free(injected);
  tg_corpus_free(mini);

  tg_corpus* parsed = NULL;
  CHECK(tg_corpus_parse("{\"id\":1}\n", "x", &parsed) == TG_ERR_SCHEMA);
  CHECK(contains(tg_last_error(), "line 1"));
  CHECK_OK(tg_corpus_parse("", "empty", &parsed));
  CHECK(tg_corpus_size(parsed) == 0);
  tg_corpus_free(parsed);
  CHECK(tg_corpus_read("/nonexistent/file.jsonl", &parsed) == TG_ERR_IO);
}

static void test_metrics(void) {
  tg_counts c = {3, 1, 1, 5};
  double p, r;
  int pd, rd;
  CHECK_OK(tg_precision_recall(c, &p, &pd, &r, &rd));
  CHECK(pd && rd && fabs(p - 0.75) < 1e-12 && fabs(r - 0.75) < 1e-12);
  tg_counts none = {0, 0, 0, 9};
  CHECK_OK(tg_precision_recall(none, &p, &pd, &r, &rd));
  CHECK(!pd && !rd);

  double f;
  int fd;
  CHECK_OK(tg_f_beta(29.92, 33.32, 1.5, &f, &fd));
  CHECK(fd && fabs(f - 32.19) <= 0.01);
  CHECK_OK(tg_f_beta(0, 0, 1.0, &f, &fd));
  CHECK(!fd);
  CHECK(tg_f_beta(0.5, 0.5, 0.0, &f, &fd) == TG_ERR_INVALID_ARGUMENT);

  double d;
  int dd;
  CHECK_OK(tg_ratio_change(27.91, 26.10, &d, &dd));
  CHECK(dd && fabs(d + 6.48) <= 0.01);
  CHECK_OK(tg_ratio_change(0, 1, &d, &dd));
  CHECK(!dd);

  double b;
  CHECK_OK(tg_crossover_beta(31.71, 34.54, 27.38, 36.96, &b));
  CHECK(fabs(b - 1.62) <= 0.01);
  CHECK(tg_crossover_beta(10.51, 17.47, 11.02, 21.44, &b) == TG_ERR_NO_CROSSOVER);

  const char* labels[2] = {"a", "b"};
  const double prec[2] = {0.5, 0.25};
  const double rec[2] = {0.25, 0.5};
  const double grid[2] = {1.0, 2.0};
  char* csv = NULL;
  CHECK_OK(tg_fbeta_curve_csv(labels, prec, rec, 2, grid, 2, &csv));
  CHECK(csv && strcmp(csv, "label,beta,score\na,1.0,33.33\na,2.0,27.78\nb,1.0,33.33\nb,2.0,41.67\n") == 0);
  tg_string_free(csv);
}

static void test_misc(void) {
  CHECK(strlen(tg_version()) > 0);
  CHECK(strcmp(tg_status_name(TG_OK), "ok") == 0);
  CHECK(strcmp(tg_status_name(TG_ERR_NO_CROSSOVER), "no-crossover") == 0);
  tg_string_free(NULL);
  tg_corpus_free(NULL);
  tg_detector_free(NULL);
  tg_stubs_free(NULL);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: test_capi DATA_DIR\n");
    return 2;
  }
  test_misc();
  test_check();
  test_corpus(argv[1]);
  test_metrics();
  printf("%d checks, %d failures\n", checks, failures);
  return failures ? 1 : 0;
}
