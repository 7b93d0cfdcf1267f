#include "typegate/typegate.h"

#include "typegate/corpus.hpp"
#include "typegate/detect.hpp"
#include "typegate/metrics.hpp"

#include "json.hpp"

#include <cstdlib>
#include <cstring>
#include <new>

struct tg_stubs {
  typegate::StubSet stubs;
};

struct tg_corpus {
  typegate::Corpus corpus;
};

struct tg_detector {
  std::unique_ptr<typegate::Detector> detector;
  std::string name;
};

namespace {

using typegate::Error;
using typegate::ErrorCode;
using ordered_json = nlohmann::ordered_json;

thread_local std::string last_error;

tg_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return TG_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return TG_ERR_IO;
    case ErrorCode::Lex: return TG_ERR_LEX;
    case ErrorCode::Parse: return TG_ERR_PARSE;
    case ErrorCode::UnsupportedSyntax: return TG_ERR_UNSUPPORTED_SYNTAX;
    case ErrorCode::Schema: return TG_ERR_SCHEMA;
    case ErrorCode::NoSite: return TG_ERR_NO_SITE;
    case ErrorCode::NoReplacementPool: return TG_ERR_NO_REPLACEMENT_POOL;
    case ErrorCode::UnlabeledSample: return TG_ERR_UNLABELED_SAMPLE;
    case ErrorCode::MissingOutcome: return TG_ERR_MISSING_OUTCOME;
    case ErrorCode::Protocol: return TG_ERR_PROTOCOL;
    case ErrorCode::DetectorCrashed: return TG_ERR_DETECTOR_CRASHED;
    case ErrorCode::Timeout: return TG_ERR_TIMEOUT;
    case ErrorCode::NoCrossover: return TG_ERR_NO_CROSSOVER;
    case ErrorCode::Internal: return TG_ERR_INTERNAL;
  }
  return TG_ERR_INTERNAL;
}

tg_status fail(tg_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into a status and message.
template <typename F>
tg_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return TG_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TG_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, std::string("null argument: ") + what);
}

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); }

ordered_json outcome_json(const typegate::DetectorOutcome& o) {
  ordered_json j;
  j["has_bug"] = o.has_bug;
  j["line"] = o.location ? ordered_json(o.location->line) : ordered_json();
  j["token_index"] =
      o.location && o.location->token_index ? ordered_json(*o.location->token_index) : ordered_json();
  j["score"] = optional_number(o.score);
  j["audit"] = o.audit;
  return j;
}

tg_corpus* wrap(typegate::Corpus corpus) { return new tg_corpus{std::move(corpus)}; }

typegate::Corpus from_samples(std::vector<typegate::ProgramSample> samples, const typegate::Corpus& parent,
                              const std::string& suffix) {
  typegate::Corpus c;
  c.name = parent.name + suffix;
  c.parents = {parent.name};
  c.samples = std::move(samples);
  return c;
}

}  // namespace

extern "C" {

const char* tg_version(void) { return "typegate 1.0.0"; }

const char* tg_status_name(tg_status status) {
  if (status == TG_OK) return "ok";
  if (status < TG_OK || status > TG_ERR_INTERNAL) return "unknown";
  return typegate::error_code_name(static_cast<ErrorCode>(status - 1));
}

const char* tg_last_error(void) { return last_error.c_str(); }

void tg_string_free(char* s) { std::free(s); }

tg_status tg_read_file(const char* path, char** out) {
  return guarded([&] {
    require(path && out, "path/out");
    *out = dup_string(typegate::read_file(path));
  });
}

tg_status tg_write_file_atomic(const char* path, const char* data, size_t size) {
  return guarded([&] {
    require(path && (data || size == 0), "path/data");
    typegate::write_file_atomic(path, std::string_view(data ? data : "", size));
  });
}

tg_status tg_stubs_parse(const char* text, tg_stubs** out) {
  return guarded([&] {
    require(text && out, "text/out");
    *out = new tg_stubs{typegate::StubSet::parse(text)};
  });
}

void tg_stubs_free(tg_stubs* stubs) { delete stubs; }

tg_status tg_check(const char* source, int use_annotations, const tg_stubs* stubs, char** out_json) {
  return guarded([&] {
    require(source && out_json, "source/out");
    typegate::CheckConfig config;
    config.use_annotations = use_annotations != 0;
    if (stubs) config.ambient_stubs = stubs->stubs;
    typegate::CheckResult r = typegate::check_source(source, config);
    ordered_json j;
    j["analyzable"] = r.analyzable;
    j["error"] = r.analyzable ? ordered_json() : ordered_json(r.error);
    j["diagnostics"] = ordered_json::array();
    for (const auto& d : r.diagnostics) {
      ordered_json dj;
      dj["category"] = typegate::category_name(d.category);
      dj["line"] = d.span.line;
      dj["column"] = d.span.column;
      dj["token_index"] = d.span.token_index;
      dj["message"] = d.message;
      j["diagnostics"].push_back(std::move(dj));
    }
    *out_json = dup_string(j.dump());
  });
}

tg_status tg_corpus_read(const char* path, tg_corpus** out) {
  return guarded([&] {
    require(path && out, "path/out");
    *out = wrap(typegate::read_jsonl(path));
  });
}

tg_status tg_corpus_parse(const char* jsonl, const char* name, tg_corpus** out) {
  return guarded([&] {
    require(jsonl && out, "jsonl/out");
    *out = wrap(typegate::parse_jsonl(jsonl, name ? name : ""));
  });
}

tg_status tg_corpus_write(const tg_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus && path, "corpus/path");
    typegate::write_jsonl(corpus->corpus, path);
  });
}

tg_status tg_corpus_serialize(const tg_corpus* corpus, char** out_jsonl) {
  return guarded([&] {
    require(corpus && out_jsonl, "corpus/out");
    *out_jsonl = dup_string(typegate::to_jsonl(corpus->corpus.samples));
  });
}

void tg_corpus_free(tg_corpus* corpus) { delete corpus; }

size_t tg_corpus_size(const tg_corpus* corpus) { return corpus ? corpus->corpus.samples.size() : 0; }

size_t tg_corpus_count(const tg_corpus* corpus, tg_label label) {
  if (!corpus) return 0;
  return corpus->corpus.count(label == TG_LABEL_BUGGY ? typegate::Label::Buggy : typegate::Label::Correct);
}

const char* tg_corpus_name(const tg_corpus* corpus) { return corpus ? corpus->corpus.name.c_str() : ""; }

tg_status tg_corpus_sample_json(const tg_corpus* corpus, size_t index, char** out_json) {
  return guarded([&] {
    require(corpus && out_json, "corpus/out");
    if (index >= corpus->corpus.samples.size()) throw Error(ErrorCode::InvalidArgument, "sample index out of range");
    *out_json = dup_string(typegate::sample_to_json(corpus->corpus.samples[index]));
  });
}

tg_status tg_inject(const tg_corpus* in, uint64_t seed, double rate, tg_corpus** out, char** summary_json) {
  return guarded([&] {
    require(in && out, "in/out");
    typegate::InjectSummary s;
    typegate::Corpus result = typegate::inject_corpus(in->corpus, seed, rate, &s);
    if (summary_json) {
      ordered_json j;
      j["injected"] = s.injected;
      j["skipped_rate"] = s.skipped_rate;
      j["skipped_no_site"] = s.skipped_no_site;
      j["skipped_unparsable"] = s.skipped_unparsable;
      *summary_json = dup_string(j.dump());
    }
    *out = wrap(std::move(result));
  });
}

tg_status tg_label_corpus(tg_corpus* corpus, int use_annotations, size_t jobs, char** summary_json) {
  return guarded([&] {
    require(corpus, "corpus");
    typegate::CheckConfig config;
    config.use_annotations = use_annotations != 0;
    // Label into a copy so a failure leaves the corpus untouched.
    typegate::Corpus copy = corpus->corpus;
    typegate::LabelSummary s = typegate::label_corpus(copy, config, jobs);
    if (summary_json) {
      ordered_json j;
      j["buggy"] = s.buggy;
      j["type_related"] = s.type_related;
      j["unanalyzable"] = s.unanalyzable;
      j["histogram"] = ordered_json::object();
      for (const auto& [name, n] : s.histogram) j["histogram"][name] = n;
      *summary_json = dup_string(j.dump());
    }
    corpus->corpus = std::move(copy);
  });
}

tg_status tg_dedup(const tg_corpus* eval, const tg_corpus* train, tg_corpus** kept, tg_corpus** removed,
                   char** summary_json) {
  return guarded([&] {
    require(eval && train && kept, "eval/train/kept");
    typegate::DedupResult r = typegate::dedup(eval->corpus, train->corpus);
    if (summary_json) {
      ordered_json j;
      j["kept"] = r.kept.samples.size();
      j["removed"] = r.removed.samples.size();
      j["removed_correct_fraction"] = optional_number(r.removed_correct_fraction);
      j["removed_buggy_fraction"] = optional_number(r.removed_buggy_fraction);
      *summary_json = dup_string(j.dump());
    }
    *kept = wrap(std::move(r.kept));
    if (removed) *removed = wrap(std::move(r.removed));
  });
}

tg_status tg_split_by_type_related(const tg_corpus* in, tg_corpus** type_related, tg_corpus** other_bugs,
                                   tg_corpus** correct) {
  return guarded([&] {
    require(in && type_related && other_bugs && correct, "in/out");
    typegate::TypeSplit s = typegate::split_by_type_related(in->corpus);
    auto a = std::make_unique<tg_corpus>(tg_corpus{from_samples(std::move(s.type_related_bugs), in->corpus, "-type-related")});
    auto b = std::make_unique<tg_corpus>(tg_corpus{from_samples(std::move(s.other_bugs), in->corpus, "-other-bugs")});
    auto c = std::make_unique<tg_corpus>(tg_corpus{from_samples(std::move(s.correct), in->corpus, "-correct")});
    *type_related = a.release();
    *other_bugs = b.release();
    *correct = c.release();
  });
}

tg_status tg_filter_train(const tg_corpus* in, uint64_t seed, tg_corpus** out) {
  return guarded([&] {
    require(in && out, "in/out");
    *out = wrap(typegate::filter_train(in->corpus, seed));
  });
}

tg_status tg_detector_create(const char* spec, const tg_detector_options* options, tg_detector** out) {
  return guarded([&] {
    require(spec && out, "spec/out");
    tg_detector_options opts{};
    if (options) opts = *options;
    const std::string s = spec;
    std::unique_ptr<typegate::Detector> inner;
    if (s.rfind("external:", 0) == 0 && s.size() > 9) {
      typegate::ExternalDetectorConfig c;
      c.command = s.substr(9);
      if (opts.timeout_ms) c.timeout = std::chrono::milliseconds(opts.timeout_ms);
      if (opts.processes) c.processes = opts.processes;
      inner = typegate::make_external_detector(std::move(c));
    } else {
      inner = typegate::make_detector(s);
    }
    if (opts.cascade) {
      typegate::TypecheckDetectorConfig c;
      c.use_annotations = opts.cascade_annotations != 0;
      inner = typegate::make_cascade(typegate::make_typecheck_detector(std::move(c)), std::move(inner));
    }
    std::string name = inner->name();
    *out = new tg_detector{std::move(inner), std::move(name)};
  });
}

void tg_detector_free(tg_detector* detector) { delete detector; }

const char* tg_detector_name(const tg_detector* detector) { return detector ? detector->name.c_str() : ""; }

tg_status tg_detector_run(tg_detector* detector, const char* sample_json, char** out_json) {
  return guarded([&] {
    require(detector && sample_json && out_json, "detector/sample/out");
    typegate::Corpus one = typegate::parse_jsonl(sample_json);
    if (one.samples.size() != 1) throw Error(ErrorCode::InvalidArgument, "expected exactly one sample");
    *out_json = dup_string(outcome_json(detector->detector->run(one.samples.front())).dump());
  });
}

tg_status tg_evaluate(tg_detector* detector, const tg_corpus* corpus, tg_match_rule match, const double* extra_betas,
                      size_t n_betas, size_t jobs, tg_counts* counts, char** csv_row) {
  return guarded([&] {
    require(detector && corpus, "detector/corpus");
    require(extra_betas || n_betas == 0, "betas");
    const auto rule = match == TG_MATCH_TOKEN ? typegate::MatchRule::Token : typegate::MatchRule::Line;
    auto outcomes = typegate::run_detector(*detector->detector, corpus->corpus.samples, jobs);
    typegate::EvalCounts c = typegate::tally(outcomes, corpus->corpus.samples, rule);
    std::vector<double> betas(extra_betas, extra_betas + n_betas);
    typegate::EvalReport report = typegate::make_report(detector->name, corpus->corpus.name, c, betas);
    if (counts) *counts = tg_counts{c.tp, c.fp, c.fn, c.tn};
    if (csv_row) *csv_row = dup_string(typegate::report_csv_row(report));
  });
}

tg_status tg_report_csv_header(const double* extra_betas, size_t n_betas, char** out) {
  return guarded([&] {
    require(out && (extra_betas || n_betas == 0), "betas/out");
    *out = dup_string(typegate::report_csv_header(std::vector<double>(extra_betas, extra_betas + n_betas)));
  });
}

tg_status tg_precision_recall(tg_counts counts, double* precision, int* precision_defined, double* recall,
                              int* recall_defined) {
  return guarded([&] {
    require(precision && precision_defined && recall && recall_defined, "out");
    auto pr = typegate::precision_recall({counts.tp, counts.fp, counts.fn, counts.tn});
    *precision_defined = pr.precision.has_value();
    *precision = pr.precision.value_or(0.0);
    *recall_defined = pr.recall.has_value();
    *recall = pr.recall.value_or(0.0);
  });
}

tg_status tg_f_beta(double precision, double recall, double beta, double* out, int* defined) {
  return guarded([&] {
    require(out && defined, "out");
    auto v = typegate::f_beta(precision, recall, beta);
    *defined = v.has_value();
    *out = v.value_or(0.0);
  });
}

tg_status tg_ratio_change(double a, double b, double* out, int* defined) {
  return guarded([&] {
    require(out && defined, "out");
    auto v = typegate::ratio_change(a, b);
    *defined = v.has_value();
    *out = v.value_or(0.0);
  });
}

tg_status tg_crossover_beta(double p1, double r1, double p2, double r2, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = typegate::crossover_beta(p1, r1, p2, r2);
  });
}

tg_status tg_fbeta_curve_csv(const char* const* labels, const double* precision, const double* recall, size_t n_pairs,
                             const double* betas, size_t n_betas, char** out) {
  return guarded([&] {
    require(out && (n_pairs == 0 || (labels && precision && recall)) && (n_betas == 0 || betas), "arguments");
    std::vector<typegate::LabeledPR> pairs;
    for (size_t i = 0; i < n_pairs; ++i) {
      require(labels[i] != nullptr, "label");
      pairs.push_back({labels[i], precision[i], recall[i]});
    }
    auto curve = typegate::fbeta_curve(pairs, std::vector<double>(betas, betas + n_betas));
    *out = dup_string(typegate::curve_csv(curve));
  });
}

}  // extern "C"
