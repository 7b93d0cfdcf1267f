// typegate command-line interface. Everything goes through the C API.
#include "typegate/typegate.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

enum Exit { kOk = 0, kFindings = 1, kUsage = 2, kRejected = 3, kRuntime = 4 };

// Failure of a C API call, carrying the exit code it maps to.
struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(tg_status s) {
  switch (s) {
    case TG_OK: return kOk;
    case TG_ERR_INVALID_ARGUMENT:
    case TG_ERR_IO: return kUsage;
    case TG_ERR_LEX:
    case TG_ERR_PARSE:
    case TG_ERR_UNSUPPORTED_SYNTAX:
    case TG_ERR_SCHEMA:
    case TG_ERR_NO_SITE:
    case TG_ERR_NO_REPLACEMENT_POOL:
    case TG_ERR_UNLABELED_SAMPLE:
    case TG_ERR_MISSING_OUTCOME:
    case TG_ERR_NO_CROSSOVER: return kRejected;
    default: return kRuntime;
  }
}

void ok(tg_status s) {
  if (s != TG_OK) throw Failure{exit_code_for(s), std::string(tg_status_name(s)) + ": " + tg_last_error()};
}

struct StringDeleter {
  void operator()(char* s) const { tg_string_free(s); }
};
struct CorpusDeleter {
  void operator()(tg_corpus* c) const { tg_corpus_free(c); }
};
struct DetectorDeleter {
  void operator()(tg_detector* d) const { tg_detector_free(d); }
};
struct StubsDeleter {
  void operator()(tg_stubs* s) const { tg_stubs_free(s); }
};
using Corpus = std::unique_ptr<tg_corpus, CorpusDeleter>;
using Detector = std::unique_ptr<tg_detector, DetectorDeleter>;

std::string take(char* s) {
  std::unique_ptr<char, StringDeleter> guard(s);
  return s ? std::string(s) : std::string();
}

Corpus read_corpus(const std::string& path) {
  tg_corpus* c = nullptr;
  ok(tg_corpus_read(path.c_str(), &c));
  return Corpus(c);
}

void write_text(const std::string& path, const std::string& text) {
  ok(tg_write_file_atomic(path.c_str(), text.data(), text.size()));
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TYPEGATE_SEED")) {
    std::uint64_t v = 0;
    std::istringstream in(env);
    if (in >> v && in.eof()) return v;
    throw Failure{kUsage, std::string("TYPEGATE_SEED is not an unsigned integer: '") + env + "'"};
  }
  throw Failure{kUsage, "no seed given: pass --seed or set TYPEGATE_SEED"};
}

ordered_json corpus_summary(const std::string& path, const tg_corpus* c) {
  return {{"path", path},
          {"samples", tg_corpus_size(c)},
          {"correct", tg_corpus_count(c, TG_LABEL_CORRECT)},
          {"buggy", tg_corpus_count(c, TG_LABEL_BUGGY)}};
}

// Input corpora carry the manifest that produced them, minus its timing, so
// the provenance chain survives in-place rewrites.
ordered_json input_summary(const std::string& path, const tg_corpus* c) {
  ordered_json entry = corpus_summary(path, c);
  char* raw = nullptr;
  if (tg_read_file((path + ".manifest.json").c_str(), &raw) != TG_OK) return entry;
  ordered_json upstream = ordered_json::parse(take(raw), nullptr, false);
  if (upstream.is_object()) {
    upstream.erase("wall_time_ms");
    entry["manifest"] = std::move(upstream);
  }
  return entry;
}

// Written next to every output file; only wall_time_ms varies between reruns.
class Manifest {
 public:
  explicit Manifest(std::string command) : start_(Clock::now()) {
    doc_["command"] = std::move(command);
    doc_["tool_version"] = tg_version();
    doc_["seed"] = nullptr;
    doc_["config"] = ordered_json::object();
    doc_["inputs"] = ordered_json::array();
    doc_["outputs"] = ordered_json::array();
  }

  ordered_json& operator[](const char* key) { return doc_[key]; }

  void write(const std::string& output_path) {
    doc_["wall_time_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_).count();
    write_text(output_path + ".manifest.json", doc_.dump(2) + "\n");
  }

 private:
  ordered_json doc_;
  Clock::time_point start_;
};

std::string percent(const ordered_json& v) {
  if (v.is_null()) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v.get<double>() * 100.0);
  return buf;
}

// "0.5,1,2" or "start:stop:step" (inclusive).
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Failure{kUsage, "bad number '" + s + "' in --grid"};
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw Failure{kUsage, "--grid range must be start:stop:step"};
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0) || stop < start) throw Failure{kUsage, "--grid range needs step > 0 and stop >= start"};
    for (long i = 0;; ++i) {
      const double v = std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9;
      if (v > stop + step * 1e-9) break;
      out.push_back(v);
    }
    return out;
  }
  std::stringstream in(text);
  for (std::string p; std::getline(in, p, ',');) out.push_back(number(p));
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

// --- subcommands ---------------------------------------------------------

struct CheckArgs {
  std::string file;
  bool annotations = false;
  std::string stubs;
  std::string format = "human";
};

int run_check(const CheckArgs& a) {
  char* raw = nullptr;
  ok(tg_read_file(a.file.c_str(), &raw));
  const std::string source = take(raw);

  std::unique_ptr<tg_stubs, StubsDeleter> stubs;
  if (!a.stubs.empty()) {
    ok(tg_read_file(a.stubs.c_str(), &raw));
    const std::string text = take(raw);
    tg_stubs* s = nullptr;
    ok(tg_stubs_parse(text.c_str(), &s));
    stubs.reset(s);
  }
  char* out = nullptr;
  ok(tg_check(source.c_str(), a.annotations, stubs.get(), &out));
  const ordered_json result = ordered_json::parse(take(out));

  if (a.format == "json") {
    ordered_json doc;
    doc["file"] = a.file;
    for (const auto& [k, v] : result.items()) doc[k] = v;
    std::cout << doc.dump() << "\n";
  } else if (!result["analyzable"].get<bool>()) {
    std::cerr << a.file << ": unanalyzable: " << result["error"].get<std::string>() << "\n";
  } else {
    for (const auto& d : result["diagnostics"])
      std::cout << a.file << ":" << d["line"].get<int>() << ":" << d["column"].get<int>() + 1 << ": "
                << d["category"].get<std::string>() << ": " << d["message"].get<std::string>() << "\n";
  }
  if (!result["analyzable"].get<bool>()) return kRejected;
  return result["diagnostics"].empty() ? kOk : kFindings;
}

struct InjectArgs {
  std::string in, out;
  std::optional<std::uint64_t> seed;
  double rate = 1.0;
};

int run_inject(const InjectArgs& a) {
  Manifest manifest("inject");
  const std::uint64_t seed = resolve_seed(a.seed);
  Corpus in = read_corpus(a.in);
  tg_corpus* raw = nullptr;
  char* summary = nullptr;
  ok(tg_inject(in.get(), seed, a.rate, &raw, &summary));
  Corpus out(raw);
  const ordered_json s = ordered_json::parse(take(summary));
  ok(tg_corpus_write(out.get(), a.out.c_str()));

  manifest["seed"] = seed;
  manifest["config"] = {{"rate", a.rate}};
  manifest["inputs"].push_back(input_summary(a.in, in.get()));
  manifest["outputs"].push_back(corpus_summary(a.out, out.get()));
  manifest["summary"] = s;
  manifest.write(a.out);
  std::cout << "injected " << s["injected"] << " bugs into " << a.out << " (skipped: " << s["skipped_rate"]
            << " by rate, " << s["skipped_no_site"] << " without a site, " << s["skipped_unparsable"]
            << " unparsable)\n";
  return kOk;
}

struct LabelArgs {
  std::string corpus, out;
  bool annotations = false;
};

int run_label(const LabelArgs& a, std::size_t jobs) {
  Manifest manifest("label");
  const std::string out_path = a.out.empty() ? a.corpus : a.out;
  Corpus c = read_corpus(a.corpus);
  manifest["inputs"].push_back(input_summary(a.corpus, c.get()));
  char* summary = nullptr;
  ok(tg_label_corpus(c.get(), a.annotations, jobs, &summary));
  const ordered_json s = ordered_json::parse(take(summary));
  ok(tg_corpus_write(c.get(), out_path.c_str()));

  manifest["config"] = {{"annotations", a.annotations}};
  manifest["outputs"].push_back(corpus_summary(out_path, c.get()));
  manifest["summary"] = s;
  manifest.write(out_path);

  const auto buggy = s["buggy"].get<std::size_t>();
  const auto related = s["type_related"].get<std::size_t>();
  std::cout << "type-related bugs: " << related << "/" << buggy;
  if (buggy) std::cout << " (" << percent(static_cast<double>(related) / static_cast<double>(buggy)) << ")";
  std::cout << "\n";
  if (s["unanalyzable"].get<std::size_t>()) std::cout << "unanalyzable: " << s["unanalyzable"] << "\n";
  for (const auto& [category, n] : s["histogram"].items()) std::cout << "  " << category << " " << n << "\n";
  return kOk;
}

struct EvalArgs {
  std::string corpus, out, match = "line";
  std::vector<std::string> detectors;
  std::vector<double> betas;
  bool cascade = false;
  bool annotations = false;
  std::uint32_t timeout_ms = 30000;
  std::size_t processes = 1;
};

int run_eval(const EvalArgs& a, std::size_t jobs) {
  Manifest manifest("eval");
  Corpus c = read_corpus(a.corpus);
  const tg_match_rule rule = a.match == "token" ? TG_MATCH_TOKEN : TG_MATCH_LINE;

  char* raw = nullptr;
  ok(tg_report_csv_header(a.betas.data(), a.betas.size(), &raw));
  std::string csv = take(raw) + "\n";
  for (const auto& spec : a.detectors) {
    for (int cascade = 0; cascade <= (a.cascade ? 1 : 0); ++cascade) {
      tg_detector_options opts{a.timeout_ms, a.processes, cascade, a.annotations};
      tg_detector* d = nullptr;
      ok(tg_detector_create(spec.c_str(), &opts, &d));
      Detector detector(d);
      tg_counts counts{};
      char* row = nullptr;
      ok(tg_evaluate(detector.get(), c.get(), rule, a.betas.data(), a.betas.size(), jobs, &counts, &row));
      csv += take(row) + "\n";
    }
  }
  if (a.out.empty()) {
    std::cout << csv;
    return kOk;
  }
  write_text(a.out, csv);
  manifest["config"] = {{"detectors", a.detectors}, {"cascade", a.cascade},     {"annotations", a.annotations},
                        {"match", a.match},         {"betas", a.betas},         {"timeout_ms", a.timeout_ms},
                        {"processes", a.processes}};
  manifest["inputs"].push_back(input_summary(a.corpus, c.get()));
  manifest["outputs"].push_back({{"path", a.out}});
  manifest.write(a.out);
  std::cout << csv;
  return kOk;
}

struct FilterArgs {
  std::string corpus, out;
  std::optional<std::uint64_t> seed;
};

int run_filter_train(const FilterArgs& a) {
  Manifest manifest("filter-train");
  const std::uint64_t seed = resolve_seed(a.seed);
  Corpus in = read_corpus(a.corpus);
  tg_corpus* raw = nullptr;
  ok(tg_filter_train(in.get(), seed, &raw));
  Corpus out(raw);
  ok(tg_corpus_write(out.get(), a.out.c_str()));
  manifest["seed"] = seed;
  manifest["inputs"].push_back(input_summary(a.corpus, in.get()));
  manifest["outputs"].push_back(corpus_summary(a.out, out.get()));
  manifest.write(a.out);
  std::cout << "wrote " << tg_corpus_size(out.get()) << " samples to " << a.out << "\n";
  return kOk;
}

struct DedupArgs {
  std::string eval, train, out, removed;
};

int run_dedup(const DedupArgs& a) {
  Manifest manifest("dedup");
  Corpus eval = read_corpus(a.eval);
  Corpus train = read_corpus(a.train);
  tg_corpus *kept_raw = nullptr, *removed_raw = nullptr;
  char* summary = nullptr;
  ok(tg_dedup(eval.get(), train.get(), &kept_raw, &removed_raw, &summary));
  Corpus kept(kept_raw), removed(removed_raw);
  const ordered_json s = ordered_json::parse(take(summary));
  ok(tg_corpus_write(kept.get(), a.out.c_str()));
  if (!a.removed.empty()) ok(tg_corpus_write(removed.get(), a.removed.c_str()));

  manifest["inputs"].push_back(input_summary(a.eval, eval.get()));
  manifest["inputs"].push_back(input_summary(a.train, train.get()));
  manifest["outputs"].push_back(corpus_summary(a.out, kept.get()));
  if (!a.removed.empty()) manifest["outputs"].push_back(corpus_summary(a.removed, removed.get()));
  manifest["summary"] = s;
  manifest.write(a.out);
  if (!a.removed.empty()) {
    Manifest side("dedup");
    side["inputs"] = manifest["inputs"];
    side["outputs"].push_back(corpus_summary(a.removed, removed.get()));
    side["summary"] = s;
    side.write(a.removed);
  }
  std::cout << "kept " << s["kept"] << ", removed " << s["removed"] << " (correct "
            << percent(s["removed_correct_fraction"]) << ", buggy " << percent(s["removed_buggy_fraction"]) << ")\n";
  return kOk;
}

struct FbetaArgs {
  std::string pairs, grid = "0.5,1,1.5,2", out;
};

int run_fbeta(const FbetaArgs& a) {
  Manifest manifest("fbeta");
  char* raw = nullptr;
  ok(tg_read_file(a.pairs.c_str(), &raw));
  std::stringstream in(take(raw));
  std::vector<std::string> labels;
  std::vector<double> precision, recall;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (line_no == 1 && f.size() == 3 && f[0] == "label") continue;
    if (f.size() != 3) throw Failure{kRejected, a.pairs + ":" + std::to_string(line_no) + ": expected label,precision,recall"};
    try {
      // Pairs are given in percent.
      precision.push_back(std::stod(f[1]) / 100.0);
      recall.push_back(std::stod(f[2]) / 100.0);
    } catch (const std::exception&) {
      throw Failure{kRejected, a.pairs + ":" + std::to_string(line_no) + ": precision and recall must be numbers"};
    }
    labels.push_back(f[0]);
  }
  const std::vector<double> betas = parse_grid(a.grid);
  std::vector<const char*> label_ptrs;
  for (const auto& l : labels) label_ptrs.push_back(l.c_str());
  ok(tg_fbeta_curve_csv(label_ptrs.data(), precision.data(), recall.data(), labels.size(), betas.data(), betas.size(),
                        &raw));
  const std::string csv = take(raw);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(a.out, csv);
    manifest["config"] = {{"grid", betas}};
    manifest["inputs"].push_back({{"path", a.pairs}});
    manifest["outputs"].push_back({{"path", a.out}});
    manifest.write(a.out);
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      double beta = 0;
      if (tg_crossover_beta(precision[i], recall[i], precision[j], recall[j], &beta) == TG_OK) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", beta);
        std::cerr << "crossover " << labels[i] << " / " << labels[j] << ": beta = " << buf << "\n";
      }
    }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"typegate: type-checker-aware variable-misuse bug tooling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tg_version());
  std::size_t jobs = 0;
  app.add_option("--jobs,-j", jobs, "Parallel workers (0 = one per core)");

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Type-check one function");
  c->add_option("file", check.file, "Source file")->required();
  c->add_flag("--annotations", check.annotations, "Consume type annotations");
  c->add_option("--stubs", check.stubs, "Stub declarations file");
  c->add_option("--format", check.format, "Output format")->check(CLI::IsMember({"human", "json"}));

  InjectArgs inject;
  auto* i = app.add_subcommand("inject", "Inject variable-misuse bugs into a corpus");
  i->add_option("corpus_in", inject.in, "Input corpus (JSONL)")->required();
  i->add_option("corpus_out", inject.out, "Output corpus (JSONL)")->required();
  i->add_option("--seed", inject.seed, "Seed (falls back to TYPEGATE_SEED)");
  i->add_option("--rate", inject.rate, "Fraction of correct samples that receive a buggy variant")
      ->check(CLI::Range(0.0, 1.0));

  LabelArgs label;
  auto* l = app.add_subcommand("label", "Label buggy samples as type-related or not");
  l->add_option("corpus", label.corpus, "Corpus (JSONL), rewritten in place unless --out")->required();
  l->add_flag("--annotations", label.annotations, "Consume type annotations");
  l->add_option("--out", label.out, "Write the labeled corpus here instead");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate detectors on a corpus");
  e->add_option("corpus", eval.corpus, "Corpus (JSONL)")->required();
  e->add_option("--detector", eval.detectors,
                "typecheck | typecheck:annotations | heuristic[:T] | external:CMD (repeatable)")
      ->required();
  e->add_flag("--cascade", eval.cascade, "Also report each detector behind the type checker");
  e->add_flag("--annotations", eval.annotations, "The cascade's type checker consumes annotations");
  e->add_option("--match", eval.match, "Location match rule")->check(CLI::IsMember({"line", "token"}));
  e->add_option("--beta", eval.betas, "Extra F-beta columns (repeatable)")->check(CLI::PositiveNumber);
  e->add_option("--out", eval.out, "Report CSV (stdout when omitted)");
  e->add_option("--timeout-ms", eval.timeout_ms, "Per-sample timeout for external detectors");
  e->add_option("--processes", eval.processes, "Process pool size for external detectors")
      ->check(CLI::PositiveNumber);

  FilterArgs filter;
  auto* f = app.add_subcommand("filter-train", "Replace type-related training bugs by oversampling the others");
  f->add_option("corpus", filter.corpus, "Labeled training corpus (JSONL)")->required();
  f->add_option("--seed", filter.seed, "Seed (falls back to TYPEGATE_SEED)");
  f->add_option("--out", filter.out, "Output corpus")->required();

  DedupArgs dedup;
  auto* d = app.add_subcommand("dedup", "Remove evaluation samples that also occur in training data");
  d->add_option("eval", dedup.eval, "Evaluation corpus")->required();
  d->add_option("train", dedup.train, "Training corpus")->required();
  d->add_option("--out", dedup.out, "Kept samples")->required();
  d->add_option("--removed", dedup.removed, "Also write the removed samples here");

  FbetaArgs fbeta;
  auto* b = app.add_subcommand("fbeta", "F-beta curves for (precision, recall) pairs");
  b->add_option("--pairs", fbeta.pairs, "CSV label,precision,recall in percent")->required();
  b->add_option("--grid", fbeta.grid, "Betas: comma list or start:stop:step");
  b->add_option("--out", fbeta.out, "Curve CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c) return run_check(check);
    if (*i) return run_inject(inject);
    if (*l) return run_label(label, jobs);
    if (*e) return run_eval(eval, jobs);
    if (*f) return run_filter_train(filter);
    if (*d) return run_dedup(dedup);
    if (*b) return run_fbeta(fbeta);
  } catch (const Failure& fail) {
    std::cerr << "typegate: " << fail.message << "\n";
    return fail.exit_code;
  } catch (const std::exception& ex) {
    std::cerr << "typegate: " << ex.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
