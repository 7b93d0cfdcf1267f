#include "typegate/corpus.hpp"

#include "typegate/label.hpp"
#include "typegate/mutate.hpp"

#include "json.hpp"
#include "parallel.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unistd.h>

namespace typegate {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::set<std::string> kSampleKeys = {"id",     "repo",  "file_path", "function_signature", "source",
                                           "stubs",  "label", "bug",       "type_related",       "matched_categories"};
const std::set<std::string> kBugKeys = {"line", "token_index", "wrong_var", "correct_var", "repair_candidates"};

class Reader {
 public:
  Reader(const json& obj, std::size_t line, const char* where) : obj_(obj), line_(line), where_(where) {}

  void reject_unknown(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : obj_.items())
      if (!allowed.count(key)) fail("unknown key '" + key + "'");
  }

  std::string string(const char* key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) fail(std::string("missing '") + key + "'");
    if (!it->is_string()) fail(std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  }

  // Absent and null both mean "no value".
  const json* nullable(const char* key) const {
    auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  std::vector<std::string> strings(const json& value, const char* key) const {
    if (!value.is_array()) fail(std::string("'") + key + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& v : value) {
      if (!v.is_string()) fail(std::string("'") + key + "' must be a list of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& message) const { throw SchemaError(line_, where_ + message); }

 private:
  const json& obj_;
  std::size_t line_;
  std::string where_;
};

MisuseRecord bug_from_json(const json& value, std::size_t line) {
  if (!value.is_object()) throw SchemaError(line, "'bug' must be an object or null");
  Reader r(value, line, "bug: ");
  r.reject_unknown(kBugKeys);
  MisuseRecord bug;
  auto l = value.find("line");
  if (l == value.end() || !l->is_number_integer() || l->get<long long>() < 1) r.fail("'line' must be a positive integer");
  bug.location.line = static_cast<int>(l->get<long long>());
  if (const json* t = r.nullable("token_index")) {
    if (!t->is_number_integer() || t->get<long long>() < 0) r.fail("'token_index' must be a non-negative integer");
    bug.location.token_index = static_cast<std::size_t>(t->get<long long>());
  }
  bug.wrong_var = r.string("wrong_var");
  bug.correct_var = r.string("correct_var");
  auto c = value.find("repair_candidates");
  if (c == value.end()) r.fail("missing 'repair_candidates'");
  bug.repair_candidates = r.strings(*c, "repair_candidates");
  return bug;
}

ProgramSample sample_from_json(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw SchemaError(line, "expected a JSON object");
  Reader r(obj, line, "");
  r.reject_unknown(kSampleKeys);
  ProgramSample s;
  s.id = r.string("id");
  if (s.id.empty()) r.fail("'id' must not be empty");
  s.repo = r.string("repo");
  s.file_path = r.string("file_path");
  s.function_signature = r.string("function_signature");
  s.source = r.string("source");
  if (const json* v = r.nullable("stubs")) {
    if (!v->is_string()) r.fail("'stubs' must be a string or null");
    s.stubs = v->get<std::string>();
  }
  const std::string label = r.string("label");
  if (label == "correct") {
    s.label = Label::Correct;
  } else if (label == "buggy") {
    s.label = Label::Buggy;
  } else {
    r.fail("'label' must be \"correct\" or \"buggy\"");
  }
  if (const json* v = r.nullable("bug")) s.bug = bug_from_json(*v, line);
  if ((s.label == Label::Buggy) != s.bug.has_value())
    r.fail(s.bug ? "correct sample carries a bug record" : "buggy sample lacks a bug record");
  if (const json* v = r.nullable("type_related")) {
    if (!v->is_boolean()) r.fail("'type_related' must be a boolean or null");
    s.type_related = v->get<bool>();
  }
  if (const json* v = r.nullable("matched_categories")) {
    s.matched_categories = r.strings(*v, "matched_categories");
    for (const auto& c : *s.matched_categories)
      if (!parse_category(c)) r.fail("unknown category '" + c + "'");
  }
  return s;
}

ordered_json sample_json(const ProgramSample& s) {
  ordered_json j;
  j["id"] = s.id;
  j["repo"] = s.repo;
  j["file_path"] = s.file_path;
  j["function_signature"] = s.function_signature;
  j["source"] = s.source;
  j["stubs"] = s.stubs ? ordered_json(*s.stubs) : ordered_json();
  j["label"] = label_name(s.label);
  if (s.bug) {
    ordered_json b;
    b["line"] = s.bug->location.line;
    b["token_index"] = s.bug->location.token_index ? ordered_json(*s.bug->location.token_index) : ordered_json();
    b["wrong_var"] = s.bug->wrong_var;
    b["correct_var"] = s.bug->correct_var;
    b["repair_candidates"] = s.bug->repair_candidates;
    j["bug"] = std::move(b);
  } else {
    j["bug"] = nullptr;
  }
  j["type_related"] = s.type_related ? ordered_json(*s.type_related) : ordered_json();
  j["matched_categories"] = s.matched_categories ? ordered_json(*s.matched_categories) : ordered_json();
  return j;
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Corpus parse_jsonl(std::string_view text, std::string name) {
  Corpus corpus;
  corpus.name = std::move(name);
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) throw SchemaError(line_no, "empty line");
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw SchemaError(line_no, std::string("malformed JSON: ") + e.what());
    }
    ProgramSample s = sample_from_json(obj, line_no);
    if (!ids.insert(s.id).second) throw SchemaError(line_no, "duplicate id '" + s.id + "'");
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

std::string sample_to_json(const ProgramSample& sample) { return sample_json(sample).dump(); }

std::string to_jsonl(const std::vector<ProgramSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json(s);
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  return buf.str();
}

Corpus read_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_file(path), path.stem().string());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorCode::Io, "cannot replace '" + path.string() + "': " + ec.message());
  }
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  write_file_atomic(path, to_jsonl(corpus.samples));
}

Corpus inject_corpus(const Corpus& corpus, std::uint64_t seed, double rate, InjectSummary* summary) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error(ErrorCode::InvalidArgument, "injection rate must lie in [0, 1]");
  std::set<std::string> ids;
  for (const auto& s : corpus.samples) ids.insert(s.id);

  InjectSummary local;
  Corpus out;
  out.name = corpus.name;
  out.seed = seed;
  out.parents = {corpus.name};
  for (const auto& s : corpus.samples) {
    out.samples.push_back(s);
    if (s.label != Label::Correct) continue;
    std::mt19937_64 gate = keyed_rng(seed, s.id + "#rate");
    if (!(unit_draw(gate) < rate)) {
      ++local.skipped_rate;
      continue;
    }
    ProgramSample buggy;
    try {
      buggy = inject_misuse(s, seed);
    } catch (const SyntaxError&) {
      ++local.skipped_unparsable;
      continue;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSite) throw;
      ++local.skipped_no_site;
      continue;
    }
    buggy.id = s.id + "#bug";
    if (ids.count(buggy.id)) throw Error(ErrorCode::InvalidArgument, "id '" + buggy.id + "' already exists in the corpus");
    out.samples.push_back(std::move(buggy));
    ++local.injected;
  }
  if (summary) *summary = local;
  return out;
}

LabelSummary label_corpus(Corpus& corpus, const CheckConfig& config, std::size_t jobs) {
  std::vector<std::size_t> buggy;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i)
    if (corpus.samples[i].label == Label::Buggy) buggy.push_back(i);

  std::vector<LabelResult> results(buggy.size());
  parallel_for(buggy.size(), jobs, [&](std::size_t k) { results[k] = label_sample(corpus.samples[buggy[k]], config); });

  LabelSummary summary;
  summary.buggy = buggy.size();
  for (std::size_t k = 0; k < buggy.size(); ++k) {
    const LabelResult& r = results[k];
    apply_label(corpus.samples[buggy[k]], r);
    if (r.type_related) ++summary.type_related;
    if (r.unanalyzable) ++summary.unanalyzable;
    for (Category c : r.matched_categories) ++summary.histogram[category_name(c)];
  }
  return summary;
}

DedupResult dedup(const Corpus& eval, const Corpus& train) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::set<Key> keys;
  for (const auto& s : train.samples) keys.emplace(s.repo, s.file_path, s.function_signature);

  DedupResult r;
  r.kept.name = eval.name;
  r.kept.seed = eval.seed;
  r.kept.parents = {eval.name, train.name};
  r.removed.name = eval.name + "-removed";
  r.removed.parents = r.kept.parents;
  for (const auto& s : eval.samples) {
    const bool hit = keys.count(Key{s.repo, s.file_path, s.function_signature}) > 0;
    (hit ? r.removed : r.kept).samples.push_back(s);
  }
  auto fraction = [&](Label label) -> std::optional<double> {
    const std::size_t total = eval.count(label);
    if (total == 0) return std::nullopt;
    return static_cast<double>(r.removed.count(label)) / static_cast<double>(total);
  };
  r.removed_correct_fraction = fraction(Label::Correct);
  r.removed_buggy_fraction = fraction(Label::Buggy);
  return r;
}

TypeSplit split_by_type_related(const Corpus& corpus) {
  TypeSplit split;
  for (const auto& s : corpus.samples) {
    if (s.label == Label::Correct) {
      split.correct.push_back(s);
      continue;
    }
    if (!s.type_related) throw Error(ErrorCode::UnlabeledSample, "buggy sample '" + s.id + "' is not labeled");
    (*s.type_related ? split.type_related_bugs : split.other_bugs).push_back(s);
  }
  return split;
}

Corpus filter_train(const Corpus& corpus, std::uint64_t seed) {
  std::vector<std::size_t> replace;
  std::vector<std::size_t> pool;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const ProgramSample& s = corpus.samples[i];
    ids.insert(s.id);
    if (s.label != Label::Buggy) continue;
    if (!s.type_related) throw Error(ErrorCode::UnlabeledSample, "buggy sample '" + s.id + "' is not labeled");
    (*s.type_related ? replace : pool).push_back(i);
  }

  Corpus out = corpus;
  out.seed = seed;
  out.parents = {corpus.name};
  if (replace.empty()) return out;
  if (pool.empty()) throw Error(ErrorCode::NoReplacementPool, "every bug is type-related; nothing to oversample");

  std::mt19937_64 rng = keyed_rng(seed, "filter-train");
  std::map<std::string, std::size_t> next_dup;
  for (std::size_t i : replace) {
    const ProgramSample& source = corpus.samples[pool[uniform_index(rng, pool.size())]];
    std::size_t& n = next_dup[source.id];
    std::string id;
    do {
      id = source.id + "#dup" + std::to_string(++n);
    } while (ids.count(id));
    ids.insert(id);
    out.samples[i] = source;
    out.samples[i].id = std::move(id);
  }
  return out;
}

}  // namespace typegate
