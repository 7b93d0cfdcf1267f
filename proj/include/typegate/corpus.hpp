// JSONL corpora and the dataset operations built on them: injection and
// labeling over whole corpora, deduplication against a training set, the
// type-related split, and training-set filtering by oversampling.
#pragma once

#include "typegate/error.hpp"
#include "typegate/sample.hpp"
#include "typegate/typecheck.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace typegate {

// Line is 1-based; 0 when the error concerns the file as a whole.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& message)
      : Error(ErrorCode::Schema, (line ? "line " + std::to_string(line) + ": " : std::string()) + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// One JSON object per "\n"-terminated line. Unknown keys, wrong types,
// label/bug disagreement and duplicate ids are rejected.
Corpus parse_jsonl(std::string_view text, std::string name = {});
std::string to_jsonl(const std::vector<ProgramSample>& samples);
std::string sample_to_json(const ProgramSample& sample);

// The corpus name is the file stem. Throws Error(Io) or SchemaError.
Corpus read_jsonl(const std::filesystem::path& path);
void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

struct InjectSummary {
  std::size_t injected = 0;
  std::size_t skipped_rate = 0;
  std::size_t skipped_no_site = 0;
  std::size_t skipped_unparsable = 0;
};

// Every correct sample is kept; with probability `rate` a misuse variant with
// id "<id>#bug" follows it. Buggy input samples pass through unchanged.
Corpus inject_corpus(const Corpus& corpus, std::uint64_t seed, double rate = 1.0, InjectSummary* summary = nullptr);

struct LabelSummary {
  std::size_t buggy = 0;
  std::size_t type_related = 0;
  std::size_t unanalyzable = 0;
  std::map<std::string, std::size_t> histogram;  // matched category -> diagnostics
};

// Labels every buggy sample in place; correct samples are left untouched.
LabelSummary label_corpus(Corpus& corpus, const CheckConfig& config, std::size_t jobs = 0);

struct DedupResult {
  Corpus kept;
  Corpus removed;
  std::optional<double> removed_correct_fraction;
  std::optional<double> removed_buggy_fraction;
};

// Removes eval samples whose (repo, file_path, function_signature) occurs in
// the training corpus.
DedupResult dedup(const Corpus& eval, const Corpus& train);

struct TypeSplit {
  std::vector<ProgramSample> type_related_bugs;
  std::vector<ProgramSample> other_bugs;
  std::vector<ProgramSample> correct;
};

// Throws Error(UnlabeledSample) when a buggy sample carries no label.
TypeSplit split_by_type_related(const Corpus& corpus);

// Replaces each type-related bug by a uniform draw, with replacement, from
// the other bugs; replacements get ids "<source-id>#dupN". Throws
// Error(NoReplacementPool) when every bug is type-related.
Corpus filter_train(const Corpus& corpus, std::uint64_t seed);

}  // namespace typegate
