// Program samples and corpora as stored in JSONL.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace typegate {

enum class Label { Correct, Buggy };

const char* label_name(Label label) noexcept;

// Ground-truth or reported location. Real bugs mined from history may only
// carry a line.
struct Location {
  int line = 1;
  std::optional<std::size_t> token_index;

  friend bool operator==(const Location&, const Location&) = default;
};

struct MisuseRecord {
  Location location;
  std::string wrong_var;
  std::string correct_var;
  std::vector<std::string> repair_candidates;

  friend bool operator==(const MisuseRecord&, const MisuseRecord&) = default;
};

struct ProgramSample {
  std::string id;
  std::string repo;
  std::string file_path;
  std::string function_signature;
  std::string source;
  std::optional<std::string> stubs;
  Label label = Label::Correct;
  std::optional<MisuseRecord> bug;
  std::optional<bool> type_related;
  std::optional<std::vector<std::string>> matched_categories;

  friend bool operator==(const ProgramSample&, const ProgramSample&) = default;
};

struct Corpus {
  std::string name;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> parents;
  std::vector<ProgramSample> samples;

  std::size_t count(Label label) const noexcept;
};

}  // namespace typegate
