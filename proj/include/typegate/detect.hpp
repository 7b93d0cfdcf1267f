// Detectors map a program to (has_bug, location). Built-ins: the type
// checker, a lexical heuristic, external processes speaking protocol v1, and
// the cascade that consults the checker first.
#pragma once

#include "typegate/sample.hpp"
#include "typegate/typecheck.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace typegate {

struct DetectorOutcome {
  bool has_bug = false;
  std::optional<Location> location;
  std::optional<double> score;
  // The detector could not analyze the sample; the outcome is (false, none).
  bool audit = false;

  friend bool operator==(const DetectorOutcome&, const DetectorOutcome&) = default;
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string name() const = 0;
  // May be called concurrently from several threads.
  virtual DetectorOutcome run(const ProgramSample& sample) = 0;
};

// The five categories checkable without annotations, plus bad-return-type
// when annotations are consumed.
std::set<Category> default_relevant_categories(bool use_annotations);

struct TypecheckDetectorConfig {
  bool use_annotations = false;
  std::optional<std::set<Category>> relevant;  // defaults per use_annotations
  std::optional<StubSet> ambient_stubs;
};

std::unique_ptr<Detector> make_typecheck_detector(TypecheckDetectorConfig config = {});

// Per-load suspiciousness: mean of min-max normalized name rarity and
// distance to the nearest binding.
struct HeuristicScore {
  std::size_t token_index;
  int line;
  std::string name;
  double rarity;
  double distance;
  double score;
};

std::vector<HeuristicScore> heuristic_scores(const SyntaxTree& tree);
DetectorOutcome heuristic_outcome(const ProgramSample& sample, double threshold);
std::unique_ptr<Detector> make_heuristic_detector(double threshold);

struct ExternalDetectorConfig {
  std::string command;  // run through /bin/sh -c
  std::string label;    // detector name in reports; defaults to the command
  std::chrono::milliseconds timeout{30000};
  std::size_t processes = 1;
};

// Throws Error(Protocol / DetectorCrashed / Timeout) from run().
std::unique_ptr<Detector> make_external_detector(ExternalDetectorConfig config);

// Source with parameter, return and variable annotations removed. `origin`
// maps each token index of the result to the original token index.
struct StrippedSource {
  std::string source;
  std::vector<std::size_t> origin;
  std::vector<int> origin_line;
};

StrippedSource strip_annotations(const std::string& source);

// Type checker first; the inner detector sees annotation-free source and its
// location is mapped back onto the original.
std::unique_ptr<Detector> make_cascade(std::unique_ptr<Detector> checker, std::unique_ptr<Detector> inner);

// Runs the detector over every sample with up to `jobs` threads (0 = one per
// core). The first failure in sample order is rethrown.
std::map<std::string, DetectorOutcome> run_detector(Detector& detector, const std::vector<ProgramSample>& samples,
                                                    std::size_t jobs = 0);

// Parses a detector spec: "typecheck", "typecheck:annotations",
// "heuristic[:THRESHOLD]", "external:COMMAND".
std::unique_ptr<Detector> make_detector(const std::string& spec);

}  // namespace typegate
