// Dual-phase labeling of buggy samples: a bug is type-related when the
// checker reports it on the bug's own line.
#pragma once

#include "typegate/sample.hpp"
#include "typegate/typecheck.hpp"

#include <set>
#include <string>
#include <vector>

namespace typegate {

struct LabelResult {
  bool type_related = false;
  std::vector<Category> matched_categories;  // one entry per kept diagnostic
  std::vector<Diagnostic> all_diagnostics;   // phase-2 diagnostics before any filtering
  std::vector<std::string> phase1_missing_names;
  // Set when the sample could not be analyzed; type_related is then false.
  bool unanalyzable = false;
  std::string audit;
};

// Phase 1 and 2 without the bug-line filter: import and internal errors are
// dropped. `unanalyzable` reports parse, stub or engine failures.
struct FilteredCheck {
  std::vector<Diagnostic> diagnostics;
  std::vector<Diagnostic> all_diagnostics;
  std::vector<std::string> missing_names;
  bool unanalyzable = false;
  std::string audit;
};

FilteredCheck filtered_check(const ProgramSample& sample, const CheckConfig& config);

// Requires a buggy sample with a bug record (Error(InvalidArgument) otherwise).
LabelResult label_sample(const ProgramSample& sample, const CheckConfig& config);

// For correct programs: any filtered diagnostic in `faulty_categories`.
bool flag_correct_program(const ProgramSample& sample, const CheckConfig& config,
                          const std::set<Category>& faulty_categories);

// Stores the label into the sample's type_related / matched_categories.
void apply_label(ProgramSample& sample, const LabelResult& result);

}  // namespace typegate
