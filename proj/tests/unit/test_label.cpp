#include "doctest.h"

#include "fixtures.hpp"
#include "support.hpp"

#include "typegate/error.hpp"
#include "typegate/label.hpp"
#include "typegate/mutate.hpp"

#include <algorithm>

using namespace typegate;

namespace {

std::vector<std::string> names(const std::vector<Category>& cats) {
  std::vector<std::string> out;
  for (Category c : cats) out.push_back(category_name(c));
  return out;
}

ProgramSample take_last_bug() {
  ProgramSample s;
  s.id = "take-last";
  s.repo = "desk/test";
  s.file_path = "t.py";
  s.function_signature = "def take_last_assignment(source):";
  s.source = fixtures::kTakeLastBuggy;
  s.label = Label::Buggy;
  s.bug = MisuseRecord{{8, std::nullopt}, "first", "last", {"assn", "first", "last", "source"}};
  return s;
}

}  // namespace

TEST_CASE("labels agree with the independent oracle in both modes") {
  const Corpus fixture = support::load_corpus("label_fixture.jsonl");
  const auto oracle = support::load_json("label_oracle.json");
  REQUIRE(fixture.samples.size() == 50);
  std::size_t agree = 0, related_plain = 0;
  for (const auto& s : fixture.samples) {
    INFO(s.id);
    const auto& want = oracle.at(s.id);
    bool ok = true;
    for (const auto& [mode, annotations] : {std::pair{"plain", false}, std::pair{"annotations", true}}) {
      CheckConfig cfg;
      cfg.use_annotations = annotations;
      const LabelResult got = label_sample(s, cfg);
      const bool tr = want.at(mode).at("type_related").get<bool>();
      const auto cats = want.at(mode).at("matched_categories").get<std::vector<std::string>>();
      CHECK(got.type_related == tr);
      CHECK(names(got.matched_categories) == cats);
      ok = ok && got.type_related == tr && names(got.matched_categories) == cats;
      if (!annotations) related_plain += got.type_related;
    }
    agree += ok;
  }
  CHECK(agree == 50);
  CHECK(related_plain == 9);
}

TEST_CASE("take_last fixture is type-related through an unsupported operand") {
  const LabelResult r = label_sample(take_last_bug(), {});
  CHECK(r.type_related);
  REQUIRE(r.matched_categories.size() == 1);
  CHECK(r.matched_categories[0] == Category::UnsupportedOperand);
  CHECK_FALSE(r.unanalyzable);

  ProgramSample s = take_last_bug();
  apply_label(s, r);
  CHECK(s.type_related == true);
  CHECK(s.matched_categories == std::vector<std::string>{"unsupported-operand"});
}

TEST_CASE("a diagnostic on another line does not make the bug type-related") {
  ProgramSample s = take_last_bug();
  s.bug->location.line = 9;
  const LabelResult r = label_sample(s, {});
  CHECK_FALSE(r.type_related);
  CHECK(r.matched_categories.empty());
  CHECK(r.all_diagnostics.size() == 1);
}

TEST_CASE("missing packages become opaque stubs and import errors are dropped") {
  ProgramSample s;
  s.id = "pkg";
  s.source =
      "def total(xs):\n"
      "    acc = np.zeros(3)\n"
      "    return acc + np.sum(xs)\n";
  s.label = Label::Buggy;
  s.bug = MisuseRecord{{3, std::nullopt}, "acc", "xs", {"acc", "xs"}};
  const LabelResult r = label_sample(s, {});
  CHECK(r.phase1_missing_names == std::vector<std::string>{"np"});
  CHECK_FALSE(r.type_related);

  s.source =
      "from helpers import *\n"
      "def total(xs):\n"
      "    return xs\n";
  s.bug->location.line = 1;
  const FilteredCheck f = filtered_check(s, {});
  CHECK(f.diagnostics.empty());
  CHECK(std::any_of(f.all_diagnostics.begin(), f.all_diagnostics.end(),
                    [](const Diagnostic& d) { return d.category == Category::ImportError; }));
}

TEST_CASE("a name used as a plain value is not stubbed") {
  ProgramSample s;
  s.id = "plain";
  s.source =
      "def f(a):\n"
      "    b = a + 1\n"
      "    return missing\n";
  s.label = Label::Buggy;
  s.bug = MisuseRecord{{3, std::nullopt}, "missing", "b", {"a", "b"}};
  const LabelResult r = label_sample(s, {});
  CHECK(r.phase1_missing_names.empty());
  CHECK(r.type_related);
  CHECK(names(r.matched_categories) == std::vector<std::string>{"name-error"});
}

TEST_CASE("unparsable samples are unanalyzable and not type-related") {
  ProgramSample s = take_last_bug();
  s.source = "def broken(:\n    return 1\n";
  s.bug->location.line = 1;
  const LabelResult r = label_sample(s, {});
  CHECK(r.unanalyzable);
  CHECK_FALSE(r.type_related);
  CHECK_FALSE(r.audit.empty());
}

TEST_CASE("labeling requires a buggy sample with a record") {
  ProgramSample s = take_last_bug();
  s.label = Label::Correct;
  s.bug.reset();
  CHECK_THROWS_AS(label_sample(s, {}), Error);
}

TEST_CASE("consuming annotations never removes a type-related label") {
  const Corpus pool = support::load_corpus("label_pool.jsonl");
  const std::vector<std::string> annotated = {"mini-17", "mini-18", "mini-19", "extra-03", "extra-04"};
  CheckConfig plain, typed;
  typed.use_annotations = true;
  std::size_t checked = 0, gained = 0;
  for (const auto& s : pool.samples) {
    if (std::find(annotated.begin(), annotated.end(), s.id) == annotated.end()) continue;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const ProgramSample bug = inject_misuse(s, seed);
      const LabelResult a = label_sample(bug, plain);
      const LabelResult b = label_sample(bug, typed);
      INFO(bug.id << " seed " << seed);
      if (a.type_related) CHECK(b.type_related);
      gained += !a.type_related && b.type_related;
      ++checked;
    }
  }
  CHECK(checked == 150);
  CHECK(gained > 0);
}

TEST_CASE("correct programs are flagged only for faulty categories") {
  ProgramSample s;
  s.id = "clean";
  s.source = fixtures::kTakeLastCorrect;
  CHECK_FALSE(flag_correct_program(s, {}, {Category::NameError, Category::UnsupportedOperand}));
  s.source = fixtures::kTakeLastBuggy;
  CHECK(flag_correct_program(s, {}, {Category::UnsupportedOperand}));
  CHECK_FALSE(flag_correct_program(s, {}, {Category::NameError}));
}
