#include "typegate/label.hpp"

#include "typegate/error.hpp"

#include <algorithm>

namespace typegate {

namespace {

// Unresolved global names whose every use is the root of an attribute access
// or a call: stand-ins for packages the sample never imported.
std::vector<std::string> missing_packages(const SyntaxTree& tree, const std::vector<Diagnostic>& diags) {
  const std::set<std::string> locals = build_scopes(tree).locals;
  std::set<std::string> unresolved;
  for (const auto& d : diags) {
    if (d.category != Category::NameError) continue;
    const std::string& name = tree.tokens.tokens.at(d.span.token_index).text;
    if (!locals.count(name)) unresolved.insert(name);
  }
  std::set<std::string> disqualified;
  walk_expressions(tree, [&](const Expr& e, const Expr* parent) {
    if (e.kind != ExprKind::Name || !unresolved.count(e.text)) return;
    const bool root = parent && (parent->kind == ExprKind::Attribute || parent->kind == ExprKind::Call) &&
                      parent->children[0].get() == &e;
    if (!root) disqualified.insert(e.text);
  });
  std::vector<std::string> out;
  for (const auto& n : unresolved)
    if (!disqualified.count(n)) out.push_back(n);
  return out;
}

}  // namespace

FilteredCheck filtered_check(const ProgramSample& sample, const CheckConfig& config) {
  FilteredCheck out;
  CheckConfig cfg = config;
  if (sample.stubs && !sample.stubs->empty()) {
    try {
      StubSet own = StubSet::parse(*sample.stubs);
      if (cfg.ambient_stubs) {
        cfg.ambient_stubs->merge(own);
      } else {
        cfg.ambient_stubs = std::move(own);
      }
    } catch (const SyntaxError& e) {
      out.unanalyzable = true;
      out.audit = std::string("stubs: ") + e.what();
      return out;
    }
  }
  SyntaxTree tree;
  try {
    tree = parse_source(sample.source);
  } catch (const SyntaxError& e) {
    out.unanalyzable = true;
    out.audit = e.what();
    return out;
  }

  std::vector<Diagnostic> phase1 = check(tree, cfg);
  out.missing_names = missing_packages(tree, phase1);
  std::vector<Diagnostic> phase2 = phase1;
  if (!out.missing_names.empty()) {
    if (!cfg.ambient_stubs) cfg.ambient_stubs.emplace();
    for (const auto& n : out.missing_names) cfg.ambient_stubs->add_opaque(n);
    phase2 = check(tree, cfg);
  }
  out.all_diagnostics = phase2;
  for (const auto& d : phase2) {
    if (d.category == Category::InternalError) {
      out.unanalyzable = true;
      out.audit = d.message;
      out.diagnostics.clear();
      return out;
    }
    if (d.category != Category::ImportError) out.diagnostics.push_back(d);
  }
  return out;
}

LabelResult label_sample(const ProgramSample& sample, const CheckConfig& config) {
  if (sample.label != Label::Buggy || !sample.bug)
    throw Error(ErrorCode::InvalidArgument, "sample '" + sample.id + "' is not a buggy sample with a bug record");
  FilteredCheck fc = filtered_check(sample, config);
  LabelResult result;
  result.all_diagnostics = std::move(fc.all_diagnostics);
  result.phase1_missing_names = std::move(fc.missing_names);
  result.unanalyzable = fc.unanalyzable;
  result.audit = std::move(fc.audit);
  for (const auto& d : fc.diagnostics)
    if (d.span.line == sample.bug->location.line) result.matched_categories.push_back(d.category);
  result.type_related = !result.matched_categories.empty();
  return result;
}

bool flag_correct_program(const ProgramSample& sample, const CheckConfig& config,
                          const std::set<Category>& faulty_categories) {
  FilteredCheck fc = filtered_check(sample, config);
  return std::any_of(fc.diagnostics.begin(), fc.diagnostics.end(),
                     [&](const Diagnostic& d) { return faulty_categories.count(d.category) > 0; });
}

void apply_label(ProgramSample& sample, const LabelResult& result) {
  sample.type_related = result.type_related;
  std::vector<std::string> names;
  for (Category c : result.matched_categories) names.emplace_back(category_name(c));
  sample.matched_categories = std::move(names);
}

}  // namespace typegate
